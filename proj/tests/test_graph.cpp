#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "kdvstar/graph.hpp"

using namespace kdvstar;

namespace {

std::string data(const char* name) { return read_text_file(std::string(KDVSTAR_TEST_DATA) + "/" + name); }

StarGraph single(EdgeParams p) {
    StarGraph g;
    g.edges_plus.push_back(p);
    return g;
}

}  // namespace

TEST_CASE("valid single edge has no violations") {
    EdgeParams p{1.0, 0.0, -6.0, 1.0, 0.0, ""};
    CHECK(validate_graph(single(p)).empty());
}

TEST_CASE("alpha zero is reported at edge 0") {
    auto v = validate_graph(single({0.0, 0.0, -6.0, 1.0, 0.0, ""}));
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "alpha");
    REQUIRE(v[0].edge.has_value());
    CHECK(v[0].edge->index == 0);
}

TEST_CASE("gamma zero and c zero are separate violations") {
    auto v = validate_graph(single({1.0, 0.0, 0.0, 0.0, 0.0, ""}));
    REQUIRE(v.size() == 2);
    CHECK(v[0].field == "gamma");
    CHECK(v[1].field == "c");
}

TEST_CASE("empty graph violates the edge count") {
    auto v = validate_graph(StarGraph{});
    REQUIRE(v.size() == 1);
    CHECK_FALSE(v[0].edge.has_value());
}

TEST_CASE("validate_graph is total on non-finite input") {
    double nan = std::numeric_limits<double>::quiet_NaN();
    double inf = std::numeric_limits<double>::infinity();
    auto v = validate_graph(single({nan, inf, nan, -inf, nan, ""}));
    CHECK(v.size() >= 4);
}

TEST_CASE("minimal file loads as one in, one out") {
    auto g = load_graph(data("minimal.json"));
    CHECK(g.edges_minus.size() == 1);
    CHECK(g.edges_plus.size() == 1);
    CHECK(g.edges_minus[0].label == "in");
    CHECK(g.edges_plus[0].gamma == -6.0);
}

TEST_CASE("missing gamma is a parse error naming the field") {
    try {
        load_graph(data("missing_gamma.json"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        std::string msg = e.what();
        CHECK(msg.find("gamma") != std::string::npos);
        CHECK(msg.find("edges_plus[0]") != std::string::npos);
    }
}

TEST_CASE("malformed text is a parse error with a position") {
    try {
        load_graph("{\"edges_minus\": [ {\"alpha\": 1,, } ]}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("invariant violation raises ValidationError") {
    CHECK_THROWS_AS(load_graph(data("bad_alpha.json")), ValidationError);
}

TEST_CASE("y-junction file has three edges and its coupling") {
    auto f = load_graph_file(data("yjunction.json"));
    CHECK(f.graph.size() == 3);
    CHECK(f.graph.edges_plus.size() == 2);
    CHECK(f.coupling.kind == CouplingKind::YJunction);
    CHECK(f.coupling.a == doctest::Approx(1.0 / std::sqrt(2.0)));
    REQUIRE(f.coupling.U.size() == 2);
}

TEST_CASE("y-junction coupling without a is rejected") {
    const char* text = R"({"edges_minus":[{"alpha":1,"beta":0,"gamma":-6,"c":1,"y0":0}],
        "edges_plus":[{"alpha":1,"beta":0,"gamma":-6,"c":1,"y0":0}],
        "coupling":{"kind":"y-junction"}})";
    CHECK_THROWS_AS(load_graph_file(text), ParseError);
}

TEST_CASE("serialize then load is field-for-field equal") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        StarGraph g;
        int nm = trial % 3, np = 1 + trial % 4;
        auto edge = [&](int i) {
            EdgeParams p;
            p.alpha = 0.1 + std::abs(u(rng));
            p.beta = u(rng);
            p.gamma = u(rng) + (trial % 2 ? 7.0 : -7.0);
            p.c = u(rng) + 11.0;
            p.y0 = u(rng) * 1e-7;
            p.label = i % 2 ? "e" + std::to_string(i) : "";
            return p;
        };
        for (int i = 0; i < nm; ++i) g.edges_minus.push_back(edge(i));
        for (int i = 0; i < np; ++i) g.edges_plus.push_back(edge(i));
        auto back = load_graph(serialize_graph(g));
        CHECK(back == g);
    }
}

TEST_CASE("graph file round-trip keeps coupling and tolerance") {
    auto f = load_graph_file(data("unbalanced_c6.json"));
    auto back = load_graph_file(serialize_graph_file(f));
    CHECK(back.graph == f.graph);
    CHECK(back.coupling.U == f.coupling.U);
    CHECK(back.tolerance == f.tolerance);
}
