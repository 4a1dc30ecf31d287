#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "kdvstar/coupling.hpp"

using namespace kdvstar;

namespace {

const double kTol = 1e-10;

EdgeParams std_edge() { return {1.0, 0.0, -6.0, 1.0, 0.0, ""}; }

StarGraph balanced(int n) {
    StarGraph g;
    for (int i = 0; i < n; ++i) {
        g.edges_minus.push_back(std_edge());
        g.edges_plus.push_back(std_edge());
    }
    return g;
}

StarGraph c6_fixture() {
    StarGraph g;
    g.edges_minus.push_back({18.0, 1.0, -12.0, 3.0, 0.0, ""});
    g.edges_plus.push_back({1.0, 1.0, -6.0, 1.0, 0.0, ""});
    g.edges_plus.push_back({1.0, 1.0, -6.0, 1.0, 0.0, ""});
    return g;
}

Matrix row(std::initializer_list<double> v) {
    Matrix m(1, static_cast<int>(v.size()));
    int j = 0;
    for (double x : v) m(0, j++) = x;
    return m;
}

YJunctionSpec yfixture() {
    YJunctionSpec s;
    s.a = 1.0 / std::sqrt(2.0);
    s.minus = std_edge();
    s.plus1 = std_edge();
    s.plus1.gamma = -6.0 * std::sqrt(2.0);
    s.plus2 = s.plus1;
    s.U = row({0.5, 0.5});
    return s;
}

std::vector<double> tgrid(double a, double b, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
    return t;
}

std::vector<SolitonProfile> profiles_of(const StarGraph& g) {
    std::vector<SolitonProfile> p;
    for (auto& e : g.all_edges()) p.push_back(build_profile(e));
    return p;
}

Matrix ones_column(std::size_t n) { return Matrix::Ones(static_cast<int>(n), 1); }

bool has(const std::vector<std::string>& ids, const char* id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool localizes(const ConditionEntry* e, Orientation side, std::size_t idx) {
    for (auto& r : e->edges)
        if (r.side == side && r.index == idx) return true;
    return false;
}

// Random graph satisfying C1-C7: equal sums of speeds and of betas on the
// two sides, alpha from C3, gamma from C4, y0 from C2, and a rank-one U
// that is a weighted partial isometry.
struct Passing {
    StarGraph g;
    Matrix U;
};

Passing random_passing(std::mt19937_64& rng, int nm, int np) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto split = [&](double total, int n) {
        std::vector<double> w(n);
        double s = 0;
        for (auto& x : w) s += (x = 0.5 + u(rng));
        for (auto& x : w) x *= total / s;
        return w;
    };
    double csum = 1.0 + 3.0 * u(rng), bsum = -0.2 * csum + 0.4 * csum * u(rng);
    auto cm = split(csum, nm), cp = split(csum, np);
    // betas proportional to speeds keep every beta + c positive
    double K = 0.5 + u(rng), amp_ratio = (u(rng) < 0.5 ? -1 : 1) * (0.1 + u(rng)), tau = 2 * u(rng) - 1;
    Passing out;
    auto make = [&](double c) {
        EdgeParams e;
        e.c = c;
        e.beta = bsum * c / csum;
        double bc = e.beta + e.c;
        e.alpha = bc * c * c / (K * K);
        e.gamma = bc / amp_ratio;
        e.y0 = tau * c;
        return e;
    };
    for (double c : cm) out.g.edges_minus.push_back(make(c));
    for (double c : cp) out.g.edges_plus.push_back(make(c));
    Vector xm(nm), xp(np), dp(np);
    for (int i = 0; i < nm; ++i) xm(i) = 1.0 / cm[i];
    for (int j = 0; j < np; ++j) {
        xp(j) = 1.0 / cp[j];
        dp(j) = out.g.edges_plus[j].alpha;
    }
    Vector v = dp.asDiagonal() * xp;
    out.U = xm * v.transpose() / v.dot(xp);
    return out;
}

}  // namespace

TEST_CASE("balanced identical graph passes every condition with zero residual") {
    auto g = balanced(2);
    auto r = check_main_theorem(g, Matrix::Identity(2, 2), kTol);
    CHECK(r.pass);
    REQUIRE(r.conditions.size() == 7);
    for (auto& c : r.conditions)
        if (c.id != "C1") CHECK(c.residual == 0.0);
    CHECK(r.profiles.size() == 4);
}

TEST_CASE("constant beta on a 1-in 2-out graph fails exactly C6") {
    auto r = check_main_theorem(c6_fixture(), row({1.0 / 6, 1.0 / 6}), kTol);
    CHECK_FALSE(r.pass);
    CHECK(r.failed_ids() == std::vector<std::string>{"C6"});
    CHECK(r.find("C6")->residual == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.preconditions.front().pass);
    CHECK(r.profiles.empty());
}

TEST_CASE("y-junction data fails amplitude and flux under continuity") {
    auto s = yfixture();
    auto r = check_main_theorem(yjunction_graph(s), s.U, kTol);
    auto failed = r.failed_ids();
    CHECK(failed == std::vector<std::string>{"C4", "C5"});
    double a = 1.0 / 6.0, b = 1.0 / (6.0 * std::sqrt(2.0));
    double mean = (a + 2 * b) / 3;
    CHECK(r.find("C4")->residual == doctest::Approx((a - b) / std::max(1.0, mean)));
    CHECK(r.find("C5")->residual == doctest::Approx(1.0));
}

TEST_CASE("speed perturbation is localized") {
    auto g = balanced(1);
    g.edges_plus[0].c *= 1.01;
    auto r = check_main_theorem(g, Matrix::Identity(1, 1), kTol);
    auto failed = r.failed_ids();
    CHECK(has(failed, "C3"));
    CHECK(has(failed, "C7"));
    CHECK_FALSE(has(failed, "C1"));
    CHECK_FALSE(has(failed, "C2"));
    CHECK_FALSE(has(failed, "C6"));
    CHECK(localizes(r.find("C3"), Orientation::Outgoing, 0));
    CHECK(localizes(r.find("C7"), Orientation::Incoming, 0));
}

TEST_CASE("non-contractive U is a failed precondition") {
    auto r = check_main_theorem(balanced(1), row({2.0}), kTol);
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.preconditions.front().pass);
    CHECK_THROWS_AS(check_main_theorem(balanced(1), row({1.0, 1.0}), kTol), DimensionError);
}

TEST_CASE("C1 needs a strict margin") {
    auto g = balanced(1);
    g.edges_minus[0].beta = -1.0 + 1e-12;
    auto r = check_main_theorem(g, Matrix::Identity(1, 1), kTol);
    CHECK_FALSE(r.find("C1")->pass);
    CHECK(localizes(r.find("C1"), Orientation::Incoming, 0));
}

TEST_CASE("spread residual") {
    CHECK(spread_residual({2.0, 2.0, 2.0}) == 0.0);
    CHECK(spread_residual({1.0, 3.0}) == doctest::Approx(1.0));
    CHECK(spread_residual({0.1, 0.3}) == doctest::Approx(0.2));
}

TEST_CASE("monotone in the tolerance") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = random_passing(rng, 1 + trial % 2, 1 + trial % 3);
        p.g.edges_plus[0].c *= 1.0 + 1e-6 * (trial % 5);
        double margin = 1e300;
        for (auto& e : p.g.all_edges()) margin = std::min(margin, e.beta + e.c);
        bool prev = false;
        // C1 is an open condition with margin tol, so stay below the margin
        for (double tol : {1e-12, 1e-9, 1e-6, 1e-3, 1.0}) {
            if (tol >= margin) break;
            bool now = check_main_theorem(p.g, p.U, tol).pass;
            if (prev) CHECK(now);
            prev = now;
        }
    }
}

TEST_CASE("passing graphs satisfy the vertex conditions along the wave") {
    std::mt19937_64 rng(8);
    auto times = tgrid(-20, 20, 401);
    for (int trial = 0; trial < 60; ++trial) {
        auto p = random_passing(rng, 1 + trial % 3, 1 + (trial / 3) % 3);
        auto r = check_main_theorem(p.g, p.U, kTol);
        REQUIRE(r.pass);
        auto res = verify_vertex_numerically(p.g, p.U, ones_column(p.g.size()), r.profiles, times);
        CHECK(res.max() <= 1e-8);
        for (auto& prof : r.profiles)
            for (double y : tgrid(-10, 10, 101))
                CHECK(std::abs(kdv_residual(prof, y)) <= 1e-8 * std::max(1.0, std::abs(prof.amplitude)));
    }
}

TEST_CASE("unitary U preserves the weighted norm of inverse speeds") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        auto p = random_passing(rng, 2, 2);
        // on a balanced pair, the rank-one map is unitary only if it has
        // full rank; check the norm identity that C5 and C7 give together
            double nm = 0, np = 0;
        for (auto& e : p.g.edges_minus) nm += e.alpha / (e.c * e.c);
        for (auto& e : p.g.edges_plus) np += e.alpha / (e.c * e.c);
        CHECK(nm == doctest::Approx(np).epsilon(1e-12));
    }
    // and directly for a weighted unitary U on the balanced graph
    auto g = balanced(2);
    Matrix U(2, 2);
    U << 0, 1, 1, 0;
    REQUIRE(is_weighted_unitary(U, {1, 1}, {1, 1}, 1e-12).pass);
    CHECK(check_main_theorem(g, U, kTol).pass);
}

TEST_CASE("scaling corollary") {
    auto same = check_scaling_corollary(balanced(2), kTol);
    CHECK(same.verdict == ScalingVerdict::Consistent);
    CHECK(same.wave_possible);

    StarGraph g;
    g.edges_minus.push_back({1, 1, 1, 1, 0, ""});
    g.edges_plus.push_back({2, 2, 2, 2, 0, ""});
    auto scaled = check_scaling_corollary(g, kTol);
    CHECK(scaled.verdict == ScalingVerdict::Consistent);
    CHECK_FALSE(scaled.wave_possible);
    CHECK(has(scaled.report.failed_ids(), "C3"));
    double c3 = std::sqrt(2.0), c3b = 2 * std::sqrt(2.0);
    CHECK(scaled.report.find("C3")->residual ==
          doctest::Approx((c3b - c3) / std::max(1.0, (c3 + c3b) / 2)));

    StarGraph h = balanced(1);
    h.edges_plus[0].gamma = -5.0;
    CHECK(check_scaling_corollary(h, kTol).verdict == ScalingVerdict::Inapplicable);
}

TEST_CASE("balanced corollary") {
    CHECK(check_balanced_corollary(balanced(2), Matrix::Identity(2, 2), kTol).verdict ==
          BalancedVerdict::Pass);

    StarGraph g;
    EdgeParams e{1.0, 0.5, -6.0, 1.0, 0.0, ""};
    g.edges_minus = {e};
    g.edges_plus = {e, e};
    CHECK(check_balanced_corollary(g, row({0.5, 0.5}), kTol).verdict == BalancedVerdict::Fail);

    auto b = balanced(2);
    b.edges_plus[1].gamma = -3.0;
    CHECK(check_balanced_corollary(b, Matrix::Identity(2, 2), kTol).verdict == BalancedVerdict::Fail);

    auto na = balanced(1);
    na.edges_plus[0].alpha = 2.0;
    CHECK(check_balanced_corollary(na, Matrix::Identity(1, 1), kTol).verdict ==
          BalancedVerdict::Inapplicable);
}

TEST_CASE("balanced corollary agrees with the theorem") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int passes = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int nm = 1 + trial % 3, np = 1 + (trial / 3) % 3;
        if (trial % 4 == 0) np = nm;
        double alpha = 0.3 + 2 * u(rng), beta = -1.5 + 3 * u(rng);
        double cmin = -2.0 / 3.0 * beta + 1e-6;
        bool uniform = trial % 2 == 0;
        double c0 = std::max(cmin, 0.05) + 2 * u(rng), g0 = (u(rng) < 0.5 ? -1 : 1) * (1 + 5 * u(rng));
        StarGraph g;
        auto edge = [&]() {
            EdgeParams e{alpha, beta, g0, c0, 0.0, ""};
            if (!uniform) {
                if (u(rng) < 0.3) e.c = std::max(cmin, 0.05) + 2 * u(rng);
                if (u(rng) < 0.3) e.gamma = g0 * (1 + u(rng));
            }
            return e;
        };
        for (int i = 0; i < nm; ++i) g.edges_minus.push_back(edge());
        for (int j = 0; j < np; ++j) g.edges_plus.push_back(edge());
        Matrix U = Matrix::Zero(nm, np);
        for (int i = 0; i < std::min(nm, np); ++i) U(i, (i + trial) % np) = 1.0;
        if (nm > np) U *= 0.0;
        if (!is_weighted_contraction(U, std::vector<double>(nm, alpha), std::vector<double>(np, alpha), kTol).pass)
            continue;
        auto corollary = check_balanced_corollary(g, U, kTol);
        REQUIRE(corollary.verdict != BalancedVerdict::Inapplicable);
        bool theorem = check_main_theorem(g, U, kTol).pass;
        CHECK((corollary.verdict == BalancedVerdict::Pass) == theorem);
        passes += theorem;
    }
    CHECK(passes > 5);
}

TEST_CASE("y-junction fixture passes its own condition list") {
    auto r = check_yjunction(yfixture(), 1e-12);
    CHECK(r.pass);
    for (auto& c : r.conditions)
        if (!c.advisory && c.id != "C1Y") CHECK(c.residual <= 1e-12);
}

TEST_CASE("y-junction with a = 1 fails the weighted flux") {
    auto s = yfixture();
    s.a = 1.0;
    auto r = check_yjunction(s, 1e-12);
    CHECK_FALSE(r.pass);
    CHECK(has(r.failed_ids(), "C5Y"));
    CHECK(std::abs(r.find("C5Y")->residual - 1.0) <= 1e-12);
}

TEST_CASE("y-junction with a = 0 is rejected") {
    auto s = yfixture();
    s.a = 0.0;
    CHECK_THROWS_AS(check_yjunction(s, 1e-12), DomainError);
}

TEST_CASE("vertex check on the balanced graph") {
    auto g = balanced(2);
    auto res = verify_vertex_numerically(g, Matrix::Identity(2, 2), ones_column(4), profiles_of(g),
                                         tgrid(-20, 20, 401));
    CHECK(res.max() <= 1e-12);
}

TEST_CASE("vertex check on the y-junction") {
    auto s = yfixture();
    auto g = yjunction_graph(s);
    Matrix Y(3, 1);
    Y << 1, s.a, s.a;
    auto times = tgrid(-10, 10, 201);
    auto res = verify_vertex_numerically(g, s.U, Y, profiles_of(g), times);
    CHECK(res.trace_to_Y <= 1e-9);
    CHECK(res.flux_to_Yperp <= 1e-9);
    // with U = [1/2, 1/2] the first-derivative row is off by the factor a
    CHECK(res.derivative_U > 1e-3);

    Matrix Ua = row({s.a, s.a});
    auto fixed = verify_vertex_numerically(g, Ua, Y, profiles_of(g), times);
    CHECK(fixed.max() <= 1e-9);

    auto tampered = g;
    tampered.edges_plus[0].gamma *= 1.01;
    auto bad = verify_vertex_numerically(tampered, Ua, Y, profiles_of(tampered), times);
    CHECK(bad.max() > 1e-3);
}

TEST_CASE("solve for the y-junction ratio and amplitudes") {
    PartialGraph pg;
    pg.kind = CouplingKind::YJunction;
    pg.minus.push_back({std_edge(), false, false});
    PartialEdge unknown{std_edge(), true, false};
    pg.plus = {unknown, unknown};
    auto c = solve_compatible_params(pg, kTol);
    REQUIRE(c.feasible);
    REQUIRE(c.a.has_value());
    CHECK(*c.a == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(c.graph.edges_plus[0].gamma == doctest::Approx(-6.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(c.graph.edges_plus[1].gamma == doctest::Approx(-6.0 * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("solve copies the phase offset") {
    PartialGraph pg;
    auto e = std_edge();
    e.y0 = 1.5;
    pg.minus = {{e, false, false}, {e, false, true}};
    pg.plus = {{e, false, true}, {e, false, false}};
    pg.plus[0].params.y0 = 99.0;
    auto c = solve_compatible_params(pg, kTol);
    REQUIRE(c.feasible);
    CHECK(c.graph.edges_minus[1].y0 == 1.5);
    CHECK(c.graph.edges_plus[0].y0 == 1.5);
}

TEST_CASE("solve reports C3 as the blocker") {
    PartialGraph pg;
    pg.minus = {{std_edge(), false, false}};
    auto e = std_edge();
    e.c = 2.0;
    pg.plus = {{e, true, true}};
    auto c = solve_compatible_params(pg, kTol);
    CHECK_FALSE(c.feasible);
    CHECK(has(c.blocking, "C3"));
}

TEST_CASE("report serializations") {
    auto r = check_main_theorem(c6_fixture(), row({1.0 / 6, 1.0 / 6}), kTol);
    auto json = report_to_json(r);
    CHECK(json.find("\"C6\"") != std::string::npos);
    auto table = report_to_table(r);
    CHECK(table.find("C6") != std::string::npos);
    CHECK(table.find("FAIL") != std::string::npos);
    CHECK(report_to_json(r) == json);
}
