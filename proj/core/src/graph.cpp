#include "kdvstar/graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace kdvstar {

using nlohmann::json;

const char* to_string(Orientation o) { return o == Orientation::Incoming ? "incoming" : "outgoing"; }

const EdgeParams& StarGraph::edge(std::size_t k) const {
    if (k < edges_minus.size()) return edges_minus[k];
    return edges_plus.at(k - edges_minus.size());
}

Orientation StarGraph::orientation(std::size_t k) const {
    return k < edges_minus.size() ? Orientation::Incoming : Orientation::Outgoing;
}

std::vector<EdgeParams> StarGraph::all_edges() const {
    std::vector<EdgeParams> out(edges_minus);
    out.insert(out.end(), edges_plus.begin(), edges_plus.end());
    return out;
}

std::string describe(const EdgeRef& e) {
    return std::string(e.side == Orientation::Incoming ? "edges_minus[" : "edges_plus[") +
           std::to_string(e.index) + "]";
}

ValidationError::ValidationError(std::vector<Violation> v)
    : std::runtime_error([&] {
          std::string msg = "invalid graph:";
          for (auto& x : v)
              msg += " " + (x.edge ? describe(*x.edge) + "." : std::string()) + x.field + ": " + x.message + ";";
          return msg;
      }()),
      violations_(std::move(v)) {}

std::vector<Violation> validate_graph(const StarGraph& g) {
    std::vector<Violation> out;
    if (g.size() == 0) out.push_back({std::nullopt, "edges", "graph needs at least one edge"});
    auto check = [&](const std::vector<EdgeParams>& edges, Orientation side) {
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto& p = edges[i];
            EdgeRef ref{side, i};
            // written so that NaN fails every test
            if (!(p.alpha > 0.0) || !std::isfinite(p.alpha))
                out.push_back({ref, "alpha", "must be finite and positive"});
            if (!std::isfinite(p.beta)) out.push_back({ref, "beta", "must be finite"});
            if (!(p.gamma != 0.0) || !std::isfinite(p.gamma))
                out.push_back({ref, "gamma", "must be finite and nonzero"});
            if (!(p.c != 0.0) || !std::isfinite(p.c))
                out.push_back({ref, "c", "must be finite and nonzero"});
            if (!std::isfinite(p.y0)) out.push_back({ref, "y0", "must be finite"});
        }
    };
    check(g.edges_minus, Orientation::Incoming);
    check(g.edges_plus, Orientation::Outgoing);
    return out;
}

namespace {

double number(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field \"" + key + "\"");
    if (!it->is_number()) throw ParseError(where + "." + key + ": expected a number");
    return it->get<double>();
}

std::vector<EdgeParams> parse_edges(const json& root, const char* key) {
    std::vector<EdgeParams> out;
    auto it = root.find(key);
    if (it == root.end()) throw ParseError(std::string("missing top-level field \"") + key + "\"");
    if (!it->is_array()) throw ParseError(std::string(key) + ": expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
        const json& e = (*it)[i];
        std::string where = std::string(key) + "[" + std::to_string(i) + "]";
        if (!e.is_object()) throw ParseError(where + ": expected an object");
        EdgeParams p;
        p.alpha = number(e, "alpha", where);
        p.beta = number(e, "beta", where);
        p.gamma = number(e, "gamma", where);
        p.c = number(e, "c", where);
        p.y0 = number(e, "y0", where);
        if (auto l = e.find("label"); l != e.end()) {
            if (!l->is_string()) throw ParseError(where + ".label: expected a string");
            p.label = l->get<std::string>();
        }
        out.push_back(std::move(p));
    }
    return out;
}

json edge_json(const EdgeParams& p) {
    json e = {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"c", p.c}, {"y0", p.y0}};
    if (!p.label.empty()) e["label"] = p.label;
    return e;
}

json graph_json(const StarGraph& g) {
    json root;
    root["edges_minus"] = json::array();
    root["edges_plus"] = json::array();
    for (auto& p : g.edges_minus) root["edges_minus"].push_back(edge_json(p));
    for (auto& p : g.edges_plus) root["edges_plus"].push_back(edge_json(p));
    return root;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed graph file: ") + e.what());
    }
}

}  // namespace

GraphFile load_graph_file(const std::string& text) {
    json root = parse_json(text);
    if (!root.is_object()) throw ParseError("graph file must be a JSON object");

    GraphFile f;
    f.graph.edges_minus = parse_edges(root, "edges_minus");
    f.graph.edges_plus = parse_edges(root, "edges_plus");

    if (auto c = root.find("coupling"); c != root.end()) {
        if (!c->is_object()) throw ParseError("coupling: expected an object");
        std::string kind = c->value("kind", "continuity");
        if (kind == "continuity") {
            f.coupling.kind = CouplingKind::Continuity;
        } else if (kind == "y-junction") {
            f.coupling.kind = CouplingKind::YJunction;
            f.coupling.a = number(*c, "a", "coupling");
        } else {
            throw ParseError("coupling.kind: unknown kind \"" + kind + "\"");
        }
        if (auto u = c->find("U"); u != c->end()) {
            if (!u->is_array()) throw ParseError("coupling.U: expected a row-major array");
            for (auto& x : *u) {
                if (!x.is_number()) throw ParseError("coupling.U: entries must be numbers");
                f.coupling.U.push_back(x.get<double>());
            }
        }
    }
    if (auto t = root.find("tolerance"); t != root.end()) {
        if (!t->is_number() || !(t->get<double>() > 0.0))
            throw ParseError("tolerance: expected a positive number");
        f.tolerance = t->get<double>();
    }
    if (auto s = root.find("simulate"); s != root.end()) {
        if (!s->is_object()) throw ParseError("simulate: expected an object");
        auto& sim = f.simulate;
        auto opt = [&](const char* key, double& dst) {
            if (s->contains(key)) dst = number(*s, key, "simulate");
        };
        opt("h", sim.h);
        opt("length", sim.length);
        opt("t_final", sim.t_final);
        opt("c_stab", sim.c_stab);
        opt("max_rel_error", sim.max_rel_error);
        opt("max_vertex_residual", sim.max_vertex_residual);
        if (s->contains("dt")) sim.dt = number(*s, "dt", "simulate");
        if (s->contains("frames")) sim.frames = static_cast<int>(number(*s, "frames", "simulate"));
    }

    auto v = validate_graph(f.graph);
    if (!v.empty()) throw ValidationError(std::move(v));
    if (f.coupling.kind == CouplingKind::YJunction &&
        (f.graph.edges_minus.size() != 1 || f.graph.edges_plus.size() != 2))
        throw ValidationError({{std::nullopt, "coupling", "y-junction needs one incoming and two outgoing edges"}});
    if (!f.coupling.U.empty() &&
        f.coupling.U.size() != f.graph.edges_minus.size() * f.graph.edges_plus.size())
        throw ValidationError({{std::nullopt, "coupling.U", "needs |E-| x |E+| entries"}});
    return f;
}

StarGraph load_graph(const std::string& text) { return load_graph_file(text).graph; }

std::string serialize_graph(const StarGraph& g) { return graph_json(g).dump(2) + "\n"; }

std::string serialize_graph_file(const GraphFile& f) {
    json root = graph_json(f.graph);
    json c;
    c["kind"] = f.coupling.kind == CouplingKind::Continuity ? "continuity" : "y-junction";
    if (f.coupling.kind == CouplingKind::YJunction) c["a"] = f.coupling.a;
    if (!f.coupling.U.empty()) c["U"] = f.coupling.U;
    root["coupling"] = c;
    root["tolerance"] = f.tolerance;
    const auto& s = f.simulate;
    root["simulate"] = {{"h", s.h},
                        {"length", s.length},
                        {"t_final", s.t_final},
                        {"c_stab", s.c_stab},
                        {"frames", s.frames},
                        {"max_rel_error", s.max_rel_error},
                        {"max_vertex_residual", s.max_vertex_residual}};
    if (s.dt) root["simulate"]["dt"] = *s.dt;
    return root.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace kdvstar
