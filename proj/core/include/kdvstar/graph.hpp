#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kdvstar {

enum class Orientation { Incoming, Outgoing };

const char* to_string(Orientation o);

// Coefficients of du/dt = -alpha u_xxx + beta u_x + gamma u u_x on one
// half-line edge, together with the wave speed and phase offset of the
// travelling wave attached to it.
struct EdgeParams {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = -6.0;
    double c = 1.0;
    double y0 = 0.0;
    std::string label;

    bool operator==(const EdgeParams&) const = default;
};

// Edges in E- live on (-inf, 0), edges in E+ on (0, inf). Positions in
// these vectors are the edge identities used by every other module.
struct StarGraph {
    std::vector<EdgeParams> edges_minus;
    std::vector<EdgeParams> edges_plus;

    std::size_t size() const { return edges_minus.size() + edges_plus.size(); }
    // Edge k in the concatenated order E- then E+.
    const EdgeParams& edge(std::size_t k) const;
    Orientation orientation(std::size_t k) const;
    std::vector<EdgeParams> all_edges() const;

    bool operator==(const StarGraph&) const = default;
};

struct EdgeRef {
    Orientation side = Orientation::Incoming;
    std::size_t index = 0;
};

std::string describe(const EdgeRef& e);

struct Violation {
    std::optional<EdgeRef> edge;  // empty for graph-level violations
    std::string field;
    std::string message;
};

std::vector<Violation> validate_graph(const StarGraph& g);

// Vertex coupling attached to a graph file.
enum class CouplingKind { Continuity, YJunction };

struct CouplingConfig {
    CouplingKind kind = CouplingKind::Continuity;
    double a = 1.0;               // jump ratio, y-junction only
    std::vector<double> U;        // row-major |E-| x |E+|; empty means identity
};

struct SimulationConfig {
    double h = 0.05;
    double length = 40.0;
    double t_final = 5.0;
    std::optional<double> dt;
    double c_stab = 1.0;
    int frames = 10;
    double max_rel_error = 1e-2;
    double max_vertex_residual = 1e-2;
};

struct GraphFile {
    StarGraph graph;
    CouplingConfig coupling;
    double tolerance = 1e-10;
    SimulationConfig simulate;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    ValidationError(std::vector<Violation> v);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

// Parses the JSON graph format. Throws ParseError on malformed text or
// missing fields and ValidationError when an invariant is broken.
GraphFile load_graph_file(const std::string& text);
StarGraph load_graph(const std::string& text);

std::string serialize_graph(const StarGraph& g);
std::string serialize_graph_file(const GraphFile& f);

std::string read_text_file(const std::string& path);

}  // namespace kdvstar
