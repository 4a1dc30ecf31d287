#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdvstar/coupling.hpp"
#include "kdvstar/graph.hpp"
#include "kdvstar/krein.hpp"
#include "kdvstar/soliton.hpp"

namespace kdvstar {

class SetupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// RK4 with the central third-difference stencil is stable for
// dt <= ~1.088 h^3 / alpha; c_stab may not exceed this.
inline constexpr double kMaxStabilityConstant = 1.08;

struct Discretization {
    double length = 40.0;  // per edge
    double h = 0.05;
    double dt = 0.0;
    double c_stab = 1.0;

    int nodes() const;  // nodes 0..N-1 per edge, node N at x = length clamped to 0
};

Discretization make_discretization(const StarGraph& g, double length, double h,
                                   double c_stab = 1.0);

// Throws SetupError if length/h is not integral or dt breaks the bound.
void check_discretization(const StarGraph& g, const Discretization& d);

struct VertexCoupling {
    Matrix Y;  // spanning columns in R^{E-} + R^{E+}
    Matrix U;  // |E-| x |E+|
};

VertexCoupling vertex_coupling(const StarGraph& g, const CouplingConfig& cfg);

// Node j of edge k sits at x = s_k j h with s = -1 on E- and +1 on E+; the
// vertex node is duplicated on every edge.
struct GraphField {
    double t = 0.0;
    std::vector<std::vector<double>> u;
};

GraphField zero_field(const StarGraph& g, const Discretization& d);
GraphField sample_travelling_waves(const std::vector<SolitonProfile>& profiles,
                                   const StarGraph& g, const Discretization& d, double t);

struct SolverOptions {
    bool stability_probe = true;
    int probe_nodes = 64;
    double max_growth_rate = 0.5;
    int vertex_iterations = 8;  // Newton steps on the ghost system
};

struct FrameDiagnostics {
    double t = 0.0;
    double rel_l2_error = 0.0;              // NaN without reference profiles
    std::vector<double> edge_rel_l2_error;
    VertexResiduals vertex;                 // one-sided, from interior nodes
    double candidate_defect = 0.0;          // max_e |u_e(t,0) - phi_e(-c_e t)|
    double max_abs = 0.0;
};

struct EvolveResult {
    std::vector<FrameDiagnostics> frames;
    GraphField final_field;
    GraphField last_stable;
    bool blow_up = false;
    std::string message;
    long steps = 0;
};

// Method-of-lines solver: central second-order stencils in space, classical
// RK4 in time. Two ghost nodes per edge at the vertex are fixed each stage
// by the coupling conditions (trace in Y imposed through its time
// derivative, flux in Y-perp, the U relation on first derivatives and on
// the x-derivative of the right-hand side, 4th-difference extrapolation on
// the part of E+ that U does not see).
class StarGraphSolver {
public:
    StarGraphSolver(StarGraph g, VertexCoupling coupling, Discretization disc,
                    SolverOptions opt = {});

    const StarGraph& graph() const { return g_; }
    const Discretization& discretization() const { return disc_; }
    double probe_growth_rate() const { return probe_growth_; }

    // Ghost values (s = -1, s = -2) per edge for the given field.
    std::vector<double> enforce_vertex(const GraphField& f) const;

    GraphField semidiscrete_rhs(const GraphField& f) const;

    void step(GraphField& f, double dt) const;

    // frames output frames spread evenly over [t0, t0 + T]; profiles may be
    // empty, in which case error columns are NaN.
    EvolveResult evolve(const GraphField& initial, double T, int frames,
                        const std::vector<SolitonProfile>& profiles = {}) const;

    FrameDiagnostics diagnose(const GraphField& f,
                              const std::vector<SolitonProfile>& profiles) const;

private:
    // One contribution to a ghost-system row: a stencil over s = -2..2 on
    // one edge, entering linearly, scaled by the vertex value, or squared.
    enum class TermKind { Linear, TimesTrace, Squared };
    struct Term {
        std::size_t edge;
        double w[5];
        TermKind kind;
        double coef;
    };
    using Row = std::vector<Term>;
    using Field = std::vector<std::vector<double>>;

    void build_rows();
    void probe_stability();
    void solve_ghosts(const Field& u, std::vector<double>& ghosts, bool linear_only) const;
    void apply_rhs(const Field& u, Field& out, bool linear_only) const;
    void check_field(const GraphField& f) const;

    StarGraph g_;
    VertexCoupling cp_;
    Discretization disc_;
    SolverOptions opt_;
    std::vector<double> sigma_, alpha_, beta_, gamma_;
    std::vector<Row> rows_;
    Matrix Qy_;
    double probe_growth_ = 0.0;
};

struct ConvergenceResult {
    std::vector<double> h;
    std::vector<double> error;
    std::vector<double> candidate_defect;
    std::vector<double> order;  // log(e_i / e_{i+1}) / log(h_i / h_{i+1})
    bool monotone = false;
    double target_order = 2.0;
};

ConvergenceResult convergence_study(const StarGraph& g, const VertexCoupling& cp,
                                    const std::vector<double>& hs, double length, double T,
                                    double c_stab = 1.0);

}  // namespace kdvstar
