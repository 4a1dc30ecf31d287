#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kdvstar/graph.hpp"
#include "kdvstar/krein.hpp"
#include "kdvstar/soliton.hpp"

namespace kdvstar {

struct ConditionEntry {
    std::string id;
    std::string description;
    double residual = 0.0;
    bool pass = false;
    std::vector<EdgeRef> edges;  // where the failure sits, if localized
    bool advisory = false;       // reported, excluded from the verdict
};

struct ConditionReport {
    std::string title;
    std::vector<ConditionEntry> preconditions;
    std::vector<ConditionEntry> conditions;
    bool pass = false;
    double tolerance = 0.0;
    std::vector<SolitonProfile> profiles;  // graph order, filled on pass

    const ConditionEntry* find(const std::string& id) const;
    std::vector<std::string> failed_ids() const;
};

std::string report_to_json(const ConditionReport& r);
std::string report_to_table(const ConditionReport& r);

// (max - min) / max(1, mean |v|)
double spread_residual(const std::vector<double>& v);

// The coupling matrix of a graph file; empty U means the identity.
Matrix coupling_matrix(const StarGraph& g, const CouplingConfig& cfg);
// Spanning column of Y: all ones, or (1, a, a) for the y-junction.
Matrix coupling_subspace(const StarGraph& g, const CouplingConfig& cfg);

ConditionReport check_main_theorem(const StarGraph& g, const Matrix& U, double tol);

enum class ScalingVerdict { Inapplicable, Consistent, CounterexampleFound };
const char* to_string(ScalingVerdict v);

struct ScalingResult {
    ScalingVerdict verdict = ScalingVerdict::Inapplicable;
    bool wave_possible = false;  // C1-C6 hold
    ConditionReport report;
};

ScalingResult check_scaling_corollary(const StarGraph& g, double tol);

enum class BalancedVerdict { Inapplicable, Pass, Fail };
const char* to_string(BalancedVerdict v);

struct BalancedResult {
    BalancedVerdict verdict = BalancedVerdict::Inapplicable;
    std::string reason;
};

BalancedResult check_balanced_corollary(const StarGraph& g, const Matrix& U, double tol);

struct YJunctionSpec {
    double a = 1.0;
    EdgeParams minus;
    EdgeParams plus1;
    EdgeParams plus2;
    Matrix U = Matrix::Constant(1, 2, 0.5);
};

StarGraph yjunction_graph(const YJunctionSpec& s);
YJunctionSpec yjunction_from_graph(const StarGraph& g, double a, const Matrix& U);

// Throws DomainError for a == 0 or a malformed U.
ConditionReport check_yjunction(const YJunctionSpec& s, double tol);

struct VertexResiduals {
    double trace_to_Y = 0.0;        // |(I - P_Y) u(0)|
    double flux_to_Yperp = 0.0;     // |P_Y w|, w_e = s_e (alpha u'' - beta u / 2)
    double derivative_U = 0.0;      // |u'(0-) - U u'(0+)|
    double max() const;
};

// Evaluates the vertex conditions on the closed-form travelling waves at
// the given times. profiles follow graph order; Y holds spanning columns.
VertexResiduals verify_vertex_numerically(const StarGraph& g, const Matrix& U,
                                          const Matrix& Y,
                                          const std::vector<SolitonProfile>& profiles,
                                          const std::vector<double>& times);

struct PartialEdge {
    EdgeParams params;
    bool gamma_unknown = false;
    bool y0_unknown = false;
};

struct PartialGraph {
    std::vector<PartialEdge> minus;
    std::vector<PartialEdge> plus;
    CouplingKind kind = CouplingKind::Continuity;
    std::optional<double> a;  // y-junction: empty means solve for it
};

struct Completion {
    bool feasible = false;
    StarGraph graph;
    std::optional<double> a;
    std::vector<std::string> blocking;  // condition ids that cannot hold
    ConditionReport report;             // U-independent conditions only
};

Completion solve_compatible_params(const PartialGraph& pg, double tol);

}  // namespace kdvstar
