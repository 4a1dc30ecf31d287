#include "kdvstar/pde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "kdvstar/format.hpp"

namespace kdvstar {

int Discretization::nodes() const { return static_cast<int>(std::lround(length / h)); }

namespace {

double max_alpha(const StarGraph& g) {
    double a = 0.0;
    for (auto& e : g.all_edges()) a = std::max(a, e.alpha);
    return a;
}

}  // namespace

Discretization make_discretization(const StarGraph& g, double length, double h, double c_stab) {
    Discretization d;
    d.length = length;
    d.h = h;
    d.c_stab = c_stab;
    d.dt = c_stab * h * h * h / max_alpha(g);
    return d;
}

void check_discretization(const StarGraph& g, const Discretization& d) {
    if (!(d.h > 0.0) || !(d.length > 0.0) || !(d.dt > 0.0))
        throw SetupError("h, length and dt must be positive");
    double n = d.length / d.h;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
        throw SetupError("length / h = " + fmt17(n) + " is not an integer");
    if (d.nodes() < 8) throw SetupError("need at least 8 nodes per edge");
    if (d.c_stab > kMaxStabilityConstant)
        throw SetupError("c_stab = " + fmt17(d.c_stab) + " exceeds " + fmt17(kMaxStabilityConstant));
    double bound = kMaxStabilityConstant * d.h * d.h * d.h / max_alpha(g);
    if (d.dt > bound * (1.0 + 1e-12))
        throw SetupError("dt = " + fmt17(d.dt) + " breaks the stability bound " + fmt17(bound));
}

VertexCoupling vertex_coupling(const StarGraph& g, const CouplingConfig& cfg) {
    return {coupling_subspace(g, cfg), coupling_matrix(g, cfg)};
}

GraphField zero_field(const StarGraph& g, const Discretization& d) {
    GraphField f;
    f.u.assign(g.size(), std::vector<double>(static_cast<std::size_t>(d.nodes()), 0.0));
    return f;
}

GraphField sample_travelling_waves(const std::vector<SolitonProfile>& profiles, const StarGraph& g,
                                   const Discretization& d, double t) {
    if (profiles.size() != g.size()) throw std::invalid_argument("one profile per edge expected");
    GraphField f = zero_field(g, d);
    f.t = t;
    for (std::size_t k = 0; k < g.size(); ++k) {
        double sg = g.orientation(k) == Orientation::Incoming ? -1.0 : 1.0;
        const auto& p = profiles[k];
        for (std::size_t j = 0; j < f.u[k].size(); ++j)
            f.u[k][j] = eval(p, sg * static_cast<double>(j) * d.h - p.params.c * t, 0);
    }
    return f;
}

namespace {

// stencils over s = -2..2 in edge coordinates
std::array<double, 5> d1(double h) { return {0, -0.5 / h, 0, 0.5 / h, 0}; }
std::array<double, 5> d2(double h) { return {0, 1 / (h * h), -2 / (h * h), 1 / (h * h), 0}; }
std::array<double, 5> d3(double h) {
    double c = 1 / (2 * h * h * h);
    return {-c, 2 * c, 0, -2 * c, c};
}
std::array<double, 5> d4(double h) {
    double c = 1 / (h * h * h * h);
    return {c, -4 * c, 6 * c, -4 * c, c};
}
constexpr std::array<double, 5> delta4 = {1, -4, 6, -4, 1};

std::array<double, 5> combine(double a, const std::array<double, 5>& x, double b, const std::array<double, 5>& y) {
    std::array<double, 5> r{};
    for (int i = 0; i < 5; ++i) r[static_cast<std::size_t>(i)] = a * x[static_cast<std::size_t>(i)] + b * y[static_cast<std::size_t>(i)];
    return r;
}

}  // namespace

StarGraphSolver::StarGraphSolver(StarGraph g, VertexCoupling coupling, Discretization disc, SolverOptions opt)
    : g_(std::move(g)), cp_(std::move(coupling)), disc_(disc), opt_(opt) {
    auto v = validate_graph(g_);
    if (!v.empty()) throw ValidationError(std::move(v));
    check_discretization(g_, disc_);
    auto E = static_cast<Eigen::Index>(g_.size());
    auto nm = static_cast<Eigen::Index>(g_.edges_minus.size());
    auto np = E - nm;
    if (cp_.Y.rows() != E || cp_.Y.cols() < 1) throw SetupError("Y must have one row per edge");
    if (cp_.U.rows() != nm || cp_.U.cols() != np) throw SetupError("U must be |E-| x |E+|");
    if (nm > np) throw SetupError("vertex closure needs |E-| <= |E+|");
    for (std::size_t k = 0; k < g_.size(); ++k) {
        const auto& p = g_.edge(k);
        sigma_.push_back(g_.orientation(k) == Orientation::Incoming ? -1.0 : 1.0);
        alpha_.push_back(p.alpha);
        beta_.push_back(p.beta);
        gamma_.push_back(p.gamma);
    }
    try {
        Qy_ = orthonormal_basis(cp_.Y);
    } catch (const DimensionError& e) {
        throw SetupError(e.what());
    }
    build_rows();
    if (opt_.stability_probe) probe_stability();
}

void StarGraphSolver::build_rows() {
    const double h = disc_.h;
    const std::size_t E = g_.size(), nm = g_.edges_minus.size(), np = E - nm;
    rows_.clear();
    auto term = [](std::size_t k, const std::array<double, 5>& w, double c, TermKind kind) {
        Term t{k, {}, kind, c};
        for (int i = 0; i < 5; ++i) t.w[i] = w[static_cast<std::size_t>(i)];
        return t;
    };

    // time derivative of the trace lies in Y
    Matrix P = orthogonal_complement(cp_.Y);
    for (Eigen::Index r = 0; r < P.cols(); ++r) {
        Row row;
        for (std::size_t k = 0; k < E; ++k) {
            double b = P(static_cast<Eigen::Index>(k), r) * sigma_[k];
            row.push_back(term(k, combine(-alpha_[k], d3(h), beta_[k], d1(h)), b, TermKind::Linear));
            row.push_back(term(k, d1(h), b * gamma_[k], TermKind::TimesTrace));
        }
        rows_.push_back(row);
    }
    // flux vector in Y-perp
    for (Eigen::Index r = 0; r < Qy_.cols(); ++r) {
        Row row;
        for (std::size_t k = 0; k < E; ++k) {
            auto w = combine(alpha_[k], d2(h), 0.0, d1(h));
            w[2] -= 0.5 * beta_[k];
            row.push_back(term(k, w, Qy_(static_cast<Eigen::Index>(k), r) * sigma_[k], TermKind::Linear));
        }
        rows_.push_back(row);
    }
    // U on first derivatives and on the x-derivative of the right-hand side
    for (std::size_t i = 0; i < nm; ++i) {
        Row du, dr;
        for (std::size_t k = 0; k < E; ++k) {
            double c = k == i ? 1.0 : 0.0;
            if (k >= nm) c = -cp_.U(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k - nm));
            if (c == 0.0) continue;
            du.push_back(term(k, d1(h), c * sigma_[k], TermKind::Linear));
            dr.push_back(term(k, combine(-alpha_[k], d4(h), beta_[k], d2(h)), c, TermKind::Linear));
            dr.push_back(term(k, d2(h), c * gamma_[k], TermKind::TimesTrace));
            dr.push_back(term(k, d1(h), c * gamma_[k], TermKind::Squared));
        }
        rows_.push_back(du);
        rows_.push_back(dr);
    }
    // smoothness on the part of E+ that U does not see
    Eigen::JacobiSVD<Matrix> svd(cp_.U, Eigen::ComputeFullV);
    Eigen::Index rank = 0;
    double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-12 * std::max(1.0, smax)) ++rank;
    if (rank != static_cast<Eigen::Index>(nm))
        throw SetupError("U has rank " + std::to_string(rank) + ", vertex closure needs rank " + std::to_string(nm));
    Matrix V = nm > 0 ? Matrix(svd.matrixV()) : Matrix(Matrix::Identity(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np)));
    for (Eigen::Index c = rank; c < static_cast<Eigen::Index>(np); ++c) {
        Row row;
        for (std::size_t j = 0; j < np; ++j)
            row.push_back(term(nm + j, delta4, V(static_cast<Eigen::Index>(j), c), TermKind::Linear));
        rows_.push_back(row);
    }
    if (rows_.size() != 2 * E)
        throw SetupError("vertex closure has " + std::to_string(rows_.size()) + " rows for " +
                         std::to_string(2 * E) + " ghosts");

    // equilibrate rows by their largest linear weight
    for (auto& row : rows_) {
        double m = 0.0;
        for (auto& t : row)
            if (t.kind == TermKind::Linear)
                for (double w : t.w) m = std::max(m, std::abs(t.coef * w));
        if (m > 0.0)
            for (auto& t : row) t.coef /= m;
    }

    // the closure must be solvable at rest
    Matrix J = Matrix::Zero(static_cast<Eigen::Index>(2 * E), static_cast<Eigen::Index>(2 * E));
    for (std::size_t r = 0; r < rows_.size(); ++r)
        for (auto& t : rows_[r])
            if (t.kind == TermKind::Linear) {
                J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(2 * t.edge)) += t.coef * t.w[1];
                J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(2 * t.edge + 1)) += t.coef * t.w[0];
            }
    Eigen::FullPivLU<Matrix> lu(J);
    if (lu.rank() != J.rows())
        throw SetupError("singular coupling system: rank " + std::to_string(lu.rank()) + " of " +
                         std::to_string(J.rows()));
}

void StarGraphSolver::check_field(const GraphField& f) const {
    if (f.u.size() != g_.size()) throw std::invalid_argument("field has the wrong number of edges");
    for (auto& e : f.u)
        if (e.size() != static_cast<std::size_t>(disc_.nodes()))
            throw std::invalid_argument("field has the wrong number of nodes");
}

void StarGraphSolver::solve_ghosts(const Field& u, std::vector<double>& g, bool linear_only) const {
    const std::size_t E = g_.size(), n = 2 * E;
    g.assign(n, 0.0);
    Matrix J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Vector F(static_cast<Eigen::Index>(n));
    int iters = linear_only ? 1 : std::max(1, opt_.vertex_iterations);
    for (int it = 0; it < iters; ++it) {
        J.setZero();
        F.setZero();
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            auto ri = static_cast<Eigen::Index>(r);
            for (auto& t : rows_[r]) {
                if (linear_only && t.kind != TermKind::Linear) continue;
                const auto& e = u[t.edge];
                double gs1 = g[2 * t.edge], gs2 = g[2 * t.edge + 1];
                double L = t.w[0] * gs2 + t.w[1] * gs1 + t.w[2] * e[0] + t.w[3] * e[1] + t.w[4] * e[2];
                // value coef * m * L with slope coef * m' * w
                double m = 1.0, slope = 1.0;
                if (t.kind == TermKind::TimesTrace) {
                    m = slope = e[0];
                } else if (t.kind == TermKind::Squared) {
                    m = L;
                    slope = 2.0 * L;
                }
                F(ri) += t.coef * m * L;
                double scale = t.coef * slope;
                J(ri, static_cast<Eigen::Index>(2 * t.edge)) += scale * t.w[1];
                J(ri, static_cast<Eigen::Index>(2 * t.edge + 1)) += scale * t.w[0];
            }
        }
        Vector dg = J.partialPivLu().solve(-F);
        double gmax = 0.0, dmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] += dg(static_cast<Eigen::Index>(i));
            gmax = std::max(gmax, std::abs(g[i]));
            dmax = std::max(dmax, std::abs(dg(static_cast<Eigen::Index>(i))));
        }
        if (dmax <= 1e-15 * std::max(1.0, gmax)) break;
    }
}

void StarGraphSolver::apply_rhs(const Field& u, Field& out, bool linear_only) const {
    std::vector<double> g;
    solve_ghosts(u, g, linear_only);
    const double h = disc_.h;
    const double c3 = 1.0 / (2.0 * h * h * h), c1 = 1.0 / (2.0 * h);
    std::vector<double> ext;
    out.resize(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        const auto& e = u[k];
        const std::size_t N = e.size();
        ext.assign(N + 4, 0.0);
        ext[0] = g[2 * k + 1];
        ext[1] = g[2 * k];
        std::copy(e.begin(), e.end(), ext.begin() + 2);
        out[k].resize(N);
        const double s = sigma_[k], a = alpha_[k], b = beta_[k], gm = linear_only ? 0.0 : gamma_[k];
        const double* x = ext.data() + 2;
        double* o = out[k].data();
        for (std::size_t j = 0; j < N; ++j) {
            const double* p = x + j;
            double D3 = (p[2] - 2.0 * p[1] + 2.0 * p[-1] - p[-2]) * c3;
            double D1 = (p[1] - p[-1]) * c1;
            double nl = j == 0 ? p[0] * D1 : (p[0] * D1 + (p[1] * p[1] - p[-1] * p[-1]) * c1) / 3.0;
            o[j] = s * (-a * D3 + b * D1 + gm * nl);
        }
    }
}

void StarGraphSolver::probe_stability() {
    const std::size_t E = g_.size();
    const auto n = static_cast<std::size_t>(std::max(opt_.probe_nodes, 8));
    const auto dim = static_cast<Eigen::Index>(E * n);
    Matrix A(dim, dim);
    Field u(E, std::vector<double>(n, 0.0)), out;
    for (std::size_t k = 0; k < E; ++k)
        for (std::size_t j = 0; j < n; ++j) {
            u[k][j] = 1.0;
            apply_rhs(u, out, true);
            u[k][j] = 0.0;
            auto col = static_cast<Eigen::Index>(k * n + j);
            for (std::size_t kk = 0; kk < E; ++kk)
                for (std::size_t jj = 0; jj < n; ++jj) A(static_cast<Eigen::Index>(kk * n + jj), col) = out[kk][jj];
        }
    Eigen::EigenSolver<Matrix> es(A, false);
    probe_growth_ = es.eigenvalues().real().maxCoeff();
    if (probe_growth_ > opt_.max_growth_rate)
        throw SetupError("vertex closure admits a spurious mode with growth rate " + fmt17(probe_growth_) +
                         " > " + fmt17(opt_.max_growth_rate));
}

std::vector<double> StarGraphSolver::enforce_vertex(const GraphField& f) const {
    check_field(f);
    std::vector<double> g;
    solve_ghosts(f.u, g, false);
    return g;
}

GraphField StarGraphSolver::semidiscrete_rhs(const GraphField& f) const {
    check_field(f);
    GraphField d;
    d.t = f.t;
    apply_rhs(f.u, d.u, false);
    return d;
}

void StarGraphSolver::step(GraphField& f, double dt) const {
    check_field(f);
    Field k1, k2, k3, k4, tmp(f.u);
    auto axpy = [&](const Field& k, double c) {
        for (std::size_t e = 0; e < f.u.size(); ++e)
            for (std::size_t j = 0; j < f.u[e].size(); ++j) tmp[e][j] = f.u[e][j] + c * k[e][j];
    };
    apply_rhs(f.u, k1, false);
    axpy(k1, 0.5 * dt);
    apply_rhs(tmp, k2, false);
    axpy(k2, 0.5 * dt);
    apply_rhs(tmp, k3, false);
    axpy(k3, dt);
    apply_rhs(tmp, k4, false);
    for (std::size_t e = 0; e < f.u.size(); ++e)
        for (std::size_t j = 0; j < f.u[e].size(); ++j)
            f.u[e][j] += dt / 6.0 * (k1[e][j] + 2.0 * k2[e][j] + 2.0 * k3[e][j] + k4[e][j]);
    f.t += dt;
}

namespace {

double max_abs(const GraphField& f) {
    double m = 0.0;
    for (auto& e : f.u)
        for (double v : e) m = std::max(m, std::isfinite(v) ? std::abs(v) : std::numeric_limits<double>::infinity());
    return m;
}

}  // namespace

FrameDiagnostics StarGraphSolver::diagnose(const GraphField& f, const std::vector<SolitonProfile>& profiles) const {
    check_field(f);
    const std::size_t E = g_.size();
    const double h = disc_.h, nan = std::numeric_limits<double>::quiet_NaN();
    FrameDiagnostics d;
    d.t = f.t;
    d.max_abs = max_abs(f);

    Vector u0(static_cast<Eigen::Index>(E)), w(static_cast<Eigen::Index>(E)), du(static_cast<Eigen::Index>(E));
    for (std::size_t k = 0; k < E; ++k) {
        const auto& e = f.u[k];
        auto ki = static_cast<Eigen::Index>(k);
        double uxx = (2.0 * e[0] - 5.0 * e[1] + 4.0 * e[2] - e[3]) / (h * h);
        u0(ki) = e[0];
        w(ki) = sigma_[k] * (alpha_[k] * uxx - 0.5 * beta_[k] * e[0]);
        du(ki) = sigma_[k] * (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * h);
    }
    auto nm = static_cast<Eigen::Index>(g_.edges_minus.size());
    d.vertex.trace_to_Y = (u0 - Qy_ * (Qy_.transpose() * u0)).norm();
    d.vertex.flux_to_Yperp = (Qy_.transpose() * w).norm();
    if (nm > 0) d.vertex.derivative_U = (du.head(nm) - cp_.U * du.tail(static_cast<Eigen::Index>(E) - nm)).norm();

    if (profiles.size() != E) {
        d.rel_l2_error = nan;
        d.candidate_defect = nan;
        d.edge_rel_l2_error.assign(E, nan);
        return d;
    }
    double err = 0.0, nrm = 0.0;
    for (std::size_t k = 0; k < E; ++k) {
        const auto& p = profiles[k];
        double ek = 0.0, nk = 0.0;
        for (std::size_t j = 0; j < f.u[k].size(); ++j) {
            double ex = eval(p, sigma_[k] * static_cast<double>(j) * h - p.params.c * f.t, 0);
            ek += (f.u[k][j] - ex) * (f.u[k][j] - ex);
            nk += ex * ex;
        }
        err += ek;
        nrm += nk;
        d.edge_rel_l2_error.push_back(nk > 0.0 ? std::sqrt(ek / nk) : std::sqrt(ek * h));
        d.candidate_defect = std::max(d.candidate_defect, std::abs(f.u[k][0] - eval(p, -p.params.c * f.t, 0)));
    }
    d.rel_l2_error = nrm > 0.0 ? std::sqrt(err / nrm) : std::sqrt(err * h);
    return d;
}

EvolveResult StarGraphSolver::evolve(const GraphField& initial, double T, int frames,
                                     const std::vector<SolitonProfile>& profiles) const {
    check_field(initial);
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
    frames = std::max(frames, 1);
    EvolveResult res;
    GraphField f = initial;
    // start from a trace in Y
    const std::size_t E = g_.size();
    Vector u0(static_cast<Eigen::Index>(E));
    for (std::size_t k = 0; k < E; ++k) u0(static_cast<Eigen::Index>(k)) = f.u[k][0];
    Vector pu = Qy_ * (Qy_.transpose() * u0);
    for (std::size_t k = 0; k < E; ++k) f.u[k][0] = pu(static_cast<Eigen::Index>(k));

    const long nsteps = std::max(1L, static_cast<long>(std::ceil(T / disc_.dt - 1e-9)));
    const double dt = T / static_cast<double>(nsteps), t0 = f.t;
    const double guard = 1e3 * max_abs(f);
    res.frames.push_back(diagnose(f, profiles));

    Field k1, k2, k3, k4, tmp(f.u);
    int next = 1;
    for (long n = 1; n <= nsteps; ++n) {
        res.last_stable = f;
        auto axpy = [&](const Field& k, double c) {
            for (std::size_t e = 0; e < E; ++e)
                for (std::size_t j = 0; j < f.u[e].size(); ++j) tmp[e][j] = f.u[e][j] + c * k[e][j];
        };
        apply_rhs(f.u, k1, false);
        axpy(k1, 0.5 * dt);
        apply_rhs(tmp, k2, false);
        axpy(k2, 0.5 * dt);
        apply_rhs(tmp, k3, false);
        axpy(k3, dt);
        apply_rhs(tmp, k4, false);
        for (std::size_t e = 0; e < E; ++e)
            for (std::size_t j = 0; j < f.u[e].size(); ++j)
                f.u[e][j] += dt / 6.0 * (k1[e][j] + 2.0 * k2[e][j] + 2.0 * k3[e][j] + k4[e][j]);
        f.t = t0 + static_cast<double>(n) * dt;
        res.steps = n;

        double m = max_abs(f);
        if (!std::isfinite(m) || (guard > 0.0 && m > guard) || (guard == 0.0 && m > 0.0)) {
            res.blow_up = true;
            res.message = "blow-up at t = " + fmt17(f.t) + ": max |u| = " + fmt17(m) + " exceeds 1e3 x the initial maximum";
            res.final_field = res.last_stable;
            return res;
        }
        while (next <= frames && n == std::lround(static_cast<double>(next) * static_cast<double>(nsteps) / frames)) {
            res.frames.push_back(diagnose(f, profiles));
            ++next;
        }
    }
    res.final_field = f;
    res.last_stable = f;
    return res;
}

ConvergenceResult convergence_study(const StarGraph& g, const VertexCoupling& cp, const std::vector<double>& hs,
                                    double length, double T, double c_stab) {
    if (hs.size() < 3) throw std::invalid_argument("need at least three grids");
    std::vector<SolitonProfile> profiles;
    for (auto& e : g.all_edges()) profiles.push_back(build_profile(e));
    ConvergenceResult out;
    for (double h : hs) {
        StarGraphSolver s(g, cp, make_discretization(g, length, h, c_stab));
        auto r = s.evolve(sample_travelling_waves(profiles, g, s.discretization(), 0.0), T, 1, profiles);
        const auto& last = r.frames.back();
        out.h.push_back(h);
        out.error.push_back(r.blow_up ? std::numeric_limits<double>::infinity() : last.rel_l2_error);
        out.candidate_defect.push_back(r.blow_up ? std::numeric_limits<double>::infinity() : last.candidate_defect);
    }
    out.monotone = true;
    for (std::size_t i = 0; i + 1 < out.h.size(); ++i) {
        out.order.push_back(std::log(out.error[i] / out.error[i + 1]) / std::log(out.h[i] / out.h[i + 1]));
        out.monotone = out.monotone && out.error[i + 1] < out.error[i];
    }
    return out;
}

}  // namespace kdvstar
