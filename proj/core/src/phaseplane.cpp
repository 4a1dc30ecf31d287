#include "kdvstar/phaseplane.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include <boost/numeric/odeint.hpp>

#include "kdvstar/format.hpp"

namespace kdvstar {

namespace odeint = boost::numeric::odeint;

PhaseParams phase_params(const EdgeParams& p, double A) { return {p.alpha, p.beta, p.gamma, p.c, A}; }

OrbitState rhs(const PhaseParams& p, const OrbitState& s) {
    double b = p.beta + p.c;
    return {s.psi, (-p.A + b * s.phi + 0.5 * p.gamma * s.phi * s.phi) / p.alpha};
}

double hamiltonian(const PhaseParams& p, const OrbitState& s) {
    double b = p.beta + p.c, f = s.phi;
    return 0.5 * s.psi * s.psi - (-p.A * f + 0.5 * b * f * f + p.gamma / 6.0 * f * f * f) / p.alpha;
}

const char* to_string(StationaryKind k) {
    switch (k) {
        case StationaryKind::NoStationaryPoint: return "NoStationaryPoint";
        case StationaryKind::OneDegenerate: return "OneDegenerate";
        case StationaryKind::CenterAndSaddle: return "CenterAndSaddle";
    }
    return "?";
}

StationaryClassification classify(const PhaseParams& p, double degenerate_tol) {
    StationaryClassification c;
    double b = p.beta + p.c;
    c.discriminant = b * b + 2.0 * p.A * p.gamma;
    double scale = b * b + std::abs(2.0 * p.A * p.gamma);
    if (std::abs(c.discriminant) <= degenerate_tol * scale) {
        c.verdict = StationaryKind::OneDegenerate;
        c.point = {-b / p.gamma, 0.0};
    } else if (c.discriminant < 0.0) {
        c.verdict = StationaryKind::NoStationaryPoint;
    } else {
        double r = std::sqrt(c.discriminant);
        c.verdict = StationaryKind::CenterAndSaddle;
        c.p_minus = {(-b - r) / p.gamma, 0.0};
        c.p_plus = {(-b + r) / p.gamma, 0.0};
        c.lambda2_minus = -r / p.alpha;
        c.lambda2_plus = r / p.alpha;
    }
    return c;
}

OrbitState Trajectory::at(double tq) const {
    if (t.empty()) throw std::logic_error("empty trajectory");
    if (tq <= t.front()) return x.front();
    if (tq >= t.back()) return x.back();
    auto it = std::upper_bound(t.begin(), t.end(), tq);
    std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
    double h = t[i + 1] - t[i], s = (tq - t[i]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return {h00 * x[i].phi + h10 * h * dx[i].phi + h01 * x[i + 1].phi + h11 * h * dx[i + 1].phi,
            h00 * x[i].psi + h10 * h * dx[i].psi + h01 * x[i + 1].psi + h11 * h * dx[i + 1].psi};
}

namespace {

using State = std::array<double, 2>;
using StopFn = std::function<bool(double, const OrbitState&)>;

Trajectory integrate_impl(const PhaseParams& p, const OrbitState& s0, double t0, double t1,
                          const StepControl& ctl, const StopFn& stop) {
    if (!(t1 > t0)) throw std::invalid_argument("integration span must be increasing");
    if (!(ctl.rel_tol > 0.0) || !(ctl.abs_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");

    auto sys = [&p](const State& x, State& dxdt, double) {
        auto d = rhs(p, {x[0], x[1]});
        dxdt = {d.phi, d.psi};
    };
    auto stepper = odeint::make_controlled(ctl.abs_tol, ctl.rel_tol, odeint::runge_kutta_dopri5<State>());

    Trajectory tr;
    auto record = [&](double t, const State& x) {
        OrbitState s{x[0], x[1]};
        tr.t.push_back(t);
        tr.x.push_back(s);
        tr.dx.push_back(rhs(p, s));
        tr.H.push_back(hamiltonian(p, s));
        tr.max_H_drift = std::max(tr.max_H_drift, std::abs(tr.H.back() - tr.H.front()));
    };

    State x{s0.phi, s0.psi};
    double t = t0, dt = std::min(ctl.initial_step, t1 - t0);
    record(t, x);
    std::size_t steps = 0;
    while (t < t1) {
        if (++steps > ctl.max_steps) throw std::runtime_error("orbit integration exceeded the step budget");
        bool last = t + dt >= t1;
        double trial = last ? t1 - t : dt;
        if (stepper.try_step(sys, x, t, trial) == odeint::fail) {
            if (trial < ctl.min_step * std::max(1.0, std::abs(t)))
                throw BlowUpError("step size underflow at t = " + fmt17(t), t);
            dt = trial;
            continue;
        }
        // a truncated final step should not shrink the running step size
        dt = last ? std::max(dt, trial) : trial;
        if (last) t = t1;
        if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || std::hypot(x[0], x[1]) > ctl.blow_up)
            throw BlowUpError("trajectory escaped to infinity near t = " + fmt17(t), t);
        record(t, x);
        if (stop && stop(t, tr.x.back())) break;
    }
    return tr;
}

}  // namespace

Trajectory integrate_orbit(const PhaseParams& p, const OrbitState& s0, double t0, double t1,
                           const StepControl& ctl) {
    return integrate_impl(p, s0, t0, t1, ctl, nullptr);
}

HomoclinicResult homoclinic_shoot(const PhaseParams& p, const HomoclinicOptions& opt, int direction) {
    double b = p.beta + p.c;
    if (p.A != 0.0 || !(b > 0.0))
        throw DomainError("homoclinic orbit needs A = 0 and beta + c > 0");
    if (!(opt.offset > 0.0)) throw std::invalid_argument("offset must be positive");

    double lam = std::sqrt(b / p.alpha), norm = std::hypot(1.0, lam);
    double sgn = (p.gamma > 0 ? -1.0 : 1.0) * (direction >= 0 ? 1.0 : -1.0);
    OrbitState s0{sgn * opt.offset / norm, sgn * opt.offset * lam / norm};

    double far = 0.1 * 2.0 * b / std::abs(p.gamma), near = 10.0 * opt.offset;
    double tmax = opt.max_time.value_or((2.0 * std::log(far / opt.offset) + 60.0) / lam);
    // back once the orbit is near the saddle again or past its closest approach
    bool left = false, back = false;
    double rprev = 0.0;
    auto stop = [&](double, const OrbitState& s) {
        double r = std::hypot(s.phi, s.psi);
        if (r > far) left = true;
        if (left && (r < near || (r < far && r > rprev))) back = true;
        rprev = r;
        return back;
    };

    HomoclinicResult res;
    res.orbit = integrate_impl(p, s0, 0.0, tmax, opt.control, stop);
    res.returned = back;

    const auto& tr = res.orbit;
    std::size_t imax = 0;
    for (std::size_t i = 1; i < tr.x.size(); ++i)
        if (std::abs(tr.x[i].phi) > std::abs(tr.x[imax].phi)) imax = i;
    // psi changes sign at the extremum; bisect on the dense output
    double lo = tr.t[imax > 0 ? imax - 1 : 0], hi = tr.t[std::min(imax + 1, tr.t.size() - 1)];
    double slo = tr.at(lo).psi;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi), sm = tr.at(mid).psi;
        if ((sm < 0) == (slo < 0)) {
            lo = mid;
            slo = sm;
        } else {
            hi = mid;
        }
    }
    res.extremum_time = 0.5 * (lo + hi);
    res.extremum_value = tr.at(res.extremum_time).phi;
    return res;
}

double homoclinic_gap(const HomoclinicResult& r, const SolitonProfile& prof) {
    double shift = prof.y0 - r.extremum_time, gap = 0.0;
    for (std::size_t i = 0; i < r.orbit.t.size(); ++i)
        gap = std::max(gap, std::abs(r.orbit.x[i].phi - eval(prof, r.orbit.t[i] + shift, 0)));
    return gap;
}

std::vector<FieldSample> sample_vector_field(const PhaseParams& p, double phi_min, double phi_max,
                                             double psi_min, double psi_max, int n_phi, int n_psi) {
    if (n_phi < 2 || n_psi < 2) throw std::invalid_argument("need at least 2 samples per axis");
    std::vector<FieldSample> out;
    out.reserve(static_cast<std::size_t>(n_phi * n_psi));
    for (int j = 0; j < n_psi; ++j)
        for (int i = 0; i < n_phi; ++i) {
            double f = phi_min + (phi_max - phi_min) * i / (n_phi - 1);
            double s = psi_min + (psi_max - psi_min) * j / (n_psi - 1);
            auto d = rhs(p, {f, s});
            out.push_back({f, s, d.phi, d.psi});
        }
    return out;
}

}  // namespace kdvstar
