#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdvstar/soliton.hpp"

namespace kdvstar {

// Parameters of -alpha phi'' + (beta+c) phi + (gamma/2) phi^2 = A.
struct PhaseParams {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 1.0;
    double c = 1.0;
    double A = 0.0;
};

PhaseParams phase_params(const EdgeParams& p, double A = 0.0);

struct OrbitState {
    double phi = 0.0;
    double psi = 0.0;
};

OrbitState rhs(const PhaseParams& p, const OrbitState& s);
double hamiltonian(const PhaseParams& p, const OrbitState& s);

enum class StationaryKind { NoStationaryPoint, OneDegenerate, CenterAndSaddle };

const char* to_string(StationaryKind k);

struct StationaryClassification {
    double discriminant = 0.0;
    StationaryKind verdict = StationaryKind::NoStationaryPoint;
    OrbitState point;    // OneDegenerate
    OrbitState p_minus;  // CenterAndSaddle: the center
    OrbitState p_plus;   // CenterAndSaddle: the saddle
    double lambda2_minus = 0.0;  // squared Jacobian eigenvalue at p_minus
    double lambda2_plus = 0.0;   // and at p_plus
};

// |disc| <= degenerate_tol * ((beta+c)^2 + |2 A gamma|) counts as zero.
StationaryClassification classify(const PhaseParams& p, double degenerate_tol = 0.0);

class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

struct StepControl {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 1e-3;
    double min_step = 1e-13;     // relative to max(1, |t|)
    double blow_up = 1e12;       // state norm treated as escape to infinity
    std::size_t max_steps = 2000000;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<OrbitState> x;
    std::vector<OrbitState> dx;  // rhs at each sample, for Hermite interpolation
    std::vector<double> H;
    double max_H_drift = 0.0;

    // Cubic Hermite dense output; t_query is clamped to the sampled span.
    OrbitState at(double t_query) const;
};

// Adaptive Dormand-Prince 5(4). Throws BlowUpError when the step size
// underflows or the state escapes.
Trajectory integrate_orbit(const PhaseParams& p, const OrbitState& s0, double t0,
                           double t1, const StepControl& ctl = {});

struct HomoclinicOptions {
    double offset = 1e-6;
    std::optional<double> max_time;
    StepControl control;
};

struct HomoclinicResult {
    Trajectory orbit;
    bool returned = false;  // re-entered the small ball around the saddle
    double extremum_time = 0.0;
    double extremum_value = 0.0;
};

// Leaves the saddle at the origin along the unit unstable eigenvector,
// pointing into phi < 0 for gamma > 0 and phi > 0 for gamma < 0. direction
// = -1 flips that choice, which gives the unbounded branch.
HomoclinicResult homoclinic_shoot(const PhaseParams& p, const HomoclinicOptions& opt = {},
                                  int direction = 1);

// Shifts the orbit so its extremum sits at the profile's y0 and returns the
// sup over samples of |phi_orbit - phi_profile|.
double homoclinic_gap(const HomoclinicResult& r, const SolitonProfile& prof);

struct FieldSample {
    double phi, psi, dphi, dpsi;
};

std::vector<FieldSample> sample_vector_field(const PhaseParams& p, double phi_min,
                                             double phi_max, double psi_min,
                                             double psi_max, int n_phi, int n_psi);

}  // namespace kdvstar
