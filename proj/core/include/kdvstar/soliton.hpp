#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kdvstar/graph.hpp"

namespace kdvstar {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// sech computed as 2/(e^x + e^-x); exact zero once |x| > 350.
double sech(double x);

struct SolitonProfile {
    EdgeParams params;
    double amplitude = 0.0;   // -3(beta+c)/gamma
    double width_rate = 0.0;  // sqrt((beta+c)/alpha)/2
    double y0 = 0.0;
};

// Throws DomainError when beta + c <= 0.
SolitonProfile build_profile(const EdgeParams& p);

// order-th derivative of the profile at y, order in 0..3.
double eval(const SolitonProfile& prof, double y, int order = 0);

double travelling_wave(const SolitonProfile& prof, double t, double x);

// -alpha phi''' + (beta+c) phi' + gamma phi phi'
double kdv_residual(const SolitonProfile& prof, double y);

struct ProfileSample {
    double y;
    double d[4];
    double residual;
};

std::vector<ProfileSample> sample_profile(const SolitonProfile& prof, double y_min,
                                          double y_max, double step);

// Tab separated y, phi, phi', phi'', phi''', residual.
std::string format_samples(const std::vector<ProfileSample>& rows);

}  // namespace kdvstar
