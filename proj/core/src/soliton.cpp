#include "kdvstar/soliton.hpp"

#include <cmath>
#include <sstream>

#include "kdvstar/format.hpp"

namespace kdvstar {

double sech(double x) {
    if (std::abs(x) > 350.0) return 0.0;
    return 2.0 / (std::exp(x) + std::exp(-x));
}

SolitonProfile build_profile(const EdgeParams& p) {
    double bc = p.beta + p.c;
    if (!(bc > 0.0))
        throw DomainError("no solitary wave: beta + c = " + fmt17(bc) + " is not positive");
    if (!(p.alpha > 0.0) || p.gamma == 0.0)
        throw DomainError("edge needs alpha > 0 and gamma != 0");
    SolitonProfile prof;
    prof.params = p;
    prof.amplitude = -3.0 * bc / p.gamma;
    prof.width_rate = std::sqrt(bc / p.alpha) / 2.0;
    prof.y0 = p.y0;
    return prof;
}

double eval(const SolitonProfile& prof, double y, int order) {
    double k = prof.width_rate, z = k * (y - prof.y0);
    double s = sech(z), s2 = s * s;
    double A = prof.amplitude;
    switch (order) {
        case 0:
            return A * s2;
        case 1:
            return -2.0 * A * k * s2 * std::tanh(z);
        case 2:
            return A * k * k * (4.0 * s2 - 6.0 * s2 * s2);
        case 3:
            return A * k * k * k * std::tanh(z) * (24.0 * s2 * s2 - 8.0 * s2);
        default:
            throw std::invalid_argument("derivative order must be 0..3");
    }
}

double travelling_wave(const SolitonProfile& prof, double t, double x) {
    return eval(prof, x - prof.params.c * t, 0);
}

double kdv_residual(const SolitonProfile& prof, double y) {
    const auto& p = prof.params;
    double u = eval(prof, y, 0), u1 = eval(prof, y, 1), u3 = eval(prof, y, 3);
    return -p.alpha * u3 + (p.beta + p.c) * u1 + p.gamma * u * u1;
}

std::vector<ProfileSample> sample_profile(const SolitonProfile& prof, double y_min, double y_max,
                                          double step) {
    if (!(step > 0.0) || !(y_max >= y_min)) throw std::invalid_argument("bad sampling range");
    auto n = static_cast<long>(std::floor((y_max - y_min) / step + 1e-9)) + 1;
    std::vector<ProfileSample> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        double y = y_min + static_cast<double>(i) * step;
        ProfileSample r{y, {}, kdv_residual(prof, y)};
        for (int k = 0; k < 4; ++k) r.d[k] = eval(prof, y, k);
        rows.push_back(r);
    }
    return rows;
}

std::string format_samples(const std::vector<ProfileSample>& rows) {
    std::ostringstream out;
    out << "y\tphi\tphi_1\tphi_2\tphi_3\tresidual\n";
    for (auto& r : rows) {
        out << fmt17(r.y);
        for (double d : r.d) out << '\t' << fmt17(d);
        out << '\t' << fmt17(r.residual) << '\n';
    }
    return out.str();
}

}  // namespace kdvstar
