#include "doctest.h"

#include <cmath>
#include <random>

#include "kdvstar/soliton.hpp"

using namespace kdvstar;

namespace {

EdgeParams standard() { return {1.0, 0.0, -6.0, 1.0, 0.0, ""}; }

}  // namespace

TEST_CASE("standard profile amplitude and width") {
    auto p = build_profile(standard());
    CHECK(p.amplitude == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.width_rate == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("gamma positive gives a negative pulse of depth 3") {
    auto p = build_profile({1.0, 0.0, 1.0, 1.0, 0.0, ""});
    CHECK(eval(p, 0.0, 0) == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(p.amplitude < 0.0);
}

TEST_CASE("beta + c = 0 is a domain error") {
    CHECK_THROWS_AS(build_profile({1.0, -1.0, -6.0, 1.0, 0.0, ""}), DomainError);
}

TEST_CASE("first derivative vanishes at the peak") {
    auto p = build_profile(standard());
    CHECK(eval(p, 0.0, 1) == 0.0);
    CHECK(std::abs(eval(p, 0.0, 3)) < 1e-15);
}

TEST_CASE("tails underflow cleanly") {
    auto p = build_profile(standard());
    CHECK(std::abs(eval(p, 50.0 / p.width_rate, 0)) < 1e-20);
    CHECK(std::abs(eval(p, -50.0 / p.width_rate, 0)) < 1e-20);
    CHECK(eval(p, 1e6, 0) == 0.0);
    CHECK(eval(p, -1e6, 3) == 0.0);
}

TEST_CASE("travelling wave peaks at x = y0 + c t") {
    auto p = build_profile(standard());
    CHECK(travelling_wave(p, 2.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(travelling_wave(p, 0.0, p.y0) == p.amplitude);
    CHECK(travelling_wave(p, 1.3, 0.4) == eval(p, 0.4 - 1.3 * p.params.c, 0));
}

TEST_CASE("closed form satisfies the travelling-wave ODE") {
    auto p = build_profile(standard());
    CHECK(std::abs(kdv_residual(p, 0.37)) <= 1e-10);
    CHECK(std::abs(kdv_residual(p, 0.0)) <= 1e-15);
}

TEST_CASE("tampered amplitude is not a solution") {
    auto p = build_profile(standard());
    p.amplitude *= 1.1;
    CHECK(std::abs(kdv_residual(p, 0.5)) > 1e-3);
}

TEST_CASE("profile properties on random parameters") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        EdgeParams e;
        e.alpha = 0.2 + 4.0 * U(rng);
        e.beta = -2.0 + 4.0 * U(rng);
        e.c = -e.beta + 0.1 + 5.0 * U(rng);
        if (std::abs(e.c) < 1e-3) e.c = 1e-3;
        e.gamma = (U(rng) < 0.5 ? -1.0 : 1.0) * (0.3 + 6.0 * U(rng));
        e.y0 = -3.0 + 6.0 * U(rng);
        auto p = build_profile(e);

        double bc = e.beta + e.c;
        CHECK(p.amplitude * e.gamma == doctest::Approx(-3.0 * bc).epsilon(1e-14));
        CHECK(4.0 * p.width_rate * p.width_rate * e.alpha == doctest::Approx(bc).epsilon(1e-14));
        CHECK((p.amplitude > 0) == (e.gamma < 0));
        CHECK(eval(p, e.y0, 0) == p.amplitude);

        double h = 1e-4, span = 12.0 / p.width_rate, scale = std::max(1.0, std::abs(p.amplitude));
        for (int i = 0; i <= 200; ++i) {
            double s = span * i / 200.0;
            CHECK(eval(p, e.y0 + s, 0) == doctest::Approx(eval(p, e.y0 - s, 0)).epsilon(1e-12));
            if (i > 0) CHECK(std::abs(eval(p, e.y0 + s, 0)) < std::abs(p.amplitude));
            double y = e.y0 - span / 2 + s;
            CHECK(std::abs(kdv_residual(p, y)) <= 1e-8 * scale);
            // central differences of order k match order k+1 to O(h^2)
            for (int k = 0; k < 3; ++k) {
                double fd = (eval(p, y + h, k) - eval(p, y - h, k)) / (2 * h);
                double ex = eval(p, y, k + 1);
                double bound = 1e-6 * std::abs(p.amplitude) * std::pow(p.width_rate + 1.0, k + 4);
                CHECK(std::abs(fd - ex) <= bound);
            }
        }
    }
}

TEST_CASE("sampling honours the range") {
    auto p = build_profile(standard());
    auto rows = sample_profile(p, -20.0, 20.0, 0.5);
    CHECK(rows.size() == 81);
    CHECK(rows.front().y == -20.0);
    CHECK(rows.back().y == doctest::Approx(20.0));
    auto text = format_samples(rows);
    CHECK(text.find("phi") != std::string::npos);
}
