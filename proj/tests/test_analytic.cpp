#include <doctest.h>

#include <cmath>
#include <complex>

#include "support.hpp"
#include "zeno/analytic.hpp"
#include "zeno/errors.hpp"

using namespace zeno;
using cd = std::complex<double>;

namespace {

// Classical RK4 on s' = (i detuning - kappa) s - i W exp(-Gamma t), s(0) = 0.
cd coherence_by_rk4(double gamma, double gamma_d, double w, double detuning, double t_end) {
    const cd lambda{-(gamma + gamma_d) / 2.0, detuning};
    const auto f = [&](double t, cd s) { return lambda * s - cd{0.0, w} * std::exp(-gamma * t); };
    const int steps = 20000;
    const double h = t_end / steps;
    cd s{};
    for (int k = 0; k < steps; ++k) {
        const double t = k * h;
        const cd k1 = f(t, s);
        const cd k2 = f(t + h / 2, s + h / 2 * k1);
        const cd k3 = f(t + h / 2, s + h / 2 * k2);
        const cd k4 = f(t + h, s + h * k3);
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return s;
}

LorentzianSpec unit_line(double gamma, double gamma_d, double rho) {
    RateSet r = rates_from_direct(gamma, 0.0, 0.0);
    r.gamma_d = gamma_d;
    return make_lorentzian(r, gamma / (kTwoPi * rho), 0.0);
}

}  // namespace

TEST_CASE("survival probability") {
    CHECK(survival_probability(1.0, 0.0) == 1.0);
    CHECK(survival_probability(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(survival_probability(0.0, 5.0) == 1.0);
    CHECK_THROWS_AS(survival_probability(1.0, -0.1), UsageError);
    CHECK_THROWS_AS(survival_probability(-1.0, 1.0), UsageError);
}

TEST_CASE("Lorentzian reaches half maximum one half-width from the centre") {
    const LorentzianSpec spec = unit_line(1.0, 1.0, 100.0);
    const double peak = lorentzian_density(spec, 100.0, 0.0);
    CHECK(lorentzian_density(spec, 100.0, 1.0) == doctest::Approx(peak / 2.0).epsilon(1e-14));
    CHECK(lorentzian_density(spec, 100.0, -1.0) == doctest::Approx(peak / 2.0).epsilon(1e-14));
    CHECK(peak == doctest::Approx(2.0 / (kPi * 2.0)).epsilon(1e-14));
}

TEST_CASE("Lorentzian density integrates to one") {
    const LorentzianSpec spec = unit_line(1.0, 0.5, 50.0);
    // Midpoint rule on [-L, L] plus the exact tail.
    const double L = 200.0;
    const int n = 400000;
    const double h = 2.0 * L / n;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += lorentzian_density(spec, 50.0, -L + (k + 0.5) * h) * h;
    CHECK(sum + lorentzian_tail_mass(1.5, L) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("window and tail masses") {
    CHECK(lorentzian_window_mass(1.0, 25.0) == doctest::Approx(0.987269301798054).epsilon(1e-14));
    CHECK(lorentzian_tail_mass(1.0, 25.0) == doctest::Approx(0.0127306982019456).epsilon(1e-12));
    CHECK(lorentzian_window_mass(1.0, 25.0) + lorentzian_tail_mass(1.0, 25.0) == doctest::Approx(1.0));
}

TEST_CASE("closed-form coherence") {
    CHECK(std::abs(offdiag_closed_form(1.0, 0.5, 0.04, 0.3, 0.0)) == 0.0);

    const cd c = offdiag_closed_form(1.0, 0.5, 0.04, 0.3, 2.0);
    CHECK(c.real() == doctest::Approx(0.004419828451277111).epsilon(1e-12));
    CHECK(c.imag() == doctest::Approx(-0.013115311692634385).epsilon(1e-12));
    CHECK(std::abs(c - coherence_by_rk4(1.0, 0.5, 0.04, 0.3, 2.0)) < 1e-12);
}

TEST_CASE("closed-form coherence at the removable point") {
    // kappa = Gamma and zero detuning: the two exponentials coincide.
    const double t = 1.7;
    const cd c = offdiag_closed_form(1.0, 1.0, 0.05, 0.0, t);
    const cd limit = cd{0.0, -0.05 * t * std::exp(-t)};
    CHECK(std::abs(c - limit) < 1e-16);
    CHECK(std::abs(c - coherence_by_rk4(1.0, 1.0, 0.05, 0.0, t)) < 1e-12);
    // Continuous on approach.
    const cd near = offdiag_closed_form(1.0, 1.0 + 1e-7, 0.05, 1e-7, t);
    CHECK(std::abs(near - coherence_by_rk4(1.0, 1.0 + 1e-7, 0.05, 1e-7, t)) < 1e-12);
}

TEST_CASE("property: divided difference is smooth across its branches") {
    testing::Gen gen(21);
    for (int k = 0; k < testing::kCases; ++k) {
        const cd p{gen.uniform(-3, 0), gen.uniform(-3, 3)};
        const double t = gen.uniform(0.1, 5.0);
        // Separations that straddle the series / expm1 / direct switch points.
        for (double gap : {1e-9, 5e-4 / t, 2e-3 / t, 0.5 / t, 3.0 / t}) {
            const cd q = p + cd{gap, -0.5 * gap};
            const cd got = exp_divided_difference(p, q, t);
            if (std::abs(q - p) * t > 0.5) {
                // Far apart: the direct quotient has no cancellation to speak of.
                using ld = std::complex<long double>;
                const ld lp{p.real(), p.imag()}, lq{q.real(), q.imag()};
                const long double lt = t;
                const ld direct = (std::exp(lp * lt) - std::exp(lq * lt)) / (lp - lq);
                CHECK(std::abs(ld{got.real(), got.imag()} - direct) <= 1e-13L * std::abs(direct));
                continue;
            }
            // Mean value of t exp(s t) over the segment p -> q by Gauss-Legendre.
            const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                 0.9061798459386640};
            const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
            cd ref{};
            for (int i = 0; i < 5; ++i) {
                const cd s = p + (q - p) * (0.5 * (x[i] + 1.0));
                ref += 0.5 * w[i] * t * std::exp(s * t);
            }
            CHECK(std::abs(got - ref) <= 1e-12 * std::abs(ref) + 1e-300);
        }
    }
}

TEST_CASE("property: coherence agrees with direct integration") {
    testing::Gen gen(22);
    for (int k = 0; k < 12; ++k) {
        const double gamma = gen.uniform(0.2, 3.0);
        const double gamma_d = gen.uniform(0.0, 3.0);
        const double w = gen.uniform(0.001, 0.1);
        const double det = gen.uniform(-10, 10);
        const double t = gen.uniform(0.1, 4.0);
        const cd exact = offdiag_closed_form(gamma, gamma_d, w, det, t);
        CHECK(std::abs(exact - coherence_by_rk4(gamma, gamma_d, w, det, t)) < 1e-11);
    }
}

TEST_CASE("property: Lorentzian is even about its centre and covariant under width scaling") {
    testing::Gen gen(23);
    for (int k = 0; k < testing::kCases; ++k) {
        const double gamma = gen.uniform(0.1, 4.0);
        const double gd = gen.uniform(0.0, 4.0);
        const LorentzianSpec spec = unit_line(gamma, gd, 10.0);
        const double e = gen.uniform(0.0, 30.0);
        CHECK(lorentzian_density(spec, 10.0, e) == lorentzian_density(spec, 10.0, -e));
        const double s = gen.uniform(0.5, 3.0);
        const LorentzianSpec wide = unit_line(s * gamma, s * gd, 10.0);
        CHECK(s * lorentzian_density(wide, 10.0, s * e) ==
              doctest::Approx(lorentzian_density(spec, 10.0, e)).epsilon(1e-12));
    }
}
