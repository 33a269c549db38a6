// analytic.hpp — Closed-form decay law, line shape and coherence

#pragma once

#include <complex>

#include "zeno/model.hpp"

namespace zeno {

// exp(-gamma t). Throws UsageError for negative t or gamma.
double survival_probability(double gamma, double t);

// Asymptotic continuum population under monitoring,
//   P(E) = |W|^2 / Gamma * (Gamma + Gamma_d) / ((E0 - E)^2 + (Gamma + Gamma_d)^2 / 4),
// a Lorentzian of full width Gamma + Gamma_d.
struct LorentzianSpec {
    double center{0.0};        // E0
    double width{1.0};         // Gamma + Gamma_d (FWHM)
    double weight_ratio{1.0};  // (Gamma + Gamma_d) / Gamma
    double coupling_sq{0.0};   // |W|^2
};

LorentzianSpec make_lorentzian(const RateSet& rates, double coupling_sq, double center);

// Probability per continuum state.
double lorentzian_p(const LorentzianSpec& spec, double e_alpha) noexcept;

// Probability density, P(E) * rho.
double lorentzian_density(const LorentzianSpec& spec, double rho, double e_alpha) noexcept;

// Mass of a unit-normalized Lorentzian inside |E - E0| <= half_window.
double lorentzian_window_mass(double width, double half_window);
double lorentzian_tail_mass(double width, double half_window);

// (exp(p t) - exp(q t)) / (p - q), continuous through p = q where it is t exp(p t).
std::complex<double> exp_divided_difference(std::complex<double> p, std::complex<double> q,
                                            double t);

// Solution of the traced coherence equation with s00 = exp(-Gamma t) and zero
// initial value. With lambda = i*detuning - (Gamma + Gamma_d)/2:
//   sa0(t) = i W (exp(-Gamma t) - exp(lambda t)) / (lambda + Gamma),
// and -i W t exp(-Gamma t) at the removable point lambda = -Gamma.
std::complex<double> offdiag_closed_form(double gamma, double gamma_d, double omega,
                                         double detuning, double t);

}  // namespace zeno
