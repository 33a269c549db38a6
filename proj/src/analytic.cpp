#include "zeno/analytic.hpp"

#include <cmath>

#include "zeno/errors.hpp"

namespace zeno {

double survival_probability(double gamma, double t) {
    if (t < 0.0) throw UsageError("survival_probability: negative time");
    if (gamma < 0.0) throw UsageError("survival_probability: negative decay rate");
    return std::exp(-gamma * t);
}

LorentzianSpec make_lorentzian(const RateSet& rates, double coupling_sq, double center) {
    if (!(rates.gamma > 0.0)) throw InvalidParameter("Lorentzian needs gamma > 0");
    LorentzianSpec spec;
    spec.center = center;
    spec.width = rates.dephased_width();
    spec.weight_ratio = spec.width / rates.gamma;
    spec.coupling_sq = coupling_sq;
    return spec;
}

double lorentzian_p(const LorentzianSpec& spec, double e_alpha) noexcept {
    const double detuning = spec.center - e_alpha;
    const double half = 0.5 * spec.width;
    return spec.coupling_sq * spec.weight_ratio / (detuning * detuning + half * half);
}

double lorentzian_density(const LorentzianSpec& spec, double rho, double e_alpha) noexcept {
    return rho * lorentzian_p(spec, e_alpha);
}

double lorentzian_window_mass(double width, double half_window) {
    if (!(width > 0.0)) throw InvalidParameter("Lorentzian width must be positive");
    return (2.0 / kPi) * std::atan(2.0 * half_window / width);
}

double lorentzian_tail_mass(double width, double half_window) {
    // 1 - (2/pi) atan(x) = (2/pi) atan(1/x), without cancellation.
    if (!(width > 0.0)) throw InvalidParameter("Lorentzian width must be positive");
    return (2.0 / kPi) * std::atan(width / (2.0 * half_window));
}

std::complex<double> exp_divided_difference(std::complex<double> p, std::complex<double> q,
                                            double t) {
    const std::complex<double> x = (q - p) * t;
    if (std::abs(x) >= 1.0) {
        return (std::exp(p * t) - std::exp(q * t)) / (p - q);
    }
    std::complex<double> ratio;  // expm1(x) / x
    if (std::abs(x) < 1e-3) {
        std::complex<double> term = 1.0;
        ratio = 1.0;
        for (int k = 2; k <= 7; ++k) {
            term *= x / static_cast<double>(k);
            ratio += term;
        }
    } else {
        const double a = x.real(), b = x.imag();
        const double sin_half = std::sin(0.5 * b);
        const std::complex<double> expm1_x{std::expm1(a) * std::cos(b) - 2.0 * sin_half * sin_half,
                                           std::exp(a) * std::sin(b)};
        ratio = expm1_x / x;
    }
    return std::exp(p * t) * t * ratio;
}

std::complex<double> offdiag_closed_form(double gamma, double gamma_d, double omega,
                                         double detuning, double t) {
    using namespace std::complex_literals;
    const std::complex<double> lambda{-0.5 * (gamma + gamma_d), detuning};
    return -1i * omega * exp_divided_difference(-gamma, lambda, t);
}

}  // namespace zeno
