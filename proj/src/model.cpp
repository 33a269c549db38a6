#include "zeno/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zeno/errors.hpp"

namespace zeno {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << name << " must be finite and strictly positive (got " << value << ")";
        throw InvalidParameter(os.str());
    }
}

void require_finite(double value, const char* name) {
    if (!std::isfinite(value)) {
        throw InvalidParameter(std::string(name) + " must be finite");
    }
}

void require_rate(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << name << " must be finite and non-negative (got " << value << ")";
        throw InvalidParameter(os.str());
    }
}

}  // namespace

double decoherence_rate(double d, double d_prime) {
    const double diff = std::sqrt(d) - std::sqrt(d_prime);
    return diff * diff;
}

RateSet derive_rates(const MicroscopicParams& p, Diagnostics* diag) {
    require_finite(p.omega_alpha, "omega_alpha");
    require_finite(p.omega_lr, "omega_lr");
    require_finite(p.omega_lr_prime, "omega_lr_prime");
    require_finite(p.e0, "e0");
    require_positive(p.rho, "rho");
    require_positive(p.rho_l, "rho_l");
    require_positive(p.rho_r, "rho_r");
    require_positive(p.charge, "charge");
    require_finite(p.mu_l, "mu_l");
    require_finite(p.mu_r, "mu_r");
    if (!(p.mu_l > p.mu_r)) {
        throw InvalidParameter("positive bias required: mu_l must exceed mu_r");
    }

    const double bias = p.bias();
    const double pc = p.rho_l * p.rho_r;

    RateSet r;
    r.charge = p.charge;
    r.gamma = kTwoPi * p.omega_alpha * p.omega_alpha * p.rho;
    r.t_coeff = kTwoPi * kTwoPi * p.omega_lr * p.omega_lr * pc;
    r.t_coeff_prime = kTwoPi * kTwoPi * p.omega_lr_prime * p.omega_lr_prime * pc;
    r.d = kTwoPi * p.omega_lr * p.omega_lr * pc * bias;
    r.d_prime = kTwoPi * p.omega_lr_prime * p.omega_lr_prime * pc * bias;
    r.gamma_d = decoherence_rate(r.d, r.d_prime);

    // I = e^2 T V / 2 pi with eV = mu_l - mu_r.
    r.current = p.charge * (*r.t_coeff) * bias / kTwoPi;
    r.current_prime = p.charge * (*r.t_coeff_prime) * bias / kTwoPi;

    const double width = std::max(p.omega_lr * p.omega_lr, p.omega_lr_prime * p.omega_lr_prime) * pc;
    if (diag != nullptr && bias < 10.0 * width * kTwoPi) {
        std::ostringstream os;
        os << "bias mu_l - mu_r = " << bias
           << " is not large compared with the point-contact width ("
           << width * kTwoPi << "); the Markovian detector reduction may not apply";
        diag->warn(os.str());
    }
    return r;
}

RateSet rates_from_direct(double gamma, double d, double d_prime, double charge) {
    require_rate(gamma, "gamma");
    require_rate(d, "d");
    require_rate(d_prime, "d_prime");
    require_positive(charge, "charge");
    RateSet r;
    r.gamma = gamma;
    r.d = d;
    r.d_prime = d_prime;
    r.gamma_d = decoherence_rate(d, d_prime);
    r.charge = charge;
    return r;
}

EnergyGrid build_energy_grid(double e0, double half_width, std::size_t n_points) {
    require_finite(e0, "e0");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw InvalidParameter("grid half_width must be finite and positive");
    }
    if (n_points < 3 || n_points % 2 == 0) {
        throw InvalidParameter("grid n_points must be odd and at least 3 (got " +
                               std::to_string(n_points) + ")");
    }
    EnergyGrid g;
    g.e0 = e0;
    g.e_min = e0 - half_width;
    g.e_max = e0 + half_width;
    g.n_points = n_points;
    g.spacing = 2.0 * half_width / static_cast<double>(n_points - 1);
    g.implied_dos = 1.0 / g.spacing;
    return g;
}

EnergyGrid default_energy_grid(const RateSet& rates, double e0) {
    const double width = rates.dephased_width();
    if (!(width > 0.0)) {
        throw InvalidParameter("default grid needs gamma + gamma_d > 0; set [grid] half_width explicitly");
    }
    const double half_width = 25.0 * width;
    const double max_spacing = width / 20.0;
    // Intervals per half window, rounded up so the spacing bound holds.
    const auto half_intervals =
        static_cast<std::size_t>(std::ceil(half_width / max_spacing - 1e-9));
    return build_energy_grid(e0, half_width, 2 * half_intervals + 1);
}

double grid_coupling(double gamma, const EnergyGrid& grid) {
    return std::sqrt(gamma / (kTwoPi * grid.implied_dos));
}

double rate_from_coupling(double coupling, const EnergyGrid& grid) {
    return kTwoPi * coupling * coupling * grid.implied_dos;
}

}  // namespace zeno
