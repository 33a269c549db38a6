// model.hpp — Physical parameters, derived rates and the continuum discretization

#pragma once

#include <cstddef>
#include <optional>

#include "zeno/diagnostics.hpp"

namespace zeno {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Raw couplings and band parameters of the dot + point-contact Hamiltonian.
// Natural units: hbar = 1, electron charge defaults to 1.
struct MicroscopicParams {
    double omega_alpha{0.0};     // dot <-> continuum hopping
    double omega_lr{0.0};        // point-contact hopping, dot empty
    double omega_lr_prime{0.0};  // point-contact hopping, dot occupied
    double rho{1.0};             // continuum density of states
    double rho_l{1.0};           // emitter density of states
    double rho_r{1.0};           // collector density of states
    double mu_l{1.0};            // emitter Fermi level
    double mu_r{0.0};            // collector Fermi level
    double e0{0.0};              // dot level
    double charge{1.0};

    double bias() const noexcept { return mu_l - mu_r; }
    double delta_omega_lr() const noexcept { return omega_lr_prime - omega_lr; }
};

// Macroscopic rates. Transmissions and currents exist only when the rates were
// derived from microscopic couplings (a bias is needed to define them).
struct RateSet {
    double gamma{0.0};    // dot decay rate
    double d{0.0};        // detector rate, dot empty
    double d_prime{0.0};  // detector rate, dot occupied
    double gamma_d{0.0};  // decoherence rate (sqrt(D) - sqrt(D'))^2
    std::optional<double> t_coeff;
    std::optional<double> t_coeff_prime;
    std::optional<double> current;
    std::optional<double> current_prime;
    double charge{1.0};

    double dephased_width() const noexcept { return gamma + gamma_d; }
    double total_rate() const noexcept { return gamma + gamma_d + d + d_prime; }
};

// Throws InvalidParameter on non-positive densities of states, non-finite
// amplitudes or mu_l <= mu_r. Emits a warning when the bias is not large
// compared with the point-contact level widths.
RateSet derive_rates(const MicroscopicParams& p, Diagnostics* diag = nullptr);

// Rates given directly; gamma_d is recomputed so the invariant holds exactly.
RateSet rates_from_direct(double gamma, double d, double d_prime, double charge = 1.0);

double decoherence_rate(double d, double d_prime);

// Uniform discretization of the continuum, centered on the dot level.
struct EnergyGrid {
    double e0{0.0};
    double e_min{0.0};
    double e_max{0.0};
    std::size_t n_points{0};
    double spacing{0.0};
    double implied_dos{0.0};

    std::size_t center_index() const noexcept { return n_points / 2; }

    // E0 - E_alpha, exactly antisymmetric about the center node.
    double detuning(std::size_t i) const noexcept {
        return (static_cast<double>(center_index()) - static_cast<double>(i)) * spacing;
    }
    double energy(std::size_t i) const noexcept { return e0 - detuning(i); }
    double half_width() const noexcept { return 0.5 * (e_max - e_min); }
};

EnergyGrid build_energy_grid(double e0, double half_width, std::size_t n_points);

// Default window: half_width = 25 (Gamma + Gamma_d), spacing <= (Gamma + Gamma_d)/20.
EnergyGrid default_energy_grid(const RateSet& rates, double e0);

// Per-level coupling that preserves 2 pi |Omega|^2 rho = Gamma on the grid.
double grid_coupling(double gamma, const EnergyGrid& grid);

// Inverse of grid_coupling.
double rate_from_coupling(double coupling, const EnergyGrid& grid);

}  // namespace zeno
