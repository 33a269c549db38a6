// bloch.hpp — Bloch-type rate equations for the monitored dot
//
// Traced equations (detector counts summed out):
//   d s00/dt  = -Gamma s00
//   d saa/dt  = i W (sa0 - s0a)
//   d sa0/dt  = i (E0 - Ea) sa0 - i W s00 - (Gamma + Gamma_d)/2 sa0
// Count-resolved equations (n electrons collected):
//   d s00^n/dt = -(Gamma + D') s00^n + D' s00^{n-1}
//   d saa^n/dt = -D saa^n + D saa^{n-1} + i W (sa0^n - s0a^n)
//   d sa0^n/dt = i (E0 - Ea) sa0^n - i W s00^n - (Gamma + D + D')/2 sa0^n
//                + sqrt(D D') sa0^{n-1}
// W is the per-level grid coupling. Both systems start from the occupied dot
// with zero counts. Levels never couple to each other, so every level is
// propagated independently (and in parallel) given the dot populations.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "zeno/diagnostics.hpp"
#include "zeno/model.hpp"

namespace zeno {

using cplx = std::complex<double>;

// Tolerance for small negative populations and trace overshoot.
inline constexpr double kPopulationTolerance = 1e-10;

// Mass allowed on the last count rung at the end of a run.
inline constexpr double kLadderLeakLimit = 1e-8;

struct TracedState {
    double t{0.0};
    double sigma_00{1.0};
    std::vector<double> sigma_aa;  // per continuum level
    std::vector<cplx> sigma_a0;    // sigma_0a is the conjugate, never stored

    double continuum_mass() const;  // pairwise sum of sigma_aa
    double total_mass() const { return sigma_00 + continuum_mass(); }
};

// Level-major storage: entry (n, a) lives at a * (n_max + 1) + n.
struct CountResolvedState {
    double t{0.0};
    std::size_t n_max{0};
    std::size_t n_levels{0};
    std::vector<double> sigma_00_n;
    std::vector<double> sigma_aa_n;
    std::vector<cplx> sigma_a0_n;

    CountResolvedState() = default;
    CountResolvedState(std::size_t n_max, std::size_t n_levels);

    std::size_t rungs() const noexcept { return n_max + 1; }
    std::size_t index(std::size_t n, std::size_t a) const noexcept { return a * rungs() + n; }
    double aa(std::size_t n, std::size_t a) const noexcept { return sigma_aa_n[index(n, a)]; }
    cplx a0(std::size_t n, std::size_t a) const noexcept { return sigma_a0_n[index(n, a)]; }

    // sigma_00^n + sum_a sigma_aa^n
    double rung_mass(std::size_t n) const;
};

TracedState trace_over_n(const CountResolvedState& s);

enum class Integrator { exponential, rk4 };

const char* to_string(Integrator integrator) noexcept;
Integrator integrator_from_string(const std::string& name);

enum class ProfileStorage { every_sample, final_only };

struct SolverSettings {
    Integrator integrator{Integrator::exponential};
    std::optional<double> dt;             // step cap; integrator default when absent
    std::optional<std::size_t> n_max;     // count-ladder depth; auto rule when absent
    unsigned threads{0};                  // 0: ZENO_THREADS or hardware default
    ProfileStorage profiles{ProfileStorage::every_sample};
};

// n_max = ceil(Dmax t + 10 sqrt(Dmax t)) + 10, Dmax = max(D, D').
std::size_t auto_ladder_depth(const RateSet& rates, double t_end);

// Interior step actually used for a sampling interval of length dt_out.
double resolved_step(const RateSet& rates, const EnergyGrid& grid, const SolverSettings& s,
                     double dt_out);

struct TracedTrajectory {
    std::vector<double> times;
    std::vector<double> sigma_00;        // per sample
    std::vector<double> continuum_mass;  // per sample, sum_a sigma_aa
    std::vector<TracedState> states;     // every sample, or the final one only
    RateSet rates;
    EnergyGrid grid;
    SolverSettings settings;
    double step{0.0};
    Diagnostics diagnostics;

    bool empty() const noexcept { return times.empty(); }
    const TracedState& final_state() const { return states.back(); }
};

// Reduced per-sample record of a count-resolved run.
struct CountingSnapshot {
    double t{0.0};
    std::vector<double> sigma_00_n;   // dot-occupied rung populations
    std::vector<double> p_n;          // sigma_00^n + sum_a sigma_aa^n
    TracedState traced;               // trace_over_n of the live state
    std::vector<double> sector0_aa;   // n = 0 continuum profile
    std::vector<cplx> sector0_a0;
};

struct CountingTrajectory {
    std::vector<double> times;
    std::vector<CountingSnapshot> snapshots;
    CountResolvedState final_state;
    RateSet rates;
    EnergyGrid grid;
    SolverSettings settings;
    std::size_t n_max{0};
    double step{0.0};
    double ladder_top_mass{0.0};
    Diagnostics diagnostics;

    bool empty() const noexcept { return times.empty(); }
};

// Samples at k * dt_out, plus t_end when it is not a multiple of dt_out.
std::vector<double> sample_times(double t_end, double dt_out);

TracedTrajectory evolve_traced(const RateSet& rates, const EnergyGrid& grid, double t_end,
                               double dt_out, const SolverSettings& settings = {});

CountingTrajectory evolve_counting(const RateSet& rates, const EnergyGrid& grid, double t_end,
                                   double dt_out, const SolverSettings& settings = {});

// Probability density over the grid, sigma_aa(t_end) / spacing.
struct Spectrum {
    std::vector<double> energy;
    std::vector<double> density;
    double residual_sigma_00{0.0};
};

Spectrum spectral_distribution(const TracedTrajectory& traj, Diagnostics* diag = nullptr);
Spectrum spectral_distribution(const CountingTrajectory& traj, Diagnostics* diag = nullptr);

}  // namespace zeno
