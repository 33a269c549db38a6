// oracle.hpp — Independent validation paths for the rate equations
//
// Two routes that never touch the Bloch engine:
//  * the reduced amplitude equations for the zero-count sector, solved in
//    closed form (dot amplitude b0 and continuum amplitudes b_alpha);
//  * exact diagonalization of the detector-free dot + discretized continuum
//    Hamiltonian, giving the survival probability |<0|exp(-iHt)|0>|^2.

#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "zeno/bloch.hpp"
#include "zeno/diagnostics.hpp"
#include "zeno/model.hpp"

namespace zeno {

struct AmplitudeState {
    double t{0.0};
    std::complex<double> b0{1.0, 0.0};
    std::vector<std::complex<double>> b_alpha;

    double dot_probability() const noexcept { return std::norm(b0); }
    double continuum_probability() const;
    // Everything else: states with at least one electron in the collector.
    double detector_sector_probability() const { return 1.0 - dot_probability() - continuum_probability(); }
};

// b0(t) = exp(-(Gamma + D') t / 2),
// b_a(t) = i W (b0(t) - exp((i(E0 - Ea) - D/2) t)) / (i(E0 - Ea) - D/2 + (Gamma + D')/2).
AmplitudeState solve_amplitudes(const RateSet& rates, const EnergyGrid& grid, double t);

// Real symmetric arrowhead matrix: E0 on the first diagonal entry, the grid
// energies after it, and a uniform coupling between |0> and every |a>.
struct DiscretizedHamiltonian {
    std::size_t dim{0};
    std::vector<double> diagonal;
    double coupling{0.0};
    double spacing{0.0};

    static DiscretizedHamiltonian from_grid(const EnergyGrid& grid, double gamma);

    double e0() const { return diagonal.front(); }
    double decay_rate() const { return kTwoPi * coupling * coupling / spacing; }
    std::vector<double> dense() const;  // row-major dim x dim
};

// Eigenvalues of H and the weights |<0|k>|^2 of the dot state on each eigenvector.
struct ArrowheadSpectrum {
    std::vector<double> eigenvalues;
    std::vector<double> dot_weights;
    double weight_sum{0.0};
};

ArrowheadSpectrum diagonalize(const DiscretizedHamiltonian& h, unsigned threads = 0);

struct SurvivalCurve {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<double> deficit;  // 1 - survival, evaluated without cancellation
    double weight_sum{0.0};
    double safe_t_max{0.0};
    Diagnostics diagnostics;
};

// Warns when max(times) exceeds the recurrence-safe horizon ln(2 pi rho / Gamma) / Gamma.
SurvivalCurve wigner_weisskopf_brute(const DiscretizedHamiltonian& h, std::span<const double> times,
                                     unsigned threads = 0);

// ---------------------------------------------------------------------------

enum class Deviation { absolute, relative };

struct ValidationRow {
    std::string quantity;
    double deviation{0.0};
    double tolerance{0.0};
    bool pass{false};
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    bool all_pass() const;
};

// Max deviation between two sampled series. Throws UsageError when the
// abscissas differ.
ValidationRow compare_series(std::string quantity, std::span<const double> times_a,
                             std::span<const double> a, std::span<const double> times_b,
                             std::span<const double> b, double tolerance,
                             Deviation mode = Deviation::absolute);

struct ValidationTolerances {
    double oracle{1e-6};  // closed-form paths
    double trace{1e-8};   // counting engine traced vs traced engine
    double fwhm{0.02};    // relative line width
    double brute{0.01};   // relative survival, brute force vs exp(-Gamma t)
};

// Cross-checks a traced run, a count-resolved run and (optionally) a brute-force
// survival curve that share rates, grid and sample times.
ValidationReport compare_engines(const TracedTrajectory& traced, const CountingTrajectory& counting,
                                 const SurvivalCurve* brute, const ValidationTolerances& tol);

}  // namespace zeno
