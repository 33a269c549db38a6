// counting.hpp — Detector-side observables: count distribution, current, line width

#pragma once

#include <span>
#include <vector>

#include "zeno/bloch.hpp"

namespace zeno {

// P_n(t) = sigma_00^n + sum_a sigma_aa^n, the probability that n electrons
// have reached the collector.
struct CountDistribution {
    double t{0.0};
    std::vector<double> p_n;

    double total() const;
    double mean() const;
};

CountDistribution pn_distribution(const CountResolvedState& s);
CountDistribution pn_distribution(const CountingSnapshot& s);

struct CurrentSample {
    double t{0.0};
    double mean_n{0.0};
    double current{0.0};
};

// current(t) = e [D' sigma_00 + D sum_a sigma_aa]: collector count rate with the
// dot occupied weighted by D', emptied into the grid weighted by D. Mass lost
// through the finite window counts for neither.
// From a count-resolved run mean_n is the first moment of P_n; from a traced
// run it is the trapezoid integral of the count rate.
std::vector<CurrentSample> mean_current(const CountingTrajectory& traj);
std::vector<CurrentSample> mean_current(const TracedTrajectory& traj);

struct FwhmResult {
    double width{0.0};
    double left{0.0};   // half-maximum crossing below the peak
    double right{0.0};  // half-maximum crossing above the peak
    double peak_energy{0.0};
    double peak{0.0};
};

// Full width at half maximum by linear interpolation on each flank.
// Throws AnalysisError when the input is not unimodal or a flank never drops
// below half maximum.
FwhmResult fwhm_analyze(std::span<const double> energy, std::span<const double> density);
double fwhm_extract(std::span<const double> energy, std::span<const double> density);

// Trapezoid integral of samples on a uniform or non-uniform abscissa.
double trapezoid(std::span<const double> x, std::span<const double> y);

// sup_n |F(n) - F_Poisson(n)|. With `normalize` the distribution is first
// divided by its total mass.
double kolmogorov_distance_poisson(const CountDistribution& dist, double mean, bool normalize);

struct LineFit {
    double slope{0.0};
    double intercept{0.0};
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace zeno
