#include "zeno/counting.hpp"

#include <algorithm>
#include <cmath>

#include "zeno/errors.hpp"
#include "zeno/parallel.hpp"

namespace zeno {

double CountDistribution::total() const { return pairwise_sum(p_n); }

double CountDistribution::mean() const {
    std::vector<double> weighted(p_n.size());
    for (std::size_t n = 0; n < p_n.size(); ++n) weighted[n] = static_cast<double>(n) * p_n[n];
    return pairwise_sum(weighted);
}

CountDistribution pn_distribution(const CountResolvedState& s) {
    CountDistribution d;
    d.t = s.t;
    d.p_n.resize(s.rungs());
    for (std::size_t n = 0; n < s.rungs(); ++n) d.p_n[n] = s.rung_mass(n);
    return d;
}

CountDistribution pn_distribution(const CountingSnapshot& s) { return {s.t, s.p_n}; }

std::vector<CurrentSample> mean_current(const CountingTrajectory& traj) {
    std::vector<CurrentSample> out;
    out.reserve(traj.snapshots.size());
    const RateSet& r = traj.rates;
    for (const auto& snap : traj.snapshots) {
        const double dot = pairwise_sum(snap.sigma_00_n);
        const double continuum = pairwise_sum(snap.p_n) - dot;
        const auto dist = pn_distribution(snap);
        out.push_back({snap.t, dist.mean(), r.charge * (r.d_prime * dot + r.d * continuum)});
    }
    return out;
}

std::vector<CurrentSample> mean_current(const TracedTrajectory& traj) {
    std::vector<CurrentSample> out;
    out.reserve(traj.times.size());
    const RateSet& r = traj.rates;
    double accumulated = 0.0;
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
        const double rate = r.d_prime * traj.sigma_00[j] + r.d * traj.continuum_mass[j];
        if (j > 0) {
            const double prev = r.d_prime * traj.sigma_00[j - 1] + r.d * traj.continuum_mass[j - 1];
            accumulated += 0.5 * (traj.times[j] - traj.times[j - 1]) * (rate + prev);
        }
        out.push_back({traj.times[j], accumulated, r.charge * rate});
    }
    return out;
}

FwhmResult fwhm_analyze(std::span<const double> energy, std::span<const double> density) {
    if (energy.size() != density.size() || energy.size() < 3) {
        throw AnalysisError("fwhm: need at least three (E, density) samples of equal length");
    }
    const auto peak_it = std::max_element(density.begin(), density.end());
    const std::size_t peak = static_cast<std::size_t>(peak_it - density.begin());
    const double top = *peak_it;
    if (!(top > 0.0)) throw AnalysisError("fwhm: spectrum has no positive peak");

    const double slack = 1e-12 * top;
    for (std::size_t i = 0; i < peak; ++i) {
        if (density[i] > density[i + 1] + slack) throw AnalysisError("fwhm: spectrum is not unimodal");
    }
    for (std::size_t i = peak; i + 1 < density.size(); ++i) {
        if (density[i + 1] > density[i] + slack) throw AnalysisError("fwhm: spectrum is not unimodal");
    }

    const double half = 0.5 * top;
    auto crossing = [&](std::size_t lo, std::size_t hi) {
        // density[lo] and density[hi] bracket the half maximum
        const double f = (half - density[lo]) / (density[hi] - density[lo]);
        return energy[lo] + f * (energy[hi] - energy[lo]);
    };

    FwhmResult r;
    r.peak = top;
    r.peak_energy = energy[peak];
    std::size_t i = peak;
    while (i > 0 && density[i - 1] > half) --i;
    if (i == 0) throw AnalysisError("fwhm: left flank never falls below half maximum");
    r.left = crossing(i - 1, i);
    std::size_t k = peak;
    while (k + 1 < density.size() && density[k + 1] > half) ++k;
    if (k + 1 == density.size()) throw AnalysisError("fwhm: right flank never falls below half maximum");
    r.right = crossing(k + 1, k);
    r.width = r.right - r.left;
    return r;
}

double fwhm_extract(std::span<const double> energy, std::span<const double> density) {
    return fwhm_analyze(energy, density).width;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw UsageError("trapezoid: size mismatch");
    std::vector<double> pieces;
    pieces.reserve(x.size());
    for (std::size_t i = 1; i < x.size(); ++i) pieces.push_back(0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]));
    return pairwise_sum(pieces);
}

double kolmogorov_distance_poisson(const CountDistribution& dist, double mean, bool normalize) {
    const double scale = normalize ? 1.0 / dist.total() : 1.0;
    double cdf = 0.0, ref_cdf = 0.0, worst = 0.0;
    for (std::size_t n = 0; n < dist.p_n.size(); ++n) {
        const double nd = static_cast<double>(n);
        const double pois = mean > 0.0 ? std::exp(-mean + nd * std::log(mean) - std::lgamma(nd + 1.0))
                                       : (n == 0 ? 1.0 : 0.0);
        cdf += dist.p_n[n] * scale;
        ref_cdf += pois;
        worst = std::max(worst, std::abs(cdf - ref_cdf));
    }
    // Beyond the ladder the reference CDF tends to 1 while ours stays put.
    worst = std::max(worst, std::abs(cdf - 1.0));
    return worst;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw UsageError("fit_line: need two or more points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace zeno
