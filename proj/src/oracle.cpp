#include "zeno/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "zeno/analytic.hpp"
#include "zeno/counting.hpp"
#include "zeno/errors.hpp"
#include "zeno/parallel.hpp"

namespace zeno {

double AmplitudeState::continuum_probability() const {
    std::vector<double> p(b_alpha.size());
    for (std::size_t a = 0; a < b_alpha.size(); ++a) p[a] = std::norm(b_alpha[a]);
    return pairwise_sum(p);
}

AmplitudeState solve_amplitudes(const RateSet& rates, const EnergyGrid& grid, double t) {
    using namespace std::complex_literals;
    if (t < 0.0) throw UsageError("solve_amplitudes: negative time");
    const double dot_rate = 0.5 * (rates.gamma + rates.d_prime);
    const double coupling = grid_coupling(rates.gamma, grid);

    AmplitudeState s;
    s.t = t;
    s.b0 = std::exp(-dot_rate * t);
    s.b_alpha.resize(grid.n_points);
    for (std::size_t a = 0; a < grid.n_points; ++a) {
        const std::complex<double> level_pole{-0.5 * rates.d, grid.detuning(a)};
        s.b_alpha[a] = -1i * coupling * exp_divided_difference(-dot_rate, level_pole, t);
    }
    return s;
}

DiscretizedHamiltonian DiscretizedHamiltonian::from_grid(const EnergyGrid& grid, double gamma) {
    DiscretizedHamiltonian h;
    h.dim = grid.n_points + 1;
    h.diagonal.resize(h.dim);
    h.diagonal[0] = grid.e0;
    for (std::size_t a = 0; a < grid.n_points; ++a) h.diagonal[a + 1] = grid.energy(a);
    h.coupling = grid_coupling(gamma, grid);
    h.spacing = grid.spacing;
    return h;
}

std::vector<double> DiscretizedHamiltonian::dense() const {
    std::vector<double> m(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] = diagonal[i];
    for (std::size_t i = 1; i < dim; ++i) {
        m[i] = coupling;
        m[i * dim] = coupling;
    }
    return m;
}

namespace {

// Secular function of the arrowhead matrix in coordinates centred on a pole:
//   F(tau) = (p - E0) + tau - W^2 sum_i 1 / (tau - d_i),   d_i = z_i - p.
struct Secular {
    std::span<const double> offsets;
    double shift;  // p - E0
    double w2;

    void eval(double tau, double& f, double& df) const {
        double s1 = 0.0, s2 = 0.0;
        for (double d : offsets) {
            const double inv = 1.0 / (tau - d);
            s1 += inv;
            s2 += inv * inv;
        }
        f = shift + tau - w2 * s1;
        df = 1.0 + w2 * s2;
    }
};

// Root of F on the open bracket (lo, hi) with F(lo) < 0 < F(hi); returns tau
// and 1/F'(tau), the dot weight of the eigenvector.
std::pair<double, double> solve_secular(const Secular& sec, double lo, double hi) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double tau = 0.5 * (lo + hi);
    double f = 0.0, df = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        sec.eval(tau, f, df);
        if (f == 0.0) break;
        if (f < 0.0) lo = tau; else hi = tau;
        double next = tau - f / df;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - tau);
        tau = next;
        if (step <= 2.0 * eps * std::abs(tau) || hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi))) {
            break;
        }
    }
    sec.eval(tau, f, df);
    return {tau, 1.0 / df};
}

}  // namespace

ArrowheadSpectrum diagonalize(const DiscretizedHamiltonian& h, unsigned threads) {
    if (h.dim < 2 || h.diagonal.size() != h.dim) throw UsageError("diagonalize: malformed Hamiltonian");
    const std::vector<double> poles(h.diagonal.begin() + 1, h.diagonal.end());
    for (std::size_t i = 1; i < poles.size(); ++i) {
        if (!(poles[i] > poles[i - 1])) throw UsageError("diagonalize: continuum energies must increase strictly");
    }
    const std::size_t n = poles.size();
    const double e0 = h.e0();
    const double w2 = h.coupling * h.coupling;

    ArrowheadSpectrum out;
    out.eigenvalues.resize(n + 1);
    out.dot_weights.resize(n + 1);

    if (w2 == 0.0) {
        // Decoupled: |0> is itself an eigenvector.
        out.eigenvalues.front() = e0;
        out.dot_weights.front() = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            out.eigenvalues[i + 1] = poles[i];
            out.dot_weights[i + 1] = 0.0;
        }
        out.weight_sum = 1.0;
        return out;
    }

    const double reach = h.coupling * std::sqrt(static_cast<double>(n)) * (1.0 + 1e-12) + 1e-300;
    const double lower = std::min(e0, poles.front()) - reach;
    const double upper = std::max(e0, poles.back()) + reach;

    parallel_for(n + 1, resolve_thread_count(threads), [&](std::size_t begin, std::size_t end) {
        std::vector<double> offsets(n);
        for (std::size_t k = begin; k < end; ++k) {
            // Root k lies between poles k-1 and k (outer roots are half-bounded).
            std::size_t origin;
            double lo, hi;
            if (k == 0) {
                origin = 0;
                lo = lower - poles[0];
                hi = 0.0;
            } else if (k == n) {
                origin = n - 1;
                lo = 0.0;
                hi = upper - poles[n - 1];
            } else {
                // Centre on whichever pole the root is closer to.
                const double a = poles[k - 1], b = poles[k];
                for (std::size_t i = 0; i < n; ++i) offsets[i] = poles[i] - a;
                Secular probe{offsets, a - e0, w2};
                double f, df;
                probe.eval(0.5 * (b - a), f, df);
                if (f > 0.0) {
                    origin = k - 1;
                    lo = 0.0;
                    hi = 0.5 * (b - a);
                } else {
                    origin = k;
                    lo = -0.5 * (b - a);
                    hi = 0.0;
                }
            }
            const double p = poles[origin];
            for (std::size_t i = 0; i < n; ++i) offsets[i] = poles[i] - p;
            const Secular sec{offsets, p - e0, w2};
            const auto [tau, weight] = solve_secular(sec, lo, hi);
            out.eigenvalues[k] = p + tau;
            out.dot_weights[k] = weight;
        }
    });
    out.weight_sum = pairwise_sum(out.dot_weights);
    return out;
}

SurvivalCurve wigner_weisskopf_brute(const DiscretizedHamiltonian& h, std::span<const double> times,
                                     unsigned threads) {
    SurvivalCurve curve;
    curve.times.assign(times.begin(), times.end());
    const ArrowheadSpectrum spec = diagonalize(h, threads);
    curve.weight_sum = spec.weight_sum;

    const double gamma = h.decay_rate();
    if (gamma > 0.0) {
        curve.safe_t_max = std::log(kTwoPi / (h.spacing * gamma)) / gamma;
        const double t_max = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
        if (t_max > curve.safe_t_max) {
            std::ostringstream os;
            os << "recurrence bound violated: t_max = " << t_max
               << " exceeds the safe horizon " << curve.safe_t_max << " of the discretized continuum";
            curve.diagnostics.warn(os.str());
        }
    } else {
        curve.safe_t_max = std::numeric_limits<double>::infinity();
    }

    const std::size_t m = spec.eigenvalues.size();
    std::vector<double> sin_terms(m), cos_gap(m);
    const double e0 = h.e0();
    const double S = spec.weight_sum;
    for (double t : times) {
        if (t < 0.0) throw UsageError("wigner_weisskopf_brute: negative time");
        for (std::size_t k = 0; k < m; ++k) {
            const double phase = (spec.eigenvalues[k] - e0) * t;
            const double s = std::sin(0.5 * phase);
            sin_terms[k] = spec.dot_weights[k] * std::sin(phase);
            cos_gap[k] = spec.dot_weights[k] * 2.0 * s * s;  // w (1 - cos phase)
        }
        // A = sum w exp(-i phase) = (S - C) - i Sn
        const double C = pairwise_sum(cos_gap);
        const double Sn = pairwise_sum(sin_terms);
        const double survival = (S - C) * (S - C) + Sn * Sn;
        const double deficit = (1.0 - S * S) + 2.0 * S * C - C * C - Sn * Sn;
        curve.survival.push_back(survival);
        curve.deficit.push_back(deficit);
    }
    return curve;
}

// ---------------------------------------------------------------------------

bool ValidationReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ValidationRow& r) { return r.pass; });
}

ValidationRow compare_series(std::string quantity, std::span<const double> times_a,
                             std::span<const double> a, std::span<const double> times_b,
                             std::span<const double> b, double tolerance, Deviation mode) {
    if (times_a.size() != a.size() || times_b.size() != b.size()) {
        throw UsageError("compare_series: sample and value counts differ");
    }
    if (times_a.size() != times_b.size()) throw UsageError("compare_series: mismatched sample grids");
    for (std::size_t i = 0; i < times_a.size(); ++i) {
        if (std::abs(times_a[i] - times_b[i]) > 1e-12 * std::max(1.0, std::abs(times_a[i]))) {
            throw UsageError("compare_series: mismatched sample grids");
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double dev = std::abs(a[i] - b[i]);
        if (mode == Deviation::relative) dev /= std::abs(b[i]);
        if (!(dev <= worst)) worst = dev;  // NaN propagates as a failure
    }
    ValidationRow row;
    row.quantity = std::move(quantity);
    row.deviation = worst;
    row.tolerance = tolerance;
    row.pass = worst <= tolerance;
    return row;
}

namespace {

bool same_grid(const EnergyGrid& a, const EnergyGrid& b) {
    return a.n_points == b.n_points && a.e0 == b.e0 && a.spacing == b.spacing;
}

ValidationRow make_row(std::string quantity, double deviation, double tolerance, std::string detail = {}) {
    ValidationRow r;
    r.quantity = std::move(quantity);
    r.deviation = deviation;
    r.tolerance = tolerance;
    r.pass = deviation <= tolerance;
    r.detail = std::move(detail);
    return r;
}

}  // namespace

ValidationReport compare_engines(const TracedTrajectory& traced, const CountingTrajectory& counting,
                                 const SurvivalCurve* brute, const ValidationTolerances& tol) {
    if (!same_grid(traced.grid, counting.grid)) throw UsageError("compare_engines: mismatched grids");
    if (traced.empty() || counting.empty()) throw UsageError("compare_engines: empty trajectory");
    const RateSet& r = counting.rates;
    if (traced.rates.gamma != r.gamma || traced.rates.gamma_d != r.gamma_d) {
        throw UsageError("compare_engines: runs use different rates");
    }

    ValidationReport report;
    const auto& times = traced.times;

    std::vector<double> exact(times.size()), counted(counting.times.size());
    for (std::size_t j = 0; j < times.size(); ++j) exact[j] = survival_probability(r.gamma, times[j]);
    report.rows.push_back(compare_series("sigma00_traced_vs_exp", times, traced.sigma_00, times, exact,
                                         tol.oracle, Deviation::relative));
    for (std::size_t j = 0; j < counted.size(); ++j) counted[j] = pairwise_sum(counting.snapshots[j].sigma_00_n);
    report.rows.push_back(compare_series("sigma00_counting_sum_vs_exp", counting.times, counted, times, exact,
                                         tol.oracle, Deviation::relative));

    // Zero-count sector against the amplitude equations.
    std::vector<double> n0(counting.times.size()), b0(counting.times.size());
    for (std::size_t j = 0; j < counting.times.size(); ++j) {
        n0[j] = counting.snapshots[j].sigma_00_n[0];
        b0[j] = std::norm(solve_amplitudes(r, counting.grid, counting.times[j]).b0);
    }
    report.rows.push_back(compare_series("sigma00_n0_vs_amplitude", counting.times, n0, counting.times, b0,
                                         tol.oracle));
    {
        const auto& last = counting.snapshots.back();
        const AmplitudeState amp = solve_amplitudes(r, counting.grid, last.t);
        double worst = 0.0;
        for (std::size_t a = 0; a < last.sector0_aa.size(); ++a) {
            worst = std::max(worst, std::abs(last.sector0_aa[a] - std::norm(amp.b_alpha[a])));
        }
        std::ostringstream os;
        os << "t = " << last.t;
        report.rows.push_back(make_row("sigma_aa_n0_profile_vs_amplitude", worst, tol.oracle, os.str()));
    }

    // Counting engine traced over n against the traced engine, wherever both kept profiles.
    {
        if (counting.times.size() != times.size()) throw UsageError("compare_engines: mismatched sample grids");
        double worst = 0.0;
        std::size_t compared = 0;
        const std::size_t offset = traced.times.size() - traced.states.size();
        for (std::size_t j = 0; j < counting.snapshots.size(); ++j) {
            const TracedState& c = counting.snapshots[j].traced;
            if (c.sigma_aa.empty() || j < offset) continue;
            const TracedState& t = traced.states[j - offset];
            worst = std::max(worst, std::abs(c.sigma_00 - t.sigma_00));
            for (std::size_t a = 0; a < c.sigma_aa.size(); ++a) {
                worst = std::max(worst, std::abs(c.sigma_aa[a] - t.sigma_aa[a]));
                worst = std::max(worst, std::abs(c.sigma_a0[a] - t.sigma_a0[a]));
            }
            ++compared;
        }
        std::ostringstream os;
        os << compared << " sample(s)";
        report.rows.push_back(make_row("trace_over_n_vs_traced", worst, tol.trace, os.str()));
    }

    {
        const Spectrum spec = spectral_distribution(traced);
        const double width = fwhm_extract(spec.energy, spec.density);
        const double expected = r.dephased_width();
        std::ostringstream os;
        os << "fwhm = " << width << ", expected " << expected;
        report.rows.push_back(make_row("fwhm_vs_gamma_plus_gamma_d", std::abs(width - expected) / expected,
                                       tol.fwhm, os.str()));
    }

    if (brute != nullptr) {
        std::vector<double> ww(brute->times.size());
        for (std::size_t j = 0; j < ww.size(); ++j) ww[j] = survival_probability(r.gamma, brute->times[j]);
        auto row = compare_series("brute_force_survival_vs_amplitude", brute->times, brute->survival,
                                  brute->times, ww, tol.brute, Deviation::relative);
        std::ostringstream os;
        os << "weight sum - 1 = " << brute->weight_sum - 1.0;
        row.detail = os.str();
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace zeno
