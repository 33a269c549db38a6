#include "zeno/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "zeno/analytic.hpp"
#include "zeno/errors.hpp"
#include "zeno/parallel.hpp"
#include "zeno/propagator.hpp"

namespace zeno {

namespace {

// Component order inside a level block.
constexpr std::size_t kDot = 0;
constexpr std::size_t kLevel = 1;
constexpr std::size_t kRe = 2;
constexpr std::size_t kIm = 3;

struct LevelGenerator {
    Block4 local{};
    Block4 ladder{};
};

LevelGenerator traced_generator(const RateSet& r, double coupling, double detuning) {
    LevelGenerator g;
    const double kappa = 0.5 * (r.gamma + r.gamma_d);
    at(g.local, kDot, kDot) = -r.gamma;
    at(g.local, kLevel, kIm) = -2.0 * coupling;
    at(g.local, kRe, kRe) = -kappa;
    at(g.local, kRe, kIm) = -detuning;
    at(g.local, kIm, kRe) = detuning;
    at(g.local, kIm, kIm) = -kappa;
    at(g.local, kIm, kDot) = -coupling;
    return g;
}

LevelGenerator counting_generator(const RateSet& r, double coupling, double detuning) {
    LevelGenerator g;
    const double kappa = 0.5 * (r.gamma + r.d + r.d_prime);
    const double coherent_gain = std::sqrt(r.d * r.d_prime);
    at(g.local, kDot, kDot) = -(r.gamma + r.d_prime);
    at(g.local, kLevel, kLevel) = -r.d;
    at(g.local, kLevel, kIm) = -2.0 * coupling;
    at(g.local, kRe, kRe) = -kappa;
    at(g.local, kRe, kIm) = -detuning;
    at(g.local, kIm, kRe) = detuning;
    at(g.local, kIm, kIm) = -kappa;
    at(g.local, kIm, kDot) = -coupling;
    at(g.ladder, kDot, kDot) = r.d_prime;
    at(g.ladder, kLevel, kLevel) = r.d;
    at(g.ladder, kRe, kRe) = coherent_gain;
    at(g.ladder, kIm, kIm) = coherent_gain;
    return g;
}

void validate_run(const RateSet& rates, const EnergyGrid& grid, double t_end, double dt_out) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidParameter("t_end must be positive");
    if (!(dt_out > 0.0) || !std::isfinite(dt_out)) throw InvalidParameter("dt_out must be positive");
    if (grid.n_points < 3 || !(grid.spacing > 0.0)) throw InvalidParameter("invalid energy grid");
    if (rates.gamma < 0.0 || rates.d < 0.0 || rates.d_prime < 0.0 || rates.gamma_d < 0.0) {
        throw InvalidParameter("rates must be non-negative");
    }
}

void warn_truncation(const RateSet& rates, const EnergyGrid& grid, Diagnostics& diag) {
    const double width = rates.dephased_width();
    if (!(width > 0.0)) return;
    const double tail = lorentzian_tail_mass(width, grid.half_width());
    if (tail > 1e-2) {
        std::ostringstream os;
        os << "truncation-unsafe grid: estimated Lorentzian tail mass outside the window is " << tail;
        diag.warn(os.str());
    }
}

std::size_t substeps(double length, double cap) {
    const double m = std::ceil(length / cap - 1e-12);
    return static_cast<std::size_t>(std::max(1.0, m));
}

// Gaps between k * dt_out samples wobble by an ulp; snap them so the propagator cache hits.
double interval_length(const std::vector<double>& times, std::size_t j, double dt_out) {
    const double length = times[j] - times[j - 1];
    return std::abs(length - dt_out) <= 1e-9 * dt_out ? dt_out : length;
}

double step_cap(const RateSet& rates, const EnergyGrid& grid, const SolverSettings& s, double dt_out) {
    double cap = dt_out;
    if (s.integrator == Integrator::exponential) {
        // The propagator is exact for any step; the cap only bounds the ladder degree.
        const double dmax = std::max(rates.d, rates.d_prime);
        if (dmax > 0.0) cap = std::min(cap, 4.0 / dmax);
    } else {
        cap = std::min(cap, 0.1 / std::max(rates.total_rate(), grid.half_width()));
    }
    if (s.dt) {
        if (!(*s.dt > 0.0)) throw InvalidParameter("solver dt must be positive");
        cap = std::min(cap, *s.dt);
    }
    return cap;
}

[[noreturn]] void blowup(double t) {
    std::ostringstream os;
    os << "numerical blow-up: non-finite state at t = " << t;
    throw NumericalError(os.str(), t);
}

bool all_finite(const TracedState& s) {
    if (!std::isfinite(s.sigma_00)) return false;
    for (double v : s.sigma_aa)
        if (!std::isfinite(v)) return false;
    for (const cplx& v : s.sigma_a0)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

// Level-resolved propagators for one traced step of length h.
struct TracedPropagators {
    double h{0.0};
    std::size_t substeps{1};
    double dot_decay{1.0};
    std::vector<Block4> level;
};

TracedPropagators make_traced_propagators(const RateSet& rates, const EnergyGrid& grid,
                                          double coupling, double h, std::size_t m) {
    TracedPropagators p;
    p.h = h;
    p.substeps = m;
    p.dot_decay = std::exp(-rates.gamma * h);
    p.level.resize(grid.n_points);
    double norm = 0.0;
    for (std::size_t a = 0; a < grid.n_points; ++a) {
        norm = std::max(norm, h * max_row_sum(traced_generator(rates, coupling, grid.detuning(a)).local));
    }
    const int s = squarings_for(norm);
    for (std::size_t a = 0; a < grid.n_points; ++a) {
        p.level[a] = block_exponential(traced_generator(rates, coupling, grid.detuning(a)).local, h, s);
    }
    return p;
}

struct CountingPropagators {
    double h{0.0};
    std::size_t substeps{1};
    std::size_t degree{0};
    std::vector<double> dot;                 // closed-form ladder weights q_k
    std::vector<std::vector<Block4>> level;  // F_0..F_degree per level
};

CountingPropagators make_counting_propagators(const RateSet& rates, const EnergyGrid& grid,
                                              double coupling, double h, std::size_t m,
                                              std::size_t n_max, unsigned threads) {
    CountingPropagators p;
    p.h = h;
    p.substeps = m;
    p.degree = std::min(n_max, ladder_degree(std::max(rates.d, rates.d_prime) * h));

    // q_k = exp(-(Gamma + D') h) (D' h)^k / k!
    p.dot.assign(p.degree + 1, 0.0);
    const double loss = (rates.gamma + rates.d_prime) * h;
    if (rates.d_prime > 0.0) {
        const double log_gain = std::log(rates.d_prime * h);
        for (std::size_t k = 0; k <= p.degree; ++k) {
            const double kd = static_cast<double>(k);
            p.dot[k] = std::exp(-loss + kd * log_gain - std::lgamma(kd + 1.0));
        }
    } else {
        p.dot[0] = std::exp(-loss);
    }

    double norm = 0.0;
    for (std::size_t a = 0; a < grid.n_points; ++a) {
        const auto g = counting_generator(rates, coupling, grid.detuning(a));
        norm = std::max(norm, h * (max_row_sum(g.local) + max_row_sum(g.ladder)));
    }
    const int s = squarings_for(norm);
    p.level.resize(grid.n_points);
    parallel_for(grid.n_points, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t a = begin; a < end; ++a) {
            const auto g = counting_generator(rates, coupling, grid.detuning(a));
            p.level[a] = toeplitz_exponential(g.local, g.ladder, h, p.degree, s);
        }
    });
    return p;
}

TracedState make_traced_state(double t, double dot, std::size_t n_levels) {
    TracedState s;
    s.t = t;
    s.sigma_00 = dot;
    s.sigma_aa.assign(n_levels, 0.0);
    s.sigma_a0.assign(n_levels, cplx{});
    return s;
}

}  // namespace

double TracedState::continuum_mass() const { return pairwise_sum(sigma_aa); }

CountResolvedState::CountResolvedState(std::size_t n_max_, std::size_t n_levels_)
    : n_max(n_max_), n_levels(n_levels_), sigma_00_n(n_max_ + 1, 0.0),
      sigma_aa_n((n_max_ + 1) * n_levels_, 0.0), sigma_a0_n((n_max_ + 1) * n_levels_, cplx{}) {}

double CountResolvedState::rung_mass(std::size_t n) const {
    std::vector<double> column(n_levels);
    for (std::size_t a = 0; a < n_levels; ++a) column[a] = aa(n, a);
    return sigma_00_n[n] + pairwise_sum(column);
}

TracedState trace_over_n(const CountResolvedState& s) {
    TracedState out;
    out.t = s.t;
    out.sigma_00 = pairwise_sum(s.sigma_00_n);
    out.sigma_aa.resize(s.n_levels);
    out.sigma_a0.resize(s.n_levels);
    std::vector<double> re(s.rungs()), im(s.rungs());
    for (std::size_t a = 0; a < s.n_levels; ++a) {
        const std::size_t base = s.index(0, a);
        out.sigma_aa[a] = pairwise_sum(std::span<const double>(s.sigma_aa_n).subspan(base, s.rungs()));
        for (std::size_t n = 0; n < s.rungs(); ++n) {
            re[n] = s.sigma_a0_n[base + n].real();
            im[n] = s.sigma_a0_n[base + n].imag();
        }
        out.sigma_a0[a] = {pairwise_sum(re), pairwise_sum(im)};
    }
    return out;
}

const char* to_string(Integrator integrator) noexcept {
    return integrator == Integrator::exponential ? "exponential" : "rk4";
}

Integrator integrator_from_string(const std::string& name) {
    if (name == "exponential") return Integrator::exponential;
    if (name == "rk4") return Integrator::rk4;
    throw InvalidParameter("unknown integrator '" + name + "' (expected exponential or rk4)");
}

std::size_t auto_ladder_depth(const RateSet& rates, double t_end) {
    const double mean = std::max(rates.d, rates.d_prime) * t_end;
    return static_cast<std::size_t>(std::ceil(mean + 10.0 * std::sqrt(mean))) + 10;
}

double resolved_step(const RateSet& rates, const EnergyGrid& grid, const SolverSettings& s,
                     double dt_out) {
    const double cap = step_cap(rates, grid, s, dt_out);
    return dt_out / static_cast<double>(substeps(dt_out, cap));
}

std::vector<double> sample_times(double t_end, double dt_out) {
    if (!(t_end > 0.0) || !(dt_out > 0.0)) throw InvalidParameter("t_end and dt_out must be positive");
    const auto full = static_cast<std::size_t>(std::floor(t_end / dt_out + 1e-9));
    std::vector<double> times;
    times.reserve(full + 2);
    for (std::size_t k = 0; k <= full; ++k) times.push_back(static_cast<double>(k) * dt_out);
    if (std::abs(times.back() - t_end) <= 1e-9 * t_end) {
        times.back() = t_end;
    } else if (times.back() < t_end) {
        times.push_back(t_end);
    }
    return times;
}

// ---------------------------------------------------------------------------
// Traced engine

TracedTrajectory evolve_traced(const RateSet& rates, const EnergyGrid& grid, double t_end,
                               double dt_out, const SolverSettings& settings) {
    validate_run(rates, grid, t_end, dt_out);
    TracedTrajectory traj;
    traj.rates = rates;
    traj.grid = grid;
    traj.settings = settings;
    traj.times = sample_times(t_end, dt_out);
    warn_truncation(rates, grid, traj.diagnostics);

    const unsigned threads = resolve_thread_count(settings.threads);
    const std::size_t levels = grid.n_points;
    const double coupling = grid_coupling(rates.gamma, grid);
    const double cap = step_cap(rates, grid, settings, dt_out);
    const bool keep_all = settings.profiles == ProfileStorage::every_sample;

    double dot = 1.0;
    std::vector<double> level(levels, 0.0), re(levels, 0.0), im(levels, 0.0);

    auto record = [&](double t, bool full) {
        TracedState s = make_traced_state(t, dot, full ? levels : 0);
        if (full) {
            s.sigma_aa = level;
            for (std::size_t a = 0; a < levels; ++a) s.sigma_a0[a] = {re[a], im[a]};
        }
        const double mass = pairwise_sum(level);
        if (!std::isfinite(mass) || !all_finite(s)) blowup(t);
        traj.sigma_00.push_back(dot);
        traj.continuum_mass.push_back(mass);
        if (full) traj.states.push_back(std::move(s));
    };
    record(0.0, keep_all || traj.times.size() == 1);

    std::optional<TracedPropagators> cached;
    for (std::size_t j = 1; j < traj.times.size(); ++j) {
        const double length = interval_length(traj.times, j, dt_out);
        const std::size_t m = substeps(length, cap);
        const double h = length / static_cast<double>(m);
        if (j == 1) traj.step = h;

        std::vector<double> dot_before(m);
        if (settings.integrator == Integrator::exponential) {
            if (!cached || cached->h != h || cached->substeps != m) {
                cached = make_traced_propagators(rates, grid, coupling, h, m);
            }
            const TracedPropagators& prop = *cached;
            for (std::size_t k = 0; k < m; ++k) {
                dot_before[k] = dot;
                dot *= prop.dot_decay;
            }
            parallel_for(levels, threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t a = begin; a < end; ++a) {
                    const Block4& P = prop.level[a];
                    double v1 = level[a], v2 = re[a], v3 = im[a];
                    for (std::size_t k = 0; k < m; ++k) {
                        const double v0 = dot_before[k];
                        const double n1 = at(P, 1, 0) * v0 + at(P, 1, 1) * v1 + at(P, 1, 2) * v2 + at(P, 1, 3) * v3;
                        const double n2 = at(P, 2, 0) * v0 + at(P, 2, 1) * v1 + at(P, 2, 2) * v2 + at(P, 2, 3) * v3;
                        const double n3 = at(P, 3, 0) * v0 + at(P, 3, 1) * v1 + at(P, 3, 2) * v2 + at(P, 3, 3) * v3;
                        v1 = n1;
                        v2 = n2;
                        v3 = n3;
                    }
                    level[a] = v1;
                    re[a] = v2;
                    im[a] = v3;
                }
            });
        } else {
            // Classical RK4; the dot population is integrated once and its
            // stage values are shared by every level.
            const double g = rates.gamma;
            const double kappa = 0.5 * (rates.gamma + rates.gamma_d);
            std::vector<std::array<double, 4>> stage(m);
            for (std::size_t k = 0; k < m; ++k) {
                const double s1 = dot;
                const double k1 = -g * s1;
                const double s2 = dot + 0.5 * h * k1;
                const double k2 = -g * s2;
                const double s3 = dot + 0.5 * h * k2;
                const double k3 = -g * s3;
                const double s4 = dot + h * k3;
                const double k4 = -g * s4;
                stage[k] = {s1, s2, s3, s4};
                dot += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            parallel_for(levels, threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t a = begin; a < end; ++a) {
                    const double det = grid.detuning(a);
                    auto rhs = [&](double s00, const std::array<double, 3>& v) {
                        return std::array<double, 3>{-2.0 * coupling * v[2],
                                                     -kappa * v[1] - det * v[2],
                                                     det * v[1] - kappa * v[2] - coupling * s00};
                    };
                    std::array<double, 3> v{level[a], re[a], im[a]};
                    for (std::size_t k = 0; k < m; ++k) {
                        const auto& st = stage[k];
                        const auto k1 = rhs(st[0], v);
                        std::array<double, 3> y;
                        for (int i = 0; i < 3; ++i) y[i] = v[i] + 0.5 * h * k1[i];
                        const auto k2 = rhs(st[1], y);
                        for (int i = 0; i < 3; ++i) y[i] = v[i] + 0.5 * h * k2[i];
                        const auto k3 = rhs(st[2], y);
                        for (int i = 0; i < 3; ++i) y[i] = v[i] + h * k3[i];
                        const auto k4 = rhs(st[3], y);
                        for (int i = 0; i < 3; ++i) v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    }
                    level[a] = v[0];
                    re[a] = v[1];
                    im[a] = v[2];
                }
            });
        }
        const bool last = j + 1 == traj.times.size();
        record(traj.times[j], keep_all || last);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Count-resolved engine

CountingTrajectory evolve_counting(const RateSet& rates, const EnergyGrid& grid, double t_end,
                                   double dt_out, const SolverSettings& settings) {
    validate_run(rates, grid, t_end, dt_out);
    CountingTrajectory traj;
    traj.rates = rates;
    traj.grid = grid;
    traj.settings = settings;
    traj.times = sample_times(t_end, dt_out);
    traj.n_max = settings.n_max ? *settings.n_max : auto_ladder_depth(rates, t_end);
    if (traj.n_max < 1) throw InvalidParameter("n_max must be at least 1");
    traj.settings.n_max = traj.n_max;
    warn_truncation(rates, grid, traj.diagnostics);

    const unsigned threads = resolve_thread_count(settings.threads);
    const std::size_t levels = grid.n_points;
    const std::size_t rungs = traj.n_max + 1;
    const double coupling = grid_coupling(rates.gamma, grid);
    const double cap = step_cap(rates, grid, settings, dt_out);
    const bool keep_all = settings.profiles == ProfileStorage::every_sample;

    CountResolvedState state(traj.n_max, levels);
    state.sigma_00_n[0] = 1.0;
    // Rungs above `support` are exactly zero.
    std::size_t support = 0;

    auto record = [&](double t, bool full) {
        state.t = t;
        CountingSnapshot snap;
        snap.t = t;
        snap.sigma_00_n = state.sigma_00_n;
        snap.p_n.resize(rungs);
        for (std::size_t n = 0; n < rungs; ++n) snap.p_n[n] = state.rung_mass(n);
        if (full) {
            snap.traced = trace_over_n(state);
            snap.sector0_aa.resize(levels);
            snap.sector0_a0.resize(levels);
            for (std::size_t a = 0; a < levels; ++a) {
                snap.sector0_aa[a] = state.aa(0, a);
                snap.sector0_a0[a] = state.a0(0, a);
            }
            if (!all_finite(snap.traced)) blowup(t);
        } else {
            snap.traced.t = t;
            snap.traced.sigma_00 = pairwise_sum(state.sigma_00_n);
        }
        for (double v : snap.p_n)
            if (!std::isfinite(v)) blowup(t);
        traj.snapshots.push_back(std::move(snap));
    };
    record(0.0, keep_all || traj.times.size() == 1);

    std::optional<CountingPropagators> cached;
    std::vector<double> ladder_next(rungs);
    for (std::size_t j = 1; j < traj.times.size(); ++j) {
        const double length = interval_length(traj.times, j, dt_out);
        const std::size_t m = substeps(length, cap);
        const double h = length / static_cast<double>(m);
        if (j == 1) traj.step = h;

        // Dot-occupied ladder at the start of every substep, and the support bound.
        std::vector<std::vector<double>> dot_before(m);
        std::vector<std::size_t> support_before(m);

        if (settings.integrator == Integrator::exponential) {
            if (!cached || cached->h != h || cached->substeps != m) {
                cached = make_counting_propagators(rates, grid, coupling, h, m, traj.n_max, threads);
            }
            const CountingPropagators& prop = *cached;
            const std::size_t K = prop.degree;
            for (std::size_t k = 0; k < m; ++k) {
                dot_before[k] = state.sigma_00_n;
                support_before[k] = support;
                const std::size_t hi = std::min(traj.n_max, support + K);
                std::fill(ladder_next.begin(), ladder_next.end(), 0.0);
                for (std::size_t n = 0; n <= hi; ++n) {
                    double acc = 0.0;
                    const std::size_t kmax = std::min(n, K);
                    for (std::size_t q = 0; q <= kmax; ++q) acc += prop.dot[q] * state.sigma_00_n[n - q];
                    ladder_next[n] = acc;
                }
                state.sigma_00_n = ladder_next;
                support = hi;
            }
            parallel_for(levels, threads, [&](std::size_t begin, std::size_t end) {
                std::vector<std::array<double, 3>> cur(rungs), nxt(rungs);
                for (std::size_t a = begin; a < end; ++a) {
                    const auto& F = prop.level[a];
                    const std::size_t base = state.index(0, a);
                    for (std::size_t n = 0; n < rungs; ++n) {
                        const cplx c = state.sigma_a0_n[base + n];
                        cur[n] = {state.sigma_aa_n[base + n], c.real(), c.imag()};
                    }
                    for (std::size_t k = 0; k < m; ++k) {
                        const auto& dot = dot_before[k];
                        const std::size_t hi = std::min(traj.n_max, support_before[k] + K);
                        for (std::size_t n = 0; n <= hi; ++n) {
                            double s1 = 0.0, s2 = 0.0, s3 = 0.0;
                            const std::size_t kmax = std::min(n, K);
                            for (std::size_t q = 0; q <= kmax; ++q) {
                                const Block4& B = F[q];
                                const double v0 = dot[n - q];
                                const auto& v = cur[n - q];
                                s1 += B[4] * v0 + B[5] * v[0] + B[6] * v[1] + B[7] * v[2];
                                s2 += B[8] * v0 + B[9] * v[0] + B[10] * v[1] + B[11] * v[2];
                                s3 += B[12] * v0 + B[13] * v[0] + B[14] * v[1] + B[15] * v[2];
                            }
                            nxt[n] = {s1, s2, s3};
                        }
                        for (std::size_t n = 0; n <= hi; ++n) cur[n] = nxt[n];
                    }
                    for (std::size_t n = 0; n < rungs; ++n) {
                        state.sigma_aa_n[base + n] = cur[n][0];
                        state.sigma_a0_n[base + n] = {cur[n][1], cur[n][2]};
                    }
                }
            });
        } else {
            const double g = rates.gamma, d = rates.d, dp = rates.d_prime;
            const double kappa = 0.5 * (g + d + dp);
            const double gain = std::sqrt(d * dp);
            // Four RK stages of the dot ladder per substep.
            std::vector<std::array<std::vector<double>, 4>> stages(m);
            auto ladder_rhs = [&](const std::vector<double>& s) {
                std::vector<double> out(rungs);
                for (std::size_t n = 0; n < rungs; ++n)
                    out[n] = -(g + dp) * s[n] + (n > 0 ? dp * s[n - 1] : 0.0);
                return out;
            };
            for (std::size_t k = 0; k < m; ++k) {
                auto& st = stages[k];
                const auto& y = state.sigma_00_n;
                st[0] = y;
                const auto k1 = ladder_rhs(st[0]);
                st[1].resize(rungs);
                for (std::size_t n = 0; n < rungs; ++n) st[1][n] = y[n] + 0.5 * h * k1[n];
                const auto k2 = ladder_rhs(st[1]);
                st[2].resize(rungs);
                for (std::size_t n = 0; n < rungs; ++n) st[2][n] = y[n] + 0.5 * h * k2[n];
                const auto k3 = ladder_rhs(st[2]);
                st[3].resize(rungs);
                for (std::size_t n = 0; n < rungs; ++n) st[3][n] = y[n] + h * k3[n];
                const auto k4 = ladder_rhs(st[3]);
                for (std::size_t n = 0; n < rungs; ++n)
                    ladder_next[n] = y[n] + h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
                state.sigma_00_n = ladder_next;
            }
            parallel_for(levels, threads, [&](std::size_t begin, std::size_t end) {
                using Chain = std::vector<std::array<double, 3>>;
                Chain v(rungs), y(rungs), k1(rungs), k2(rungs), k3(rungs), k4(rungs);
                for (std::size_t a = begin; a < end; ++a) {
                    const double det = grid.detuning(a);
                    auto rhs = [&](const std::vector<double>& s00, const Chain& x, Chain& out) {
                        for (std::size_t n = 0; n < rungs; ++n) {
                            const auto& c = x[n];
                            out[n] = {-d * c[0] - 2.0 * coupling * c[2],
                                      -kappa * c[1] - det * c[2],
                                      det * c[1] - kappa * c[2] - coupling * s00[n]};
                            if (n > 0) {
                                out[n][0] += d * x[n - 1][0];
                                out[n][1] += gain * x[n - 1][1];
                                out[n][2] += gain * x[n - 1][2];
                            }
                        }
                    };
                    const std::size_t base = state.index(0, a);
                    for (std::size_t n = 0; n < rungs; ++n) {
                        const cplx c = state.sigma_a0_n[base + n];
                        v[n] = {state.sigma_aa_n[base + n], c.real(), c.imag()};
                    }
                    for (std::size_t k = 0; k < m; ++k) {
                        const auto& st = stages[k];
                        rhs(st[0], v, k1);
                        for (std::size_t n = 0; n < rungs; ++n)
                            for (int i = 0; i < 3; ++i) y[n][i] = v[n][i] + 0.5 * h * k1[n][i];
                        rhs(st[1], y, k2);
                        for (std::size_t n = 0; n < rungs; ++n)
                            for (int i = 0; i < 3; ++i) y[n][i] = v[n][i] + 0.5 * h * k2[n][i];
                        rhs(st[2], y, k3);
                        for (std::size_t n = 0; n < rungs; ++n)
                            for (int i = 0; i < 3; ++i) y[n][i] = v[n][i] + h * k3[n][i];
                        rhs(st[3], y, k4);
                        for (std::size_t n = 0; n < rungs; ++n)
                            for (int i = 0; i < 3; ++i)
                                v[n][i] += h / 6.0 * (k1[n][i] + 2.0 * k2[n][i] + 2.0 * k3[n][i] + k4[n][i]);
                    }
                    for (std::size_t n = 0; n < rungs; ++n) {
                        state.sigma_aa_n[base + n] = v[n][0];
                        state.sigma_a0_n[base + n] = {v[n][1], v[n][2]};
                    }
                }
            });
            support = traj.n_max;
        }
        const bool last = j + 1 == traj.times.size();
        record(traj.times[j], keep_all || last);
    }

    state.t = traj.times.back();
    traj.ladder_top_mass = state.rung_mass(traj.n_max);
    traj.final_state = std::move(state);
    if (traj.ladder_top_mass >= kLadderLeakLimit) {
        std::ostringstream os;
        os << "count ladder truncation unsafe: mass " << traj.ladder_top_mass << " on rung n_max = "
           << traj.n_max << " (limit " << kLadderLeakLimit << ")";
        throw NumericalError(os.str(), traj.times.back());
    }
    return traj;
}

// ---------------------------------------------------------------------------

namespace {

Spectrum spectrum_from(const TracedState& s, const EnergyGrid& grid, double gamma, double t_end,
                       Diagnostics* diag) {
    if (s.sigma_aa.size() != grid.n_points) throw UsageError("spectral_distribution: final profile missing");
    Spectrum out;
    out.residual_sigma_00 = s.sigma_00;
    if (diag != nullptr && gamma * t_end < 20.0) {
        std::ostringstream os;
        os << "asymptote not reached: t_end = " << t_end << " < 20/Gamma, residual sigma_00 = " << s.sigma_00;
        diag->warn(os.str());
    }
    out.energy.resize(grid.n_points);
    out.density.resize(grid.n_points);
    for (std::size_t a = 0; a < grid.n_points; ++a) {
        out.energy[a] = grid.energy(a);
        out.density[a] = s.sigma_aa[a] / grid.spacing;
    }
    return out;
}

}  // namespace

Spectrum spectral_distribution(const TracedTrajectory& traj, Diagnostics* diag) {
    if (traj.empty() || traj.states.empty()) throw UsageError("spectral_distribution: empty trajectory");
    return spectrum_from(traj.final_state(), traj.grid, traj.rates.gamma, traj.times.back(), diag);
}

Spectrum spectral_distribution(const CountingTrajectory& traj, Diagnostics* diag) {
    if (traj.empty() || traj.snapshots.empty()) throw UsageError("spectral_distribution: empty trajectory");
    return spectrum_from(traj.snapshots.back().traced, traj.grid, traj.rates.gamma, traj.times.back(), diag);
}

}  // namespace zeno
