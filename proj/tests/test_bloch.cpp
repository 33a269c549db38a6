#include <doctest.h>

#include <cmath>
#include <cstring>

#include "support.hpp"
#include "zeno/analytic.hpp"
#include "zeno/bloch.hpp"
#include "zeno/errors.hpp"

using namespace zeno;

namespace {

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double max_profile_gap(const TracedState& a, const TracedState& b) {
    double worst = std::abs(a.sigma_00 - b.sigma_00);
    for (std::size_t i = 0; i < a.sigma_aa.size(); ++i) {
        worst = std::max(worst, std::abs(a.sigma_aa[i] - b.sigma_aa[i]));
        worst = std::max(worst, std::abs(a.sigma_a0[i] - b.sigma_a0[i]));
    }
    return worst;
}

}  // namespace

TEST_CASE("sample times") {
    const auto t = sample_times(1.0, 0.25);
    REQUIRE(t.size() == 5);
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 1.0);
    const auto odd = sample_times(1.0, 0.3);
    CHECK(odd.size() == 5);
    CHECK(odd.back() == 1.0);
    CHECK_THROWS_AS(sample_times(0.0, 0.1), InvalidParameter);
}

TEST_CASE("auto ladder depth") {
    const RateSet r = rates_from_direct(1.0, 2.0, 0.5);
    // D_max t = 20: ceil(20 + 10 sqrt(20)) + 10
    CHECK(auto_ladder_depth(r, 10.0) == static_cast<std::size_t>(std::ceil(20.0 + 10.0 * std::sqrt(20.0))) + 10);
}

TEST_CASE("traced decay is exponential with or without a detector") {
    const EnergyGrid g = build_energy_grid(0.0, 10.0, 201);
    const auto free = evolve_traced(rates_from_direct(1.0, 0.0, 0.0), g, 5.0, 0.1);
    const auto watched = evolve_traced(rates_from_direct(1.0, 4.0, 2.0), g, 5.0, 0.1);
    CHECK(bit_equal(free.sigma_00, watched.sigma_00));
    for (std::size_t j = 0; j < free.times.size(); ++j) {
        const double e = std::exp(-free.times[j]);
        CHECK(std::abs(free.sigma_00[j] - e) <= 1e-12 * e);
    }
}

TEST_CASE("traced coherences match the closed form") {
    const RateSet r = rates_from_direct(1.0, 2.0, 0.5);
    const EnergyGrid g = build_energy_grid(0.3, 15.0, 301);
    const auto traj = evolve_traced(r, g, 4.0, 0.5);
    const double w = grid_coupling(1.0, g);
    for (const auto& s : traj.states) {
        for (std::size_t a = 0; a < g.n_points; ++a) {
            const auto exact = offdiag_closed_form(1.0, r.gamma_d, w, g.detuning(a), s.t);
            CHECK(std::abs(s.sigma_a0[a] - exact) < 1e-12);
        }
    }
}

TEST_CASE("continuum fills the window up to the Lorentzian tail") {
    const EnergyGrid g = build_energy_grid(0.0, 25.0, 5001);
    SolverSettings s;
    s.profiles = ProfileStorage::final_only;
    const auto traj = evolve_traced(rates_from_direct(1.0, 0.0, 0.0), g, 20.0, 0.5, s);
    // Grid sum of the asymptotic Lorentzian over the same window.
    const double asymptote = 0.9872718469198548;
    CHECK(traj.final_state().continuum_mass() == doctest::Approx(asymptote).epsilon(1e-4));
    CHECK(std::abs(traj.final_state().continuum_mass() - asymptote) < 1e-4);
    CHECK_FALSE(traj.diagnostics.empty());  // 1.27% tail outside the window
}

TEST_CASE("wide windows raise no truncation warning") {
    const EnergyGrid g = build_energy_grid(0.0, 100.0, 2001);
    const auto traj = evolve_traced(rates_from_direct(0.01, 0.0, 0.0), g, 1.0, 0.5);
    CHECK(traj.diagnostics.empty());
}

TEST_CASE("exponential and RK4 integrators agree") {
    const RateSet r = rates_from_direct(1.0, 2.0, 0.5);
    const EnergyGrid g = build_energy_grid(0.0, 8.0, 81);
    SolverSettings rk;
    rk.integrator = Integrator::rk4;
    rk.dt = 0.002;
    const auto a = evolve_traced(r, g, 3.0, 0.1);
    const auto b = evolve_traced(r, g, 3.0, 0.1, rk);
    CHECK(max_profile_gap(a.final_state(), b.final_state()) < 1e-8);

    const auto ca = evolve_counting(r, g, 3.0, 0.1);
    const auto cb = evolve_counting(r, g, 3.0, 0.1, rk);
    double worst = 0.0;
    for (std::size_t i = 0; i < ca.final_state.sigma_aa_n.size(); ++i) {
        worst = std::max(worst, std::abs(ca.final_state.sigma_aa_n[i] - cb.final_state.sigma_aa_n[i]));
        worst = std::max(worst, std::abs(ca.final_state.sigma_a0_n[i] - cb.final_state.sigma_a0_n[i]));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("count-resolved dot ladder is a Poisson process thinned by decay") {
    const RateSet r = rates_from_direct(1.0, 2.0, 0.5);
    const EnergyGrid g = build_energy_grid(0.0, 5.0, 51);
    const auto traj = evolve_counting(r, g, 2.0, 0.5);
    const auto& s = traj.final_state;
    CHECK(s.sigma_00_n[0] == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));
    CHECK(s.sigma_00_n[1] == doctest::Approx(0.0497870683678639).epsilon(1e-12));  // e^-3 (D' t)^1
    CHECK(s.sigma_00_n[2] == doctest::Approx(std::exp(-3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("tracing the count ladder recovers the traced engine") {
    const RateSet r = rates_from_direct(1.0, 2.0, 0.5);
    const EnergyGrid g = build_energy_grid(0.0, 10.0, 101);
    const auto traced = evolve_traced(r, g, 5.0, 0.25);
    const auto counting = evolve_counting(r, g, 5.0, 0.25);
    REQUIRE(traced.states.size() == counting.snapshots.size());
    for (std::size_t j = 0; j < traced.states.size(); ++j) {
        CHECK(max_profile_gap(counting.snapshots[j].traced, traced.states[j]) < 1e-10);
    }
    CHECK(max_profile_gap(trace_over_n(counting.final_state), traced.final_state()) < 1e-10);
}

TEST_CASE("reduced snapshots keep only the final profile when asked") {
    const RateSet r = rates_from_direct(1.0, 1.0, 0.5);
    const EnergyGrid g = build_energy_grid(0.0, 5.0, 51);
    SolverSettings s;
    s.profiles = ProfileStorage::final_only;
    const auto traced = evolve_traced(r, g, 1.0, 0.25, s);
    CHECK(traced.states.size() == 1);
    CHECK(traced.sigma_00.size() == 5);
    const auto counting = evolve_counting(r, g, 1.0, 0.25, s);
    CHECK(counting.snapshots.size() == 5);
    CHECK(counting.snapshots.back().traced.sigma_aa.size() == 51);
}

TEST_CASE("a shallow count ladder is rejected") {
    const RateSet r = rates_from_direct(1.0, 4.0, 2.0);
    const EnergyGrid g = build_energy_grid(0.0, 5.0, 51);
    SolverSettings s;
    s.n_max = 3;
    CHECK_THROWS_AS(evolve_counting(r, g, 5.0, 0.5, s), NumericalError);
}

TEST_CASE("invalid run parameters") {
    const EnergyGrid g = build_energy_grid(0.0, 5.0, 51);
    CHECK_THROWS(evolve_traced(rates_from_direct(1.0, 0.0, 0.0), g, 0.0, 0.1));
    CHECK_THROWS(evolve_traced(rates_from_direct(1.0, 0.0, 0.0), g, 1.0, -0.1));
}

TEST_CASE("spectrum warns before the asymptote") {
    const EnergyGrid g = build_energy_grid(0.0, 10.0, 201);
    const auto traj = evolve_traced(rates_from_direct(1.0, 0.0, 0.0), g, 5.0, 0.5);
    Diagnostics d;
    const Spectrum spec = spectral_distribution(traj, &d);
    CHECK_FALSE(d.empty());
    CHECK(spec.residual_sigma_00 == doctest::Approx(std::exp(-5.0)));
    CHECK(spec.density[100] == doctest::Approx(traj.final_state().sigma_aa[100] / g.spacing));
}

TEST_CASE("results do not depend on the thread count") {
    const RateSet r = rates_from_direct(1.0, 2.0, 0.5);
    const EnergyGrid g = build_energy_grid(0.0, 10.0, 201);
    SolverSettings one, many;
    one.threads = 1;
    many.threads = 5;
    const auto a = evolve_counting(r, g, 2.0, 0.5, one);
    const auto b = evolve_counting(r, g, 2.0, 0.5, many);
    CHECK(bit_equal(a.final_state.sigma_aa_n, b.final_state.sigma_aa_n));
    for (std::size_t j = 0; j < a.snapshots.size(); ++j) CHECK(bit_equal(a.snapshots[j].p_n, b.snapshots[j].p_n));
    const auto ta = evolve_traced(r, g, 2.0, 0.5, one);
    const auto tb = evolve_traced(r, g, 2.0, 0.5, many);
    CHECK(bit_equal(ta.continuum_mass, tb.continuum_mass));
}

TEST_CASE("property: reduced density matrix stays physical") {
    testing::Gen gen(31);
    for (int k = 0; k < 12; ++k) {
        const double gamma = gen.uniform(0.3, 2.0);
        const RateSet r = rates_from_direct(gamma, gen.uniform(0.0, 3.0), gen.uniform(0.0, 3.0));
        const EnergyGrid g = build_energy_grid(gen.uniform(-1, 1), gen.uniform(2.0, 12.0), gen.odd(11, 151));
        const auto traj = evolve_traced(r, g, gen.uniform(0.5, 6.0), 0.25);
        for (const auto& s : traj.states) {
            CHECK(s.sigma_00 >= 0.0);
            CHECK(s.sigma_00 <= 1.0);
            CHECK(s.total_mass() <= 1.0 + kPopulationTolerance);
            for (std::size_t a = 0; a < s.sigma_aa.size(); ++a) {
                CHECK(s.sigma_aa[a] >= -kPopulationTolerance);
                CHECK(std::norm(s.sigma_a0[a]) <= s.sigma_00 * s.sigma_aa[a] + kPopulationTolerance);
            }
        }
    }
}

TEST_CASE("property: line profile is even about the dot level") {
    testing::Gen gen(32);
    for (int k = 0; k < 8; ++k) {
        const RateSet r = rates_from_direct(1.0, gen.uniform(0.0, 3.0), gen.uniform(0.0, 3.0));
        const EnergyGrid g = build_energy_grid(gen.uniform(-2, 2), 6.0, gen.odd(21, 121));
        const auto traj = evolve_traced(r, g, 3.0, 0.5);
        const auto& s = traj.final_state();
        for (std::size_t a = 0; a < g.n_points; ++a) {
            const std::size_t m = g.n_points - 1 - a;
            CHECK(s.sigma_aa[a] == doctest::Approx(s.sigma_aa[m]).epsilon(1e-12));
            CHECK(s.sigma_a0[a].imag() == doctest::Approx(s.sigma_a0[m].imag()).epsilon(1e-12));
            CHECK(s.sigma_a0[a].real() == doctest::Approx(-s.sigma_a0[m].real()).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: count ladder conserves the traced mass") {
    testing::Gen gen(33);
    for (int k = 0; k < 6; ++k) {
        const RateSet r = rates_from_direct(1.0, gen.uniform(0.0, 3.0), gen.uniform(0.0, 3.0));
        const EnergyGrid g = build_energy_grid(0.0, 6.0, gen.odd(11, 61));
        const auto c = evolve_counting(r, g, 2.0, 0.5);
        for (const auto& snap : c.snapshots) {
            double total = 0.0;
            for (double p : snap.p_n) total += p;
            CHECK(total == doctest::Approx(snap.traced.total_mass()).epsilon(1e-12));
            for (double p : snap.p_n) CHECK(p >= -kPopulationTolerance);
        }
    }
}
