#include <doctest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "zeno/analytic.hpp"
#include "zeno/counting.hpp"
#include "zeno/errors.hpp"

using namespace zeno;

namespace {

struct Sampled {
    std::vector<double> e, rho;
};

Sampled sample_lorentzian(double width, double spacing, double half_window, double center = 0.0) {
    RateSet r = rates_from_direct(width, 0.0, 0.0);
    const LorentzianSpec spec = make_lorentzian(r, width * spacing / kTwoPi, center);
    Sampled s;
    const auto n = static_cast<long>(std::llround(half_window / spacing));
    for (long k = -n; k <= n; ++k) {
        const double e = center + static_cast<double>(k) * spacing;
        s.e.push_back(e);
        s.rho.push_back(lorentzian_density(spec, 1.0 / spacing, e));
    }
    return s;
}

}  // namespace

TEST_CASE("count distribution starts at zero counts") {
    const auto c = evolve_counting(rates_from_direct(1.0, 2.0, 0.5), build_energy_grid(0.0, 5.0, 51), 1.0, 0.5);
    const CountDistribution d0 = pn_distribution(c.snapshots.front());
    CHECK(d0.t == 0.0);
    CHECK(d0.p_n[0] == 1.0);
    for (std::size_t n = 1; n < d0.p_n.size(); ++n) CHECK(d0.p_n[n] == 0.0);
    CHECK(d0.mean() == 0.0);
}

TEST_CASE("equal detector rates give Poisson counts independent of the decay") {
    const auto c = evolve_counting(rates_from_direct(1.0, 2.0, 2.0), build_energy_grid(0.0, 10.0, 101), 1.0, 0.5);
    const CountDistribution d = pn_distribution(c.final_state);
    CHECK(d.total() == doctest::Approx(c.snapshots.back().traced.total_mass()).epsilon(1e-12));
    CHECK(d.p_n[2] / d.total() == doctest::Approx(0.270670566473225).epsilon(1e-9));
    CHECK(kolmogorov_distance_poisson(d, 2.0, true) < 1e-9);
}

TEST_CASE("Poisson distance is zero for an exact Poisson and large for a shifted one") {
    CountDistribution d;
    d.t = 1.0;
    for (int n = 0; n < 40; ++n) d.p_n.push_back(std::exp(-3.0 + n * std::log(3.0) - std::lgamma(n + 1.0)));
    CHECK(kolmogorov_distance_poisson(d, 3.0, false) < 1e-14);
    CHECK(kolmogorov_distance_poisson(d, 4.0, false) > 0.05);
    for (double& p : d.p_n) p *= 0.5;
    CHECK(kolmogorov_distance_poisson(d, 3.0, true) < 1e-14);
    CHECK(kolmogorov_distance_poisson(d, 3.0, false) > 0.4);
}

TEST_CASE("current runs from D' to D") {
    const RateSet r = rates_from_direct(1.0, 2.0, 0.5);
    const EnergyGrid g = build_energy_grid(0.0, 200.0, 4001);
    SolverSettings s;
    s.profiles = ProfileStorage::final_only;
    const double ln2 = std::log(2.0);
    const auto traced = evolve_traced(r, g, 20.0 * ln2, ln2, s);
    const auto cur = mean_current(traced);
    CHECK(cur.front().current == 0.5);
    CHECK(cur.front().mean_n == 0.0);
    // sigma00 = 1/2 at t = ln 2. Before the line narrows the finite window
    // misses about 2 Gamma / (pi hw) of the continuum, costing D times that.
    const double missing = 2.0 * r.d * 2.0 / (kPi * g.half_width());
    CHECK(std::abs(cur[1].current - 1.25) < missing);
    CHECK(cur[1].current < 1.25);
    CHECK(cur.back().current == doctest::Approx(2.0).epsilon(4e-3));
}

TEST_CASE("count-resolved current matches the slope of the mean count") {
    const RateSet r = rates_from_direct(1.0, 2.0, 0.5);
    const EnergyGrid g = build_energy_grid(0.0, 200.0, 4001);
    SolverSettings s;
    s.profiles = ProfileStorage::final_only;
    const auto c = evolve_counting(r, g, 4.0, 0.05, s);
    const auto cur = mean_current(c);
    for (std::size_t j = 1; j + 1 < cur.size(); ++j) {
        const double slope = (cur[j + 1].mean_n - cur[j - 1].mean_n) / (cur[j + 1].t - cur[j - 1].t);
        CHECK(slope == doctest::Approx(cur[j].current).epsilon(2e-3));
    }
    // Traced and count-resolved current coincide.
    const auto tcur = mean_current(evolve_traced(r, g, 4.0, 0.05, s));
    for (std::size_t j = 0; j < cur.size(); ++j) CHECK(tcur[j].current == doctest::Approx(cur[j].current).epsilon(1e-10));
}

TEST_CASE("long-time count rate approaches D") {
    const RateSet r = rates_from_direct(1.0, 2.0, 0.5);
    const EnergyGrid g = build_energy_grid(0.0, 300.0, 4001);
    SolverSettings s;
    s.profiles = ProfileStorage::final_only;
    const auto c = evolve_counting(r, g, 20.0, 0.5, s);
    std::vector<double> t, n;
    for (const auto& snap : c.snapshots) {
        if (snap.t < 10.0 - 1e-9) continue;
        t.push_back(snap.t);
        n.push_back(pn_distribution(snap).mean());
    }
    CHECK(fit_line(t, n).slope == doctest::Approx(2.0).epsilon(5e-3));
}

TEST_CASE("FWHM of a sampled Lorentzian") {
    const Sampled s = sample_lorentzian(2.0, 0.01, 40.0);
    const FwhmResult f = fwhm_analyze(s.e, s.rho);
    CHECK(f.width == doctest::Approx(2.0).epsilon(0.0025));
    CHECK(f.peak_energy == 0.0);
    CHECK(-f.left == doctest::Approx(f.right).epsilon(1e-12));

    const Sampled narrow = sample_lorentzian(1.0, 0.01, 40.0);
    CHECK(fwhm_extract(s.e, s.rho) / fwhm_extract(narrow.e, narrow.rho) == doctest::Approx(2.0).epsilon(0.005));
}

TEST_CASE("FWHM rejects inputs it cannot interpret") {
    const std::vector<double> e{0, 1, 2, 3, 4, 5, 6};
    CHECK_THROWS_AS(fwhm_analyze(e, std::vector<double>{0, 1, 0.2, 0.9, 0.2, 0.1, 0}), AnalysisError);
    CHECK_THROWS_AS(fwhm_analyze(e, std::vector<double>{0.8, 0.9, 1, 0.9, 0.8, 0.7, 0.6}), AnalysisError);
    CHECK_THROWS_AS(fwhm_analyze(e, std::vector<double>(7, 0.0)), AnalysisError);
    CHECK_THROWS_AS(fwhm_analyze(std::vector<double>{0, 1}, std::vector<double>{0, 1}), AnalysisError);
}

TEST_CASE("trapezoid and line fit") {
    const std::vector<double> x{0.0, 0.5, 1.5, 2.0};
    const std::vector<double> y{1.0, 2.0, 4.0, 5.0};
    CHECK(trapezoid(x, y) == doctest::Approx(6.0));
    const LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
}

TEST_CASE("property: FWHM is translation invariant and symmetric") {
    testing::Gen gen(41);
    for (int k = 0; k < 12; ++k) {
        const double w = gen.uniform(0.5, 3.0);
        const double c = std::round(gen.uniform(-5, 5) * 100.0) / 100.0;
        const Sampled s = sample_lorentzian(w, 0.01, 20.0 * w, c);
        const FwhmResult f = fwhm_analyze(s.e, s.rho);
        CHECK(f.width == doctest::Approx(w).epsilon(0.005));
        CHECK((f.right - f.peak_energy) == doctest::Approx(f.peak_energy - f.left).epsilon(1e-9));
    }
}
