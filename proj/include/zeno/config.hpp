// config.hpp — Scenario configuration (INI-style sections, key = value)
//
//   [rates]        gamma, d, d_prime, e0, charge        (exactly one of these
//   [microscopic]  omega_alpha, omega_lr, ...           two sections)
//   [grid]         half_width, n_points
//   [solver]       integrator = exponential | rk4, dt = auto | <value>, n_max = auto | <int>
//   [run]          t_end, dt_out, output_dir
//   [validate]     tolerance, trace_tolerance, fwhm_tolerance, brute_tolerance,
//                  brute_half_width, brute_n_points, brute_t_min, brute_t_max

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "zeno/bloch.hpp"
#include "zeno/diagnostics.hpp"
#include "zeno/model.hpp"
#include "zeno/oracle.hpp"

namespace zeno {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::string field = {}, std::size_t line = 0)
        : std::runtime_error(what), field_(std::move(field)), line_(line) {}
    const std::string& field() const noexcept { return field_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string field_;
    std::size_t line_;
};

struct ValidateSettings {
    ValidationTolerances tolerances;
    double brute_half_width{250.0};
    std::size_t brute_n_points{10001};
    double brute_t_min{0.5};
    double brute_t_max{4.0};
};

struct ScenarioConfig {
    std::optional<MicroscopicParams> microscopic;
    std::optional<RateSet> direct;
    double e0{0.0};

    std::optional<double> half_width;
    std::optional<std::size_t> n_points;

    Integrator integrator{Integrator::exponential};
    std::optional<double> dt;
    std::optional<std::size_t> n_max;

    std::optional<double> t_end;   // default 20 / Gamma
    std::optional<double> dt_out;  // default 0.1 / Gamma
    std::string output_dir{"out"};

    ValidateSettings validate;
};

// Every default filled in: the form echoed into output headers.
struct ResolvedScenario {
    ScenarioConfig config;
    RateSet rates;
    EnergyGrid grid;
    double t_end{0.0};
    double dt_out{0.0};
    Diagnostics diagnostics;

    SolverSettings solver() const;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Derives rates and the grid. Throws ConfigError when a value is out of bounds.
ResolvedScenario resolve(const ScenarioConfig& config);

// INI text that parses back to the same resolved scenario.
std::string effective_config(const ResolvedScenario& scenario);

// Shortest decimal representation that reads back to the same double.
std::string format_number(double value);

}  // namespace zeno
