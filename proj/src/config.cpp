#include "zeno/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "zeno/errors.hpp"

namespace zeno {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"rates", {"gamma", "d", "d_prime", "e0", "charge"}},
        {"microscopic",
         {"omega_alpha", "omega_lr", "omega_lr_prime", "rho", "rho_l", "rho_r", "mu_l", "mu_r", "e0", "charge"}},
        {"grid", {"half_width", "n_points"}},
        {"solver", {"integrator", "dt", "n_max"}},
        {"run", {"t_end", "dt_out", "output_dir"}},
        {"validate",
         {"tolerance", "trace_tolerance", "fwhm_tolerance", "brute_tolerance", "brute_half_width",
          "brute_n_points", "brute_t_min", "brute_t_max"}},
    };
    return keys;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// ptree keeps no line numbers, so record where each "section.key" was written.
std::map<std::string, std::size_t> key_lines(const std::string& text) {
    std::map<std::string, std::size_t> lines;
    std::istringstream in(text);
    std::string line, section;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            lines.emplace(section, no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq != std::string::npos) lines.emplace(section + "." + trim(line.substr(0, eq)), no);
    }
    return lines;
}

class Reader {
public:
    Reader(const pt::ptree& tree, std::map<std::string, std::size_t> lines)
        : tree_(tree), lines_(std::move(lines)) {}

    bool has_section(const std::string& s) const { return tree_.find(s) != tree_.not_found(); }

    std::optional<std::string> raw(const std::string& field) const {
        auto v = tree_.get_optional<std::string>(pt::ptree::path_type(field, '.'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
        const auto it = lines_.find(field);
        const std::size_t line = it == lines_.end() ? 0 : it->second;
        std::ostringstream os;
        if (line != 0) os << "line " << line << ": ";
        os << field << ": " << msg;
        throw ConfigError(os.str(), field, line);
    }

    std::optional<double> number(const std::string& field) const {
        auto s = raw(field);
        if (!s) return std::nullopt;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
        if (ec != std::errc{} || ptr != s->data() + s->size() || !std::isfinite(v)) {
            fail(field, "expected a finite number, got '" + *s + "'");
        }
        return v;
    }

    double number_or(const std::string& field, double fallback) const {
        return number(field).value_or(fallback);
    }

    std::optional<std::size_t> count(const std::string& field, bool allow_auto) const {
        auto s = raw(field);
        if (!s || (allow_auto && *s == "auto")) return std::nullopt;
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
        if (ec != std::errc{} || ptr != s->data() + s->size()) {
            fail(field, std::string("expected a non-negative integer") + (allow_auto ? " or 'auto'" : "") +
                            ", got '" + *s + "'");
        }
        return v;
    }

    std::optional<double> number_or_auto(const std::string& field) const {
        auto s = raw(field);
        if (!s || *s == "auto") return std::nullopt;
        return number(field);
    }

private:
    const pt::ptree& tree_;
    std::map<std::string, std::size_t> lines_;
};

void check_positive(const Reader& r, const std::string& field, std::optional<double> v) {
    if (v && !(*v > 0.0)) r.fail(field, "must be positive");
}

void check_nonnegative(const Reader& r, const std::string& field, std::optional<double> v) {
    if (v && !(*v >= 0.0)) r.fail(field, "must be non-negative");
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        std::ostringstream os;
        os << "line " << e.line() << ": " << e.message();
        throw ConfigError(os.str(), {}, e.line());
    }
    const Reader r(tree, key_lines(text));

    for (const auto& [section, body] : tree) {
        const auto known = known_keys().find(section);
        if (body.empty()) r.fail(section, "top-level keys are not allowed; put them in a section");
        if (known == known_keys().end()) r.fail(section, "unknown section");
        for (const auto& [key, value] : body) {
            if (!known->second.contains(key)) r.fail(section + "." + key, "unknown key");
        }
    }

    ScenarioConfig c;
    const bool has_rates = r.has_section("rates");
    const bool has_micro = r.has_section("microscopic");
    if (has_rates == has_micro) {
        throw ConfigError("exactly one of [rates] or [microscopic] must be given", has_rates ? "rates" : "");
    }

    if (has_rates) {
        const auto gamma = r.number("rates.gamma");
        if (!gamma) r.fail("rates.gamma", "required");
        check_positive(r, "rates.gamma", gamma);
        const double d = r.number_or("rates.d", 0.0);
        const double dp = r.number_or("rates.d_prime", 0.0);
        const double charge = r.number_or("rates.charge", 1.0);
        check_nonnegative(r, "rates.d", d);
        check_nonnegative(r, "rates.d_prime", dp);
        c.direct = rates_from_direct(*gamma, d, dp, charge);
        c.e0 = r.number_or("rates.e0", 0.0);
    } else {
        MicroscopicParams p;
        const auto need = [&](const char* key) {
            const std::string field = std::string("microscopic.") + key;
            const auto v = r.number(field);
            if (!v) r.fail(field, "required");
            return *v;
        };
        p.omega_alpha = need("omega_alpha");
        p.omega_lr = need("omega_lr");
        p.omega_lr_prime = r.number_or("microscopic.omega_lr_prime", p.omega_lr);
        p.rho = r.number_or("microscopic.rho", p.rho);
        p.rho_l = r.number_or("microscopic.rho_l", p.rho_l);
        p.rho_r = r.number_or("microscopic.rho_r", p.rho_r);
        p.mu_l = need("mu_l");
        p.mu_r = need("mu_r");
        p.e0 = r.number_or("microscopic.e0", 0.0);
        p.charge = r.number_or("microscopic.charge", 1.0);
        for (const char* key : {"rho", "rho_l", "rho_r"}) {
            const std::string field = std::string("microscopic.") + key;
            check_positive(r, field, r.number(field));
        }
        if (!(p.mu_l > p.mu_r)) r.fail("microscopic.mu_l", "must exceed mu_r (positive bias)");
        if (p.omega_alpha == 0.0) r.fail("microscopic.omega_alpha", "must be non-zero");
        c.microscopic = p;
        c.e0 = p.e0;
    }

    c.half_width = r.number("grid.half_width");
    check_positive(r, "grid.half_width", c.half_width);
    c.n_points = r.count("grid.n_points", false);
    if (c.n_points && (*c.n_points < 3 || *c.n_points % 2 == 0 || *c.n_points > 2000001)) {
        r.fail("grid.n_points", "must be odd, at least 3 and at most 2000001");
    }

    if (auto name = r.raw("solver.integrator")) {
        try {
            c.integrator = integrator_from_string(*name);
        } catch (const std::exception&) {
            r.fail("solver.integrator", "expected 'exponential' or 'rk4', got '" + *name + "'");
        }
    }
    c.dt = r.number_or_auto("solver.dt");
    check_positive(r, "solver.dt", c.dt);
    c.n_max = r.count("solver.n_max", true);
    if (c.n_max && (*c.n_max < 1 || *c.n_max > 100000)) r.fail("solver.n_max", "must lie in [1, 100000]");

    c.t_end = r.number("run.t_end");
    check_positive(r, "run.t_end", c.t_end);
    c.dt_out = r.number("run.dt_out");
    check_positive(r, "run.dt_out", c.dt_out);
    if (c.t_end && c.dt_out && *c.dt_out > *c.t_end) r.fail("run.dt_out", "must not exceed t_end");
    if (auto dir = r.raw("run.output_dir")) {
        if (dir->empty()) r.fail("run.output_dir", "must not be empty");
        c.output_dir = *dir;
    }

    auto& v = c.validate;
    v.tolerances.oracle = r.number_or("validate.tolerance", v.tolerances.oracle);
    v.tolerances.trace = r.number_or("validate.trace_tolerance", v.tolerances.trace);
    v.tolerances.fwhm = r.number_or("validate.fwhm_tolerance", v.tolerances.fwhm);
    v.tolerances.brute = r.number_or("validate.brute_tolerance", v.tolerances.brute);
    for (const char* key : {"tolerance", "trace_tolerance", "fwhm_tolerance", "brute_tolerance"}) {
        const std::string field = std::string("validate.") + key;
        check_positive(r, field, r.number(field));
    }
    v.brute_half_width = r.number_or("validate.brute_half_width", v.brute_half_width);
    check_positive(r, "validate.brute_half_width", v.brute_half_width);
    v.brute_n_points = r.count("validate.brute_n_points", false).value_or(v.brute_n_points);
    if (v.brute_n_points < 3 || v.brute_n_points % 2 == 0 || v.brute_n_points > 40001) {
        r.fail("validate.brute_n_points", "must be odd, at least 3 and at most 40001");
    }
    v.brute_t_min = r.number_or("validate.brute_t_min", v.brute_t_min);
    v.brute_t_max = r.number_or("validate.brute_t_max", v.brute_t_max);
    check_nonnegative(r, "validate.brute_t_min", v.brute_t_min);
    if (!(v.brute_t_max > v.brute_t_min)) r.fail("validate.brute_t_max", "must exceed brute_t_min");
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

SolverSettings ResolvedScenario::solver() const {
    SolverSettings s;
    s.integrator = config.integrator;
    s.dt = config.dt;
    s.n_max = config.n_max;
    return s;
}

ResolvedScenario resolve(const ScenarioConfig& config) {
    ResolvedScenario out;
    out.config = config;
    try {
        out.rates = config.direct ? *config.direct : derive_rates(*config.microscopic, &out.diagnostics);
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), "microscopic");
    }
    const RateSet& r = out.rates;
    if (!(r.gamma > 0.0)) throw ConfigError("decay rate must be positive", "rates.gamma");

    try {
        if (config.half_width && config.n_points) {
            out.grid = build_energy_grid(config.e0, *config.half_width, *config.n_points);
        } else if (config.half_width || config.n_points) {
            const EnergyGrid def = default_energy_grid(r, config.e0);
            const double hw = config.half_width.value_or(def.half_width());
            std::size_t n = config.n_points.value_or(0);
            if (n == 0) {
                // Keep the default spacing bound on a custom window.
                const auto half_intervals =
                    static_cast<std::size_t>(std::ceil(hw / (r.dephased_width() / 20.0) - 1e-9));
                n = 2 * half_intervals + 1;
            }
            out.grid = build_energy_grid(config.e0, hw, n);
        } else {
            out.grid = default_energy_grid(r, config.e0);
        }
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), "grid");
    }

    out.t_end = config.t_end.value_or(20.0 / r.gamma);
    out.dt_out = config.dt_out.value_or(0.1 / r.gamma);
    if (out.dt_out > out.t_end) throw ConfigError("dt_out exceeds t_end", "run.dt_out");
    out.config.half_width = out.grid.half_width();
    out.config.n_points = out.grid.n_points;
    out.config.t_end = out.t_end;
    out.config.dt_out = out.dt_out;
    if (!out.config.n_max) out.config.n_max = auto_ladder_depth(r, out.t_end);
    return out;
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, ptr);
}

std::string effective_config(const ResolvedScenario& s) {
    const ScenarioConfig& c = s.config;
    std::ostringstream os;
    const auto kv = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
    const auto num = [&](const char* key, double value) { kv(key, format_number(value)); };

    if (c.direct) {
        os << "[rates]\n";
        num("gamma", c.direct->gamma);
        num("d", c.direct->d);
        num("d_prime", c.direct->d_prime);
        num("e0", c.e0);
        num("charge", c.direct->charge);
    } else {
        const MicroscopicParams& p = *c.microscopic;
        os << "[microscopic]\n";
        num("omega_alpha", p.omega_alpha);
        num("omega_lr", p.omega_lr);
        num("omega_lr_prime", p.omega_lr_prime);
        num("rho", p.rho);
        num("rho_l", p.rho_l);
        num("rho_r", p.rho_r);
        num("mu_l", p.mu_l);
        num("mu_r", p.mu_r);
        num("e0", p.e0);
        num("charge", p.charge);
    }
    os << "\n[grid]\n";
    num("half_width", *c.half_width);
    kv("n_points", std::to_string(*c.n_points));
    os << "\n[solver]\n";
    kv("integrator", to_string(c.integrator));
    kv("dt", c.dt ? format_number(*c.dt) : "auto");
    kv("n_max", std::to_string(*c.n_max));
    os << "\n[run]\n";
    num("t_end", *c.t_end);
    num("dt_out", *c.dt_out);
    kv("output_dir", c.output_dir);
    os << "\n[validate]\n";
    num("tolerance", c.validate.tolerances.oracle);
    num("trace_tolerance", c.validate.tolerances.trace);
    num("fwhm_tolerance", c.validate.tolerances.fwhm);
    num("brute_tolerance", c.validate.tolerances.brute);
    num("brute_half_width", c.validate.brute_half_width);
    kv("brute_n_points", std::to_string(c.validate.brute_n_points));
    num("brute_t_min", c.validate.brute_t_min);
    num("brute_t_max", c.validate.brute_t_max);
    return os.str();
}

}  // namespace zeno
