#include "zeno/output.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "zeno/analytic.hpp"

namespace zeno {

std::string csv_header(const ResolvedScenario& scenario, std::string_view command) {
    std::ostringstream os;
    os << "# " << kArtifactVersion << '\n';
    os << "# command: " << command << '\n';
    std::istringstream cfg(effective_config(scenario));
    std::string line;
    while (std::getline(cfg, line)) {
        if (line.empty()) continue;
        os << "# " << line << '\n';
    }
    return os.str();
}

void write_decay_csv(std::ostream& out, std::string_view header, const TracedTrajectory& traj) {
    out << header << "t,sigma00,analytic\n";
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
        const double t = traj.times[j];
        out << format_number(t) << ',' << format_number(traj.sigma_00[j]) << ','
            << format_number(survival_probability(traj.rates.gamma, t)) << '\n';
    }
}

void write_spectrum_csv(std::ostream& out, std::string_view header, const Spectrum& spectrum,
                        const RateSet& rates, const EnergyGrid& grid) {
    const double w = grid_coupling(rates.gamma, grid);
    const LorentzianSpec line = make_lorentzian(rates, w * w, grid.e0);
    out << header << "E,density,analytic_density\n";
    for (std::size_t a = 0; a < spectrum.energy.size(); ++a) {
        out << format_number(spectrum.energy[a]) << ',' << format_number(spectrum.density[a]) << ','
            << format_number(lorentzian_density(line, grid.implied_dos, spectrum.energy[a])) << '\n';
    }
}

void write_counting_csv(std::ostream& out, std::string_view header, const CountingTrajectory& traj) {
    out << header << "t,n,p_n\n";
    for (const auto& snap : traj.snapshots) {
        const std::string t = format_number(snap.t);
        for (std::size_t n = 0; n < snap.p_n.size(); ++n) {
            out << t << ',' << n << ',' << format_number(snap.p_n[n]) << '\n';
        }
    }
}

void write_current_csv(std::ostream& out, std::string_view header, std::span<const CurrentSample> samples) {
    out << header << "t,mean_n,current\n";
    for (const auto& s : samples) {
        out << format_number(s.t) << ',' << format_number(s.mean_n) << ',' << format_number(s.current) << '\n';
    }
}

std::string rates_report(const RateSet& r, const EnergyGrid& grid) {
    std::ostringstream os;
    const auto line = [&](const char* key, double v) { os << key << " = " << format_number(v) << '\n'; };
    line("gamma", r.gamma);
    line("d", r.d);
    line("d_prime", r.d_prime);
    line("gamma_d", r.gamma_d);
    if (r.t_coeff) line("t_coeff", *r.t_coeff);
    if (r.t_coeff_prime) line("t_coeff_prime", *r.t_coeff_prime);
    if (r.current) line("current", *r.current);
    if (r.current_prime) line("current_prime", *r.current_prime);
    line("charge", r.charge);
    line("line_width", r.dephased_width());
    line("grid_spacing", grid.spacing);
    line("grid_coupling", grid_coupling(r.gamma, grid));
    return os.str();
}

std::string validation_json(const ResolvedScenario& scenario, const ValidationReport& report,
                            const Diagnostics& diagnostics) {
    nlohmann::ordered_json j;
    j["version"] = kArtifactVersion;
    j["pass"] = report.all_pass();
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json row;
        row["quantity"] = r.quantity;
        // NaN has no JSON spelling.
        if (std::isfinite(r.deviation)) row["deviation"] = r.deviation; else row["deviation"] = nullptr;
        row["tolerance"] = r.tolerance;
        row["pass"] = r.pass;
        if (!r.detail.empty()) row["detail"] = r.detail;
        rows.push_back(row);
    }
    j["rows"] = rows;
    j["warnings"] = diagnostics.warnings;
    j["config"] = effective_config(scenario);
    return j.dump(2) + "\n";
}

}  // namespace zeno
