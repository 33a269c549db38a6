#include "zeno/scenario.hpp"

#include <fstream>
#include <iomanip>

#include "zeno/bloch.hpp"
#include "zeno/counting.hpp"
#include "zeno/errors.hpp"
#include "zeno/oracle.hpp"
#include "zeno/output.hpp"

namespace zeno {

namespace fs = std::filesystem;

Command command_from_string(const std::string& name) {
    if (name == "rates") return Command::rates;
    if (name == "decay") return Command::decay;
    if (name == "spectrum") return Command::spectrum;
    if (name == "counting") return Command::counting;
    if (name == "validate") return Command::validate;
    throw UsageError("unknown command '" + name + "'");
}

const char* to_string(Command command) noexcept {
    switch (command) {
        case Command::rates: return "rates";
        case Command::decay: return "decay";
        case Command::spectrum: return "spectrum";
        case Command::counting: return "counting";
        case Command::validate: return "validate";
    }
    return "?";
}

namespace {

class Writer {
public:
    Writer(fs::path dir, ScenarioResult& result) : dir_(std::move(dir)), result_(result) {
        fs::create_directories(dir_);
    }

    template <class F>
    void file(const std::string& name, F&& emit) {
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        emit(out);
        if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
        result_.files.push_back(path);
    }

private:
    fs::path dir_;
    ScenarioResult& result_;
};

void report_warnings(const Diagnostics& d, std::ostream& err) {
    for (const auto& w : d.warnings) err << "warning: " << w << '\n';
}

void print_report(const ValidationReport& report, std::ostream& out) {
    for (const auto& row : report.rows) {
        out << (row.pass ? "PASS " : "FAIL ") << std::left << std::setw(36) << row.quantity
            << " deviation " << std::setw(12) << format_number(row.deviation) << " tolerance "
            << format_number(row.tolerance);
        if (!row.detail.empty()) out << "  (" << row.detail << ')';
        out << '\n';
    }
}

int run_validate(const ResolvedScenario& s, Writer& writer, Diagnostics& diag, std::ostream& out) {
    const SolverSettings solver = s.solver();
    const TracedTrajectory traced = evolve_traced(s.rates, s.grid, s.t_end, s.dt_out, solver);
    const CountingTrajectory counting = evolve_counting(s.rates, s.grid, s.t_end, s.dt_out, solver);
    diag.merge(traced.diagnostics);
    diag.merge(counting.diagnostics);

    const ValidateSettings& v = s.config.validate;
    const EnergyGrid brute_grid = build_energy_grid(s.grid.e0, v.brute_half_width, v.brute_n_points);
    const auto h = DiscretizedHamiltonian::from_grid(brute_grid, s.rates.gamma);
    std::vector<double> times;
    for (double t : sample_times(v.brute_t_max, s.dt_out)) {
        if (t >= v.brute_t_min - 1e-12) times.push_back(t);
    }
    const SurvivalCurve brute = wigner_weisskopf_brute(h, times, solver.threads);
    diag.merge(brute.diagnostics);

    const ValidationReport report = compare_engines(traced, counting, &brute, v.tolerances);
    print_report(report, out);
    writer.file("validation.json", [&](std::ostream& f) { f << validation_json(s, report, diag); });
    return report.all_pass() ? kExitOk : kExitValidationFailed;
}

}  // namespace

ScenarioResult run_scenario(const ResolvedScenario& s, Command command, const fs::path& out_dir,
                            std::ostream& out, std::ostream& err) {
    ScenarioResult result;
    Diagnostics diag = s.diagnostics;
    try {
        Writer writer(out_dir, result);
        writer.file("effective_config.ini", [&](std::ostream& f) { f << effective_config(s); });
        const std::string header = csv_header(s, to_string(command));
        const SolverSettings solver = s.solver();

        switch (command) {
            case Command::rates:
                out << rates_report(s.rates, s.grid);
                break;
            case Command::decay: {
                SolverSettings lean = solver;
                lean.profiles = ProfileStorage::final_only;
                const auto traj = evolve_traced(s.rates, s.grid, s.t_end, s.dt_out, lean);
                diag.merge(traj.diagnostics);
                writer.file("decay.csv", [&](std::ostream& f) { write_decay_csv(f, header, traj); });
                break;
            }
            case Command::spectrum: {
                SolverSettings lean = solver;
                lean.profiles = ProfileStorage::final_only;
                const auto traj = evolve_traced(s.rates, s.grid, s.t_end, s.dt_out, lean);
                diag.merge(traj.diagnostics);
                const Spectrum spec = spectral_distribution(traj, &diag);
                writer.file("spectrum.csv",
                            [&](std::ostream& f) { write_spectrum_csv(f, header, spec, s.rates, s.grid); });
                break;
            }
            case Command::counting: {
                SolverSettings lean = solver;
                lean.profiles = ProfileStorage::final_only;
                const auto traj = evolve_counting(s.rates, s.grid, s.t_end, s.dt_out, lean);
                diag.merge(traj.diagnostics);
                const auto current = mean_current(traj);
                writer.file("counting.csv", [&](std::ostream& f) { write_counting_csv(f, header, traj); });
                writer.file("current.csv", [&](std::ostream& f) { write_current_csv(f, header, current); });
                break;
            }
            case Command::validate:
                result.exit_code = run_validate(s, writer, diag, out);
                break;
        }
    } catch (const NumericalError& e) {
        err << "numerical failure at t = " << format_number(e.time()) << ": " << e.what() << '\n';
        result.exit_code = kExitNumericalError;
    } catch (const AnalysisError& e) {
        err << "analysis failure: " << e.what() << '\n';
        result.exit_code = kExitNumericalError;
    }
    report_warnings(diag, err);
    return result;
}

}  // namespace zeno
