// zeno-lab — command-line driver
//
//   zeno-lab <rates|decay|spectrum|counting|validate> --config <path> [--out <dir>]
//
// Worker threads come from ZENO_THREADS; outputs do not depend on it.

#include <CLI11.hpp>

#include <iostream>

#include "zeno/config.hpp"
#include "zeno/errors.hpp"
#include "zeno/output.hpp"
#include "zeno/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Continuously monitored decay of a quantum dot into a continuum"};
    app.set_version_flag("--version", std::string(zeno::kArtifactVersion));
    std::string command;
    std::string config_path;
    std::string out_dir;
    app.add_option("command", command, "rates, decay, spectrum, counting or validate")
        ->required()
        ->check(CLI::IsMember({"rates", "decay", "spectrum", "counting", "validate"}));
    app.add_option("--config", config_path, "scenario file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides [run] output_dir)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : zeno::kExitConfigError;
    }

    zeno::ResolvedScenario scenario;
    try {
        scenario = zeno::resolve(zeno::load_config(config_path));
    } catch (const zeno::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return zeno::kExitConfigError;
    }
    if (!out_dir.empty()) scenario.config.output_dir = out_dir;

    try {
        const auto result = zeno::run_scenario(scenario, zeno::command_from_string(command),
                                               scenario.config.output_dir, std::cout, std::cerr);
        for (const auto& f : result.files) std::cerr << "wrote " << f.string() << '\n';
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return zeno::kExitNumericalError;
    }
}
