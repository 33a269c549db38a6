// scenario.hpp — Command dispatch for the zeno-lab CLI

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "zeno/config.hpp"

namespace zeno {

enum class Command { rates, decay, spectrum, counting, validate };

Command command_from_string(const std::string& name);
const char* to_string(Command command) noexcept;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

struct ScenarioResult {
    int exit_code{kExitOk};
    std::vector<std::filesystem::path> files;
};

// Runs one command and writes its outputs under out_dir (created if needed).
// Numerical and analysis failures are reported on `err` and mapped to exit
// code 3; validation failures to 1.
ScenarioResult run_scenario(const ResolvedScenario& scenario, Command command,
                            const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

}  // namespace zeno
