// output.hpp — CSV and JSON serialization of runs

#pragma once

#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "zeno/bloch.hpp"
#include "zeno/config.hpp"
#include "zeno/counting.hpp"
#include "zeno/oracle.hpp"

namespace zeno {

inline constexpr std::string_view kArtifactVersion = "zeno-lab 0.1.0";

// '#'-prefixed block: artifact version, command and the effective config.
std::string csv_header(const ResolvedScenario& scenario, std::string_view command);

void write_decay_csv(std::ostream& out, std::string_view header, const TracedTrajectory& traj);
void write_spectrum_csv(std::ostream& out, std::string_view header, const Spectrum& spectrum,
                        const RateSet& rates, const EnergyGrid& grid);
void write_counting_csv(std::ostream& out, std::string_view header, const CountingTrajectory& traj);
void write_current_csv(std::ostream& out, std::string_view header, std::span<const CurrentSample> samples);

std::string rates_report(const RateSet& rates, const EnergyGrid& grid);

std::string validation_json(const ResolvedScenario& scenario, const ValidationReport& report,
                            const Diagnostics& diagnostics);

}  // namespace zeno
