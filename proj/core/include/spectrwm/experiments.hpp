#pragma once

// Experiment drivers behind the `spectrwm` command. Each writes results.csv,
// meta.txt and its own extras into the configured output directory.

#include "spectrwm/config.hpp"

#include <iosfwd>
#include <string>

namespace spectrwm {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitThreshold = 2;

std::string library_version();

/// Resolves defaults, runs, writes artifacts and prints a summary to `log`.
/// Returns kExitSuccess or kExitThreshold; errors propagate as exceptions.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

/// argv-level entry point: parse, run, map exceptions to kExitError.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spectrwm
