#pragma once

#include <string>

#include "ctp/config.hpp"

namespace ctp {

/// Process exit codes shared by the experiment driver and the CLI.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;       // bad configuration / usage
inline constexpr int inconclusive = 3;       // study cannot distinguish hypotheses
inline constexpr int assertion_failure = 4;  // a hard numerical assertion failed
inline constexpr int runtime_failure = 5;    // I/O or unexpected runtime error
}  // namespace exit_code

/// Version string stamped into manifests ("v<version>+<git describe>").
std::string build_id();

/// Runs the configured experiment, writes its CSV outputs plus a
/// manifest.json into config.output_dir, and returns a process exit code.
/// The manifest records the configuration echo, runtime, and the experiment's
/// summary checks; it is the only output that is not byte-stable across runs.
int run_experiment(const ExperimentConfig& config);

}  // namespace ctp
