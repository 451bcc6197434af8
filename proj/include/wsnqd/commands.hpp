#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wsnqd/config.hpp"

namespace wsnqd {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitEstimation = 2 };

int cmd_partition(const ExperimentConfig& cfg, std::ostream& out);
int cmd_run(const ExperimentConfig& cfg, std::ostream& out, bool write_outcomes = false);
int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out);
int cmd_curve(const ExperimentConfig& cfg, std::ostream& out);
int cmd_trace(const ExperimentConfig& cfg, std::ostream& out);

// Full command line front end; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wsnqd
