#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsnqd/fusion.hpp"
#include "wsnqd/geometry.hpp"
#include "wsnqd/montecarlo.hpp"

namespace wsnqd {

struct DeploymentConfig {
  std::string preset;  // "hex7" or empty for an inline deployment
  std::vector<Point> sensors;
  std::vector<Point> roi;
  SensingKind model = SensingKind::Boolean;
  double cutoff = 1.0;
  double eta = 2.0;
  double h_e = 1.0;
  double sigma = 1.0;
  double mu1 = 1.0;
  std::optional<double> omega0_lower;
  std::optional<double> influence_range;
  std::optional<double> grid_resolution;  // default r_d / 100
};

struct TargetsConfig {
  std::vector<double> gamma;
  double alpha = 0.05;
  std::string method = "calibrate";  // or "analytic"
};

struct TraceConfig {
  double threshold = 3.0;
  Slot slots = 100;
  std::optional<std::size_t> event_region;  // 1-based; absent means no event
  std::uint64_t trial = 0;
};

struct ExperimentConfig {
  DeploymentConfig deployment;
  std::vector<Procedure> rules;
  std::map<Procedure, std::vector<double>> thresholds;
  std::optional<TargetsConfig> targets;
  std::uint64_t runs = 10'000;
  std::uint64_t event_runs = 10'000;
  std::uint64_t seed = 1;
  Slot arl_horizon = 10'000'000;
  Slot delay_horizon = 100'000;
  Placement placement = Placement::Reference;      // event site for delays
  Placement pfi_placement = Placement::Reference;  // event site for isolation errors
  DelayMode delay_mode = DelayMode::Isolation;
  double delta = 0.01;
  std::string rng = kRngName;
  unsigned workers = 1;
  double calibration_tolerance = 0.05;
  TraceConfig trace;
  std::string out_dir = "out";
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
std::string emit_config(const ExperimentConfig& cfg);

// Checks cross-field constraints; throws ConfigError. Rule checks are skipped
// for commands that do not run procedures.
void validate(const ExperimentConfig& cfg, bool require_rules = true);

struct ResolvedDeployment {
  Deployment deployment;
  RangeParams ranges;
  double grid_resolution;
};

ResolvedDeployment resolve_deployment(const DeploymentConfig& cfg);

}  // namespace wsnqd
