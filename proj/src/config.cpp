#include "wsnqd/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "wsnqd/error.hpp"

namespace wsnqd {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (node.IsDefined() && node.Mark().line >= 0)
      os << ":" << node.Mark().line + 1 << ":" << node.Mark().column + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
  }

  void allow_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                  const std::string& where) const {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
  }

  // Integers may be written in float notation, e.g. 1e7.
  std::uint64_t count(const YAML::Node& node, const std::string& key) const {
    const double v = scalar<double>(node, key);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19) fail(node, "'" + key + "' must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence()) fail(node, "'" + key + "' must be a list of numbers");
    std::vector<double> out;
    for (const auto& v : node) out.push_back(scalar<double>(v, key));
    return out;
  }

  std::vector<Point> points(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence()) fail(node, "'" + key + "' must be a list of [x, y] pairs");
    std::vector<Point> out;
    for (const auto& p : node) {
      if (!p.IsSequence() || p.size() != 2) fail(p, "'" + key + "' entries must be [x, y] pairs");
      out.push_back({scalar<double>(p[0], key), scalar<double>(p[1], key)});
    }
    return out;
  }

  template <class F>
  auto parsed(const YAML::Node& node, const std::string& key, F&& f) const {
    try {
      return f(scalar<std::string>(node, key));
    } catch (const ConfigError& e) {
      fail(node, e.what());
    }
  }

 private:
  std::string source_;
};

DeploymentConfig read_deployment(const Reader& r, const YAML::Node& n) {
  r.require_map(n, "deployment");
  r.allow_keys(n,
               {"preset", "sensors", "roi", "model", "cutoff", "eta", "h_e", "sigma", "mu1",
                "omega0_lower", "influence_range", "grid_resolution"},
               "deployment");
  DeploymentConfig d;
  if (n["preset"]) {
    d.preset = r.scalar<std::string>(n["preset"], "preset");
    if (d.preset != "hex7") r.fail(n["preset"], "unknown preset '" + d.preset + "' (known: hex7)");
    if (n["sensors"] || n["roi"]) r.fail(n, "a preset deployment cannot also list sensors or roi");
  } else {
    if (!n["sensors"] || !n["roi"]) r.fail(n, "inline deployment needs both 'sensors' and 'roi'");
    d.sensors = r.points(n["sensors"], "sensors");
    d.roi = r.points(n["roi"], "roi");
  }
  if (n["model"]) {
    const auto m = r.scalar<std::string>(n["model"], "model");
    if (m == "boolean")
      d.model = SensingKind::Boolean;
    else if (m == "power_law")
      d.model = SensingKind::PowerLaw;
    else
      r.fail(n["model"], "model must be 'boolean' or 'power_law'");
  }
  auto opt = [&](const char* key, double& out) {
    if (n[key]) out = r.scalar<double>(n[key], key);
  };
  opt("cutoff", d.cutoff);
  opt("eta", d.eta);
  opt("h_e", d.h_e);
  opt("sigma", d.sigma);
  opt("mu1", d.mu1);
  if (n["omega0_lower"]) d.omega0_lower = r.scalar<double>(n["omega0_lower"], "omega0_lower");
  if (n["influence_range"]) d.influence_range = r.scalar<double>(n["influence_range"], "influence_range");
  if (n["grid_resolution"]) d.grid_resolution = r.scalar<double>(n["grid_resolution"], "grid_resolution");
  if (d.omega0_lower && d.influence_range)
    r.fail(n, "give either omega0_lower or influence_range, not both");
  return d;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  Reader r(source);
  ExperimentConfig cfg;
  if (root.IsNull()) throw ConfigError(source + ": empty config");
  r.require_map(root, "config");
  r.allow_keys(root, {"deployment", "experiment", "trace", "output"}, "the top level");
  if (!root["deployment"]) r.fail(root, "missing 'deployment' section");
  cfg.deployment = read_deployment(r, root["deployment"]);

  if (const auto e = root["experiment"]) {
    r.require_map(e, "experiment");
    r.allow_keys(e,
                 {"rules", "thresholds", "targets", "runs", "event_runs", "seed", "arl_horizon",
                  "delay_horizon", "placement", "pfi_placement", "delay_mode", "delta", "rng", "workers",
                  "calibration_tolerance"},
                 "experiment");
    if (e["rules"]) {
      if (!e["rules"].IsSequence()) r.fail(e["rules"], "'rules' must be a list");
      for (const auto& v : e["rules"])
        cfg.rules.push_back(r.parsed(v, "rules", [](const std::string& s) { return parse_procedure(s); }));
    }
    if (const auto t = e["thresholds"]) {
      r.require_map(t, "thresholds");
      for (const auto& kv : t) {
        const auto p = r.parsed(kv.first, "thresholds", [](const std::string& s) { return parse_procedure(s); });
        cfg.thresholds[p] = r.numbers(kv.second, "thresholds");
      }
    }
    if (const auto t = e["targets"]) {
      r.require_map(t, "targets");
      r.allow_keys(t, {"gamma", "alpha", "method"}, "targets");
      TargetsConfig tc;
      if (!t["gamma"]) r.fail(t, "targets need a 'gamma' list");
      tc.gamma = r.numbers(t["gamma"], "gamma");
      if (t["alpha"]) tc.alpha = r.scalar<double>(t["alpha"], "alpha");
      if (t["method"]) {
        tc.method = r.scalar<std::string>(t["method"], "method");
        if (tc.method != "calibrate" && tc.method != "analytic")
          r.fail(t["method"], "method must be 'calibrate' or 'analytic'");
      }
      cfg.targets = tc;
    }
    if (e["runs"]) cfg.runs = r.count(e["runs"], "runs");
    if (e["event_runs"]) cfg.event_runs = r.count(e["event_runs"], "event_runs");
    if (e["seed"]) cfg.seed = r.count(e["seed"], "seed");
    if (e["arl_horizon"]) cfg.arl_horizon = r.count(e["arl_horizon"], "arl_horizon");
    if (e["delay_horizon"]) cfg.delay_horizon = r.count(e["delay_horizon"], "delay_horizon");
    if (e["placement"])
      cfg.placement = r.parsed(e["placement"], "placement", [](const std::string& s) { return parse_placement(s); });
    if (e["pfi_placement"])
      cfg.pfi_placement =
          r.parsed(e["pfi_placement"], "pfi_placement", [](const std::string& s) { return parse_placement(s); });
    if (e["delay_mode"])
      cfg.delay_mode = r.parsed(e["delay_mode"], "delay_mode", [](const std::string& s) { return parse_delay_mode(s); });
    if (e["delta"]) cfg.delta = r.scalar<double>(e["delta"], "delta");
    if (e["rng"]) {
      cfg.rng = r.scalar<std::string>(e["rng"], "rng");
      if (cfg.rng != kRngName) r.fail(e["rng"], std::string("unsupported rng '") + cfg.rng + "' (only " + kRngName + ")");
    }
    if (e["workers"]) cfg.workers = static_cast<unsigned>(r.count(e["workers"], "workers"));
    if (e["calibration_tolerance"])
      cfg.calibration_tolerance = r.scalar<double>(e["calibration_tolerance"], "calibration_tolerance");
  }

  if (const auto t = root["trace"]) {
    r.require_map(t, "trace");
    r.allow_keys(t, {"threshold", "slots", "event_region", "trial"}, "trace");
    if (t["threshold"]) cfg.trace.threshold = r.scalar<double>(t["threshold"], "threshold");
    if (t["slots"]) cfg.trace.slots = r.count(t["slots"], "slots");
    if (t["event_region"]) cfg.trace.event_region = r.count(t["event_region"], "event_region");
    if (t["trial"]) cfg.trace.trial = r.count(t["trial"], "trial");
  }

  if (const auto o = root["output"]) {
    r.require_map(o, "output");
    r.allow_keys(o, {"dir"}, "output");
    if (o["dir"]) cfg.out_dir = r.scalar<std::string>(o["dir"], "dir");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void validate(const ExperimentConfig& cfg, bool require_rules) {
  if (require_rules && cfg.rules.empty()) throw ConfigError("experiment.rules is empty");
  std::set<Procedure> seen;
  for (auto p : cfg.rules)
    if (!seen.insert(p).second) throw ConfigError("rule " + to_string(p) + " listed twice");
  for (const auto& [p, cs] : cfg.thresholds) {
    if (require_rules && !seen.count(p)) throw ConfigError("thresholds given for unlisted rule " + to_string(p));
    for (double c : cs)
      if (!(c > 0.0)) throw ConfigError("thresholds must be positive");
  }
  for (auto p : cfg.rules) {
    const bool listed = cfg.thresholds.count(p) && !cfg.thresholds.at(p).empty();
    if (require_rules && !listed && !cfg.targets)
      throw ConfigError("rule " + to_string(p) + " has neither thresholds nor targets");
    if (p == Procedure::Centralized && cfg.deployment.model != SensingKind::Boolean)
      throw ConfigError("the CENTRALIZED procedure needs the Boolean sensing model");
  }
  if (cfg.targets) {
    if (cfg.targets->gamma.empty()) throw ConfigError("targets.gamma is empty");
    for (double g : cfg.targets->gamma)
      if (!(g > 1.0)) throw ConfigError("targets.gamma entries must exceed 1");
    if (!(cfg.targets->alpha > 0.0 && cfg.targets->alpha < 1.0))
      throw ConfigError("targets.alpha must lie in (0, 1)");
  }
  if (cfg.runs < 100) throw ConfigError("experiment.runs must be at least 100");
  if (cfg.event_runs < 1000) throw ConfigError("experiment.event_runs must be at least 1000");
  if (cfg.arl_horizon < 1 || cfg.delay_horizon < 1) throw ConfigError("horizons must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("experiment.delta must lie in (0, 1)");
  if (cfg.workers < 1) throw ConfigError("experiment.workers must be at least 1");
  if (!(cfg.calibration_tolerance > 0.0)) throw ConfigError("calibration_tolerance must be positive");
  if (!(cfg.trace.threshold > 0.0) || cfg.trace.slots < 1) throw ConfigError("trace needs a positive threshold and slot count");
  resolve_deployment(cfg.deployment);
}

ResolvedDeployment resolve_deployment(const DeploymentConfig& cfg) {
  ResolvedDeployment out;
  auto& dep = out.deployment;
  if (cfg.preset == "hex7") {
    dep.sensors = presets::hex7_positions();
    dep.roi = presets::hex7_roi();
  } else {
    dep.sensors = cfg.sensors;
    dep.roi = Polygon(cfg.roi);
  }
  dep.h_e = cfg.h_e;
  dep.sigma = cfg.sigma;
  dep.model = cfg.model == SensingKind::Boolean ? SensingModel::boolean(cfg.cutoff)
                                                : SensingModel::power_law(cfg.eta);
  dep.validate();

  double omega = 0.5;
  if (cfg.model == SensingKind::PowerLaw) {
    if (cfg.influence_range)
      omega = omega0_for_influence_range(dep, cfg.mu1, *cfg.influence_range);
    else if (cfg.omega0_lower)
      omega = *cfg.omega0_lower;
    else if (cfg.preset == "hex7")
      omega = presets::hex7(SensingKind::PowerLaw).omega0_lower;
    else
      throw ConfigError("power_law deployments need omega0_lower or influence_range");
  } else if (cfg.omega0_lower) {
    omega = *cfg.omega0_lower;
  }
  out.ranges = compute_ranges(dep, cfg.mu1, omega);
  out.grid_resolution = cfg.grid_resolution.value_or(out.ranges.r_d / 100.0);
  if (!(out.grid_resolution > 0.0)) throw ConfigError("grid_resolution must be positive");
  return out;
}

namespace {

void emit_points(YAML::Emitter& em, const std::vector<Point>& pts) {
  em << YAML::BeginSeq;
  for (const auto& p : pts) em << YAML::Flow << YAML::BeginSeq << p.x << p.y << YAML::EndSeq;
  em << YAML::EndSeq;
}

}  // namespace

std::string emit_config(const ExperimentConfig& cfg) {
  YAML::Emitter em;
  em.SetDoublePrecision(17);
  em << YAML::BeginMap;

  const auto& d = cfg.deployment;
  em << YAML::Key << "deployment" << YAML::Value << YAML::BeginMap;
  if (!d.preset.empty()) {
    em << YAML::Key << "preset" << YAML::Value << d.preset;
  } else {
    em << YAML::Key << "sensors" << YAML::Value;
    emit_points(em, d.sensors);
    em << YAML::Key << "roi" << YAML::Value;
    emit_points(em, d.roi);
  }
  em << YAML::Key << "model" << YAML::Value << to_string(d.model);
  if (d.model == SensingKind::Boolean)
    em << YAML::Key << "cutoff" << YAML::Value << d.cutoff;
  else
    em << YAML::Key << "eta" << YAML::Value << d.eta;
  em << YAML::Key << "h_e" << YAML::Value << d.h_e;
  em << YAML::Key << "sigma" << YAML::Value << d.sigma;
  em << YAML::Key << "mu1" << YAML::Value << d.mu1;
  if (d.omega0_lower) em << YAML::Key << "omega0_lower" << YAML::Value << *d.omega0_lower;
  if (d.influence_range) em << YAML::Key << "influence_range" << YAML::Value << *d.influence_range;
  if (d.grid_resolution) em << YAML::Key << "grid_resolution" << YAML::Value << *d.grid_resolution;
  em << YAML::EndMap;

  em << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
  em << YAML::Key << "rules" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto p : cfg.rules) em << to_string(p);
  em << YAML::EndSeq;
  if (!cfg.thresholds.empty()) {
    em << YAML::Key << "thresholds" << YAML::Value << YAML::BeginMap;
    for (const auto& [p, cs] : cfg.thresholds) em << YAML::Key << to_string(p) << YAML::Value << YAML::Flow << cs;
    em << YAML::EndMap;
  }
  if (cfg.targets) {
    em << YAML::Key << "targets" << YAML::Value << YAML::BeginMap;
    em << YAML::Key << "gamma" << YAML::Value << YAML::Flow << cfg.targets->gamma;
    em << YAML::Key << "alpha" << YAML::Value << cfg.targets->alpha;
    em << YAML::Key << "method" << YAML::Value << cfg.targets->method;
    em << YAML::EndMap;
  }
  em << YAML::Key << "runs" << YAML::Value << cfg.runs;
  em << YAML::Key << "event_runs" << YAML::Value << cfg.event_runs;
  em << YAML::Key << "seed" << YAML::Value << cfg.seed;
  em << YAML::Key << "arl_horizon" << YAML::Value << cfg.arl_horizon;
  em << YAML::Key << "delay_horizon" << YAML::Value << cfg.delay_horizon;
  em << YAML::Key << "placement" << YAML::Value << to_string(cfg.placement);
  em << YAML::Key << "pfi_placement" << YAML::Value << to_string(cfg.pfi_placement);
  em << YAML::Key << "delay_mode" << YAML::Value << to_string(cfg.delay_mode);
  em << YAML::Key << "delta" << YAML::Value << cfg.delta;
  em << YAML::Key << "rng" << YAML::Value << cfg.rng;
  em << YAML::Key << "workers" << YAML::Value << cfg.workers;
  em << YAML::Key << "calibration_tolerance" << YAML::Value << cfg.calibration_tolerance;
  em << YAML::EndMap;

  em << YAML::Key << "trace" << YAML::Value << YAML::BeginMap;
  em << YAML::Key << "threshold" << YAML::Value << cfg.trace.threshold;
  em << YAML::Key << "slots" << YAML::Value << cfg.trace.slots;
  if (cfg.trace.event_region) em << YAML::Key << "event_region" << YAML::Value << *cfg.trace.event_region;
  em << YAML::Key << "trial" << YAML::Value << cfg.trace.trial;
  em << YAML::EndMap;

  em << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  em << YAML::Key << "dir" << YAML::Value << cfg.out_dir;
  em << YAML::EndMap;

  em << YAML::EndMap;
  return std::string(em.c_str()) + "\n";
}

}  // namespace wsnqd
