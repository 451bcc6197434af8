#include "wsnqd/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "wsnqd/error.hpp"
#include "wsnqd/metrics.hpp"
#include "wsnqd/report.hpp"

namespace wsnqd {

namespace fs = std::filesystem;

namespace {

struct World {
  ResolvedDeployment resolved;
  DetectionPartition partition;
  BoundConstants constants;

  const Deployment& dep() const { return resolved.deployment; }
  const RangeParams& ranges() const { return resolved.ranges; }
};

World prepare(const ExperimentConfig& cfg) {
  World w;
  w.resolved = resolve_deployment(cfg.deployment);
  w.partition = build_partition(w.dep(), w.ranges(), w.resolved.grid_resolution);
  w.constants = bound_constants(w.partition, w.dep(), w.ranges(), cfg.delta);
  return w;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void write_resolved(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::ofstream(out_path(cfg, "resolved_config.yaml")) << emit_config(cfg);
}

struct Row {
  Procedure proc;
  double c;
  std::optional<double> target;
};

std::vector<Row> threshold_rows(const ExperimentConfig& cfg, const World& w, bool allow_calibration,
                                std::ostream& out) {
  std::vector<Row> rows;
  for (auto p : cfg.rules) {
    const auto it = cfg.thresholds.find(p);
    if (it != cfg.thresholds.end() && !it->second.empty()) {
      const auto& cs = it->second;
      const bool paired = cfg.targets && cfg.targets->gamma.size() == cs.size();
      for (std::size_t k = 0; k < cs.size(); ++k)
        rows.push_back({p, cs[k], paired ? std::optional<double>(cfg.targets->gamma[k]) : std::nullopt});
      continue;
    }
    for (double gamma : cfg.targets->gamma) {
      const auto rule = local_rule_of(p);
      if (cfg.targets->method == "analytic" || !allow_calibration) {
        if (!rule) throw ConfigError("analytic thresholds are not available for CENTRALIZED");
        rows.push_back({p, threshold_for_targets(gamma, cfg.targets->alpha, w.constants, *rule), gamma});
        continue;
      }
      CalibrationOptions opt;
      opt.tolerance = cfg.calibration_tolerance;
      opt.seed = cfg.seed;
      opt.workers = cfg.workers;
      const auto cal = calibrate_threshold(p, w.partition, w.dep(), w.ranges(), gamma, opt);
      out << "calibrated " << to_string(p) << " gamma=" << gamma << " -> c=" << fmt(cal.c)
          << " (ARL2FA " << fmt(cal.estimate.point) << ")\n";
      rows.push_back({p, cal.c, gamma});
    }
  }
  return rows;
}

struct Evaluated {
  Row row;
  EstimateWithCI arl;
  EventEstimates event;
};

std::vector<Evaluated> evaluate(const ExperimentConfig& cfg, const World& w, const std::vector<Row>& rows,
                                std::vector<std::pair<Row, std::vector<TrialRecord>>>* logs) {
  std::vector<PathEvaluator::Item> items;
  for (const auto& row : rows) items.push_back({row.proc, row.c});
  const McSettings arl_mc{cfg.runs, cfg.seed, cfg.arl_horizon, cfg.workers};
  const McSettings ev_mc{cfg.event_runs, cfg.seed, cfg.delay_horizon, cfg.workers};
  std::vector<std::vector<TrialRecord>> arl_logs, ev_logs;
  const auto arl = estimate_arl2fa_batch(items, w.partition, w.dep(), w.ranges(), arl_mc,
                                         logs ? &arl_logs : nullptr);
  const bool split = cfg.pfi_placement != cfg.placement;
  auto ev = estimate_event_batch(items, w.partition, w.dep(), w.ranges(), ev_mc,
                                 {cfg.placement, cfg.delay_mode}, logs && !split ? &ev_logs : nullptr);
  if (split) {
    // Isolation errors come from their own event sites; per-trial logs follow them.
    const auto iso = estimate_event_batch(items, w.partition, w.dep(), w.ranges(), ev_mc,
                                          {cfg.pfi_placement, cfg.delay_mode}, logs ? &ev_logs : nullptr);
    for (std::size_t q = 0; q < rows.size(); ++q) {
      ev[q].pfi = iso[q].pfi;
      ev[q].pfi_total = iso[q].pfi_total;
      ev[q].pfi_wrong_region = iso[q].pfi_wrong_region;
    }
  }
  std::vector<Evaluated> out;
  for (std::size_t q = 0; q < rows.size(); ++q) {
    out.push_back({rows[q], arl[q], ev[q]});
    if (logs) {
      logs->push_back({rows[q], std::move(arl_logs[q])});
      auto& l = logs->back().second;
      l.insert(l.end(), ev_logs[q].begin(), ev_logs[q].end());
    }
  }
  return out;
}

std::string flag(bool b) { return b ? "1" : "0"; }
std::string region_cell(const std::optional<std::size_t>& r) {
  return r ? std::to_string(*r + 1) : "";
}

}  // namespace

int cmd_partition(const ExperimentConfig& cfg, std::ostream& out) {
  write_resolved(cfg);
  const auto w = prepare(cfg);
  write_partition_csv(out_path(cfg, "partition.csv"), w.partition);
  out << "regions N=" << w.partition.size() << "\n";
  for (const auto& r : w.partition.regions) {
    std::ostringstream area;
    area << std::setprecision(4) << r.area_estimate;
    out << "  region " << r.id + 1 << ": {" << format_set(r.sensors) << "} area~" << area.str() << "\n";
  }
  const auto& k = w.constants;
  out << "m_arl=" << k.m_arl;
  if (k.pfi_applicable)
    out << " m_pfi=" << *k.m_pfi << " m_bar_pfi=" << *k.m_bar_pfi << "\n";
  else
    out << " m_pfi=n/a m_bar_pfi=n/a (no false-isolation pair)\n";
  out << "r_d=" << fmt(w.ranges().r_d) << " r_i=" << fmt(w.ranges().r_i) << "\n";
  return kExitOk;
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out, bool write_outcomes) {
  write_resolved(cfg);
  const auto w = prepare(cfg);
  const auto rows = threshold_rows(cfg, w, true, out);
  std::vector<std::pair<Row, std::vector<TrialRecord>>> logs;
  const auto results = evaluate(cfg, w, rows, write_outcomes ? &logs : nullptr);

  CsvWriter table(out_path(cfg, "table.csv"),
                  {"rule", "runs", "c", "target", "arl2fa", "ci_low", "ci_high", "sadd", "sadd_ci_low",
                   "sadd_ci_high", "arl_censored", "arl_biased_low", "sadd_censored", "sadd_worst_region",
                   "pfi", "pfi_ci_low", "pfi_ci_high", "pfi_total"});
  CsvWriter arl(out_path(cfg, "arl2fa.csv"),
                {"rule", "runs", "c", "target", "arl2fa", "ci_low", "ci_high", "censored", "biased_low"});
  CsvWriter sadd(out_path(cfg, "sadd.csv"),
                 {"rule", "runs", "c", "target", "sadd", "ci_low", "ci_high", "censored", "worst_region",
                  "placement", "delay_mode"});
  CsvWriter pfi(out_path(cfg, "pfi.csv"),
                {"rule", "runs", "c", "target", "pfi", "ci_low", "ci_high", "worst_region", "wrong_region",
                 "pfi_total", "total_ci_low", "total_ci_high", "placement"});
  for (const auto& e : results) {
    const auto rule = to_string(e.row.proc);
    const auto c = fmt(e.row.c);
    const auto target = fmt(e.row.target);
    const auto& s = e.event.sadd;
    const auto& p = e.event.pfi;
    const auto& pt = e.event.pfi_total;
    table.row({rule, std::to_string(e.arl.runs), c, target, fmt(e.arl.point), fmt(e.arl.ci_low),
               fmt(e.arl.ci_high), fmt(s.point), fmt(s.ci_low), fmt(s.ci_high), std::to_string(e.arl.censored),
               flag(e.arl.biased_low), std::to_string(s.censored), region_cell(s.worst_region), fmt(p.point),
               fmt(p.ci_low), fmt(p.ci_high), fmt(pt.point)});
    arl.row({rule, std::to_string(e.arl.runs), c, target, fmt(e.arl.point), fmt(e.arl.ci_low),
             fmt(e.arl.ci_high), std::to_string(e.arl.censored), flag(e.arl.biased_low)});
    sadd.row({rule, std::to_string(s.runs), c, target, fmt(s.point), fmt(s.ci_low), fmt(s.ci_high),
              std::to_string(s.censored), region_cell(s.worst_region), to_string(cfg.placement),
              to_string(cfg.delay_mode)});
    pfi.row({rule, std::to_string(p.runs), c, target, fmt(p.point), fmt(p.ci_low), fmt(p.ci_high),
             region_cell(p.worst_region), region_cell(e.event.pfi_wrong_region), fmt(pt.point),
             fmt(pt.ci_low), fmt(pt.ci_high), to_string(cfg.pfi_placement)});
    out << rule << " c=" << c << ": ARL2FA " << fmt(e.arl.point) << " [" << fmt(e.arl.ci_low) << ", "
        << fmt(e.arl.ci_high) << "]" << (e.arl.biased_low ? " (biased low: censored runs)" : "")
        << "; SADD " << fmt(s.point) << " [" << fmt(s.ci_low) << ", " << fmt(s.ci_high) << "]"
        << "; PFI " << fmt(p.point) << " [" << fmt(p.ci_low) << ", " << fmt(p.ci_high) << "]\n";
  }

  if (write_outcomes) {
    CsvWriter oc(out_path(cfg, "outcomes.csv"),
                 {"trial_id", "rule", "c", "tau", "censored_flag", "isolated_region", "false_isolation_flag",
                  "event_region"});
    for (const auto& [row, log] : logs)
      for (const auto& rec : log)
        oc.row({std::to_string(rec.trial), to_string(row.proc), fmt(row.c),
                rec.tau ? std::to_string(*rec.tau) : "", flag(!rec.tau), region_cell(rec.isolated_region),
                flag(rec.false_isolation), region_cell(rec.scenario_region)});
  }
  return kExitOk;
}

int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out) {
  write_resolved(cfg);
  const auto w = prepare(cfg);
  const auto& k = w.constants;
  {
    CsvWriter cons(out_path(cfg, "constants.csv"), {"name", "value"});
    auto opt = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); };
    cons.row({"n", std::to_string(k.n)});
    cons.row({"n_regions", std::to_string(w.partition.size())});
    cons.row({"n_lower", std::to_string(k.n_lower)});
    cons.row({"m_arl", std::to_string(k.m_arl)});
    cons.row({"m_pfi", opt(k.m_pfi)});
    cons.row({"m_bar_pfi", opt(k.m_bar_pfi)});
    cons.row({"xi", fmt(k.xi)});
    cons.row({"omega0_lower", fmt(k.omega0_lower)});
    cons.row({"kl", fmt(k.kl)});
    cons.row({"delta", fmt(k.delta)});
    cons.row({"K", fmt(k.big_k)});
    cons.row({"B_MAX", fmt(k.big_b_max)});
    cons.row({"B_HALL", fmt(k.big_b_hall)});
    cons.row({"B_ALL", fmt(k.big_b_all)});
    cons.row({"r_d", fmt(w.ranges().r_d)});
    cons.row({"r_i", fmt(w.ranges().r_i)});
  }

  const auto rows = threshold_rows(cfg, w, false, out);
  CsvWriter csv(out_path(cfg, "bounds.csv"),
                {"rule", "c", "a", "b", "arl2fa_bound", "pfi_bound", "sadd_bound", "vacuous_flags"});
  for (const auto& row : rows) {
    const auto rule = local_rule_of(row.proc);
    if (!rule) {
      out << "CENTRALIZED c=" << fmt(row.c) << ": SADD bound " << fmt(sadd_upper_bound(row.c, k.kl))
          << " (no distributed ARL2FA/PFI exponents)\n";
      continue;
    }
    const auto arl = arl2fa_lower_bound(*rule, row.c, k);
    const auto pfi = pfi_upper_bound(*rule, row.c, k);
    std::string flags;
    if (arl.vacuous) flags += "arl2fa";
    if (pfi.vacuous) flags += flags.empty() ? "pfi" : ";pfi";
    csv.row({to_string(*rule), fmt(row.c), fmt(k.a(*rule)), fmt(k.b(*rule)), fmt(arl.value), fmt(pfi.value),
             fmt(sadd_upper_bound(row.c, k.kl)), flags});
    out << to_string(*rule) << " c=" << fmt(row.c) << ": ARL2FA >= " << fmt(arl.value) << ", PFI <= "
        << fmt(pfi.value) << ", SADD <= " << fmt(sadd_upper_bound(row.c, k.kl))
        << (flags.empty() ? "" : " (vacuous: " + flags + ")") << "\n";
  }

  if (cfg.targets) {
    CsvWriter tcsv(out_path(cfg, "target_bounds.csv"),
                   {"rule", "gamma", "alpha", "c_analytic", "sadd_bound", "status"});
    for (auto p : cfg.rules) {
      for (double gamma : cfg.targets->gamma) {
        const double alpha = cfg.targets->alpha;
        if (p == Procedure::Centralized) {
          tcsv.row({"CENTRALIZED", fmt(gamma), fmt(alpha), "",
                    fmt(centralized_sadd_bound(w.partition, gamma, alpha, k.kl)), "ok"});
          continue;
        }
        const auto rule = *local_rule_of(p);
        try {
          tcsv.row({to_string(rule), fmt(gamma), fmt(alpha), fmt(threshold_for_targets(gamma, alpha, k, rule)),
                    fmt(sadd_target_bound(gamma, alpha, k, rule)), "ok"});
        } catch (const DomainError& e) {
          tcsv.row({to_string(rule), fmt(gamma), fmt(alpha), "", "", "needs_calibration"});
        }
      }
    }
  }
  return kExitOk;
}

int cmd_curve(const ExperimentConfig& cfg, std::ostream& out) {
  write_resolved(cfg);
  const auto w = prepare(cfg);
  const auto rows = threshold_rows(cfg, w, true, out);
  const auto results = evaluate(cfg, w, rows, nullptr);
  CsvWriter csv(out_path(cfg, "curve.csv"), {"rule", "log10_arl2fa", "sadd", "c"});
  for (const auto& e : results) {
    csv.row({to_string(e.row.proc), fmt(std::log10(e.arl.point)), fmt(e.event.sadd.point), fmt(e.row.c)});
    out << to_string(e.row.proc) << " c=" << fmt(e.row.c) << ": log10 ARL2FA " << fmt(std::log10(e.arl.point))
        << ", SADD " << fmt(e.event.sadd.point) << "\n";
  }
  return kExitOk;
}

int cmd_trace(const ExperimentConfig& cfg, std::ostream& out) {
  write_resolved(cfg);
  const auto w = prepare(cfg);
  Scenario sc;
  sc.seed = cfg.seed;
  sc.horizon = cfg.trace.slots;
  std::uint64_t scenario_id = 0;
  if (cfg.trace.event_region) {
    const auto region = *cfg.trace.event_region;
    if (region < 1 || region > w.partition.size())
      throw ConfigError("trace.event_region must lie in 1.." + std::to_string(w.partition.size()));
    sc.change_time = 1;
    sc.event = placement_site(w.dep(), w.ranges(), w.partition, region - 1, cfg.placement);
    scenario_id = region;
  }
  GaussianSource src(w.dep(), sc, scenario_id, cfg.trace.trial);
  DetectorBank bank(w.dep().size(), cfg.trace.threshold, llr_for(w.dep(), w.ranges()));
  CsvWriter csv(out_path(cfg, "trace.csv"),
                {"k", "sensor", "x", "z", "c_stat", "D_MAX", "D_HALL", "D_ALL"});
  std::vector<double> x(w.dep().size());
  for (Slot k = 1; k <= cfg.trace.slots; ++k) {
    src.next(x);
    bank.step(x);
    for (std::size_t s = 0; s < x.size(); ++s)
      csv.row({std::to_string(k), std::to_string(s + 1), fmt(x[s]), fmt(bank.llr_map()(x[s])),
               fmt(bank.state(s).c_stat), flag(bank.decision(s, LocalRule::Max)),
               flag(bank.decision(s, LocalRule::Hall)), flag(bank.decision(s, LocalRule::All))});
  }
  out << "trace: " << cfg.trace.slots << " slots x " << x.size() << " sensors written\n";
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed quickest event detection and isolation in sensor networks"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;
  bool outcomes = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (YAML)")->required();
    sub->add_option("--seed", seed, "Override experiment.seed");
    sub->add_option("--workers", workers, "Worker threads (outputs do not depend on it)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory");
  };
  auto* partition = app.add_subcommand("partition", "Build and export the detection partition");
  auto* run = app.add_subcommand("run", "Estimate ARL2FA, SADD and PFI for every rule and threshold");
  auto* bounds = app.add_subcommand("bounds", "Evaluate the analytic bounds");
  auto* curve = app.add_subcommand("curve", "Emit SADD versus log10 ARL2FA points");
  auto* trace = app.add_subcommand("trace", "Dump one trial's per-sensor CUSUM trajectory");
  for (auto* sub : {partition, run, bounds, curve, trace}) add_common(sub);
  run->add_flag("--outcomes", outcomes, "Also write per-trial outcomes.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    auto cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out_dir) cfg.out_dir = *out_dir;
    validate(cfg, !(*partition || *trace));
    if (*partition) return cmd_partition(cfg, out);
    if (*run) return cmd_run(cfg, out, outcomes);
    if (*bounds) return cmd_bounds(cfg, out);
    if (*curve) return cmd_curve(cfg, out);
    return cmd_trace(cfg, out);
  } catch (const CoverageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedModelError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EstimationError& e) {
    err << "estimation failed: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitEstimation;
  }
}

}  // namespace wsnqd
