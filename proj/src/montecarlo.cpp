#include "wsnqd/montecarlo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "wsnqd/error.hpp"

namespace wsnqd {

EventSite site_at(const Deployment& dep, const RangeParams& ranges, Point location) {
  EventSite site;
  site.location = location;
  for (const auto& s : dep.sensors) site.distances.push_back(distance(s, location));
  site.cover = influence_cover_set(dep, ranges, location);
  return site;
}

std::vector<double> post_change_means(const Deployment& dep, const std::vector<double>& distances) {
  if (distances.size() != dep.size()) throw ConfigError("one event distance per sensor required");
  std::vector<double> means;
  means.reserve(distances.size());
  for (double d : distances) means.push_back(dep.h_e * rho(dep.model, d));
  return means;
}

double gen_observation(const Deployment& dep, const Scenario& scenario, Slot k, std::size_t s,
                       NoiseStream& rng) {
  if (k < 1) throw DomainError("slots start at 1");
  double mean = 0.0;
  if (scenario.change_time && k >= *scenario.change_time)
    mean = dep.h_e * rho(dep.model, scenario.event.distances.at(s));
  return mean + dep.sigma * rng.normal();
}

GaussianSource::GaussianSource(const Deployment& dep, const Scenario& scenario,
                               std::uint64_t scenario_id, std::uint64_t trial)
    : stream_(scenario.seed, scenario_id, trial),
      sigma_(dep.sigma),
      change_time_(scenario.change_time.value_or(std::numeric_limits<Slot>::max())) {
  if (scenario.change_time)
    means_ = post_change_means(dep, scenario.event.distances);
  else
    means_.assign(dep.size(), 0.0);
}

void GaussianSource::next(std::span<double> x) {
  ++k_;
  const bool post = k_ >= change_time_;
  for (std::size_t s = 0; s < means_.size(); ++s)
    x[s] = (post ? means_[s] : 0.0) + sigma_ * stream_.normal();
}

EstimateWithCI mean_with_ci(const std::vector<double>& values, std::uint64_t censored) {
  if (values.empty()) throw EstimationError("no runs to average");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  EstimateWithCI e;
  e.point = mean;
  e.ci_low = mean - kZ99 * se;
  e.ci_high = mean + kZ99 * se;
  e.runs = values.size();
  e.censored = censored;
  e.biased_low = static_cast<double>(censored) > 0.01 * n;
  return e;
}

EstimateWithCI wilson_with_ci(std::uint64_t successes, std::uint64_t runs) {
  if (runs == 0) throw EstimationError("no runs for a proportion");
  const double n = static_cast<double>(runs);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kZ99 * kZ99;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ99 / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  EstimateWithCI e;
  e.point = p;
  e.ci_low = std::max(0.0, std::min(p, centre - half));
  e.ci_high = std::min(1.0, std::max(p, centre + half));
  e.runs = runs;
  return e;
}

std::string to_string(Placement p) {
  switch (p) {
    case Placement::Reference: return "reference";
    case Placement::WorstCase: return "worst_case";
    case Placement::InfluenceBoundary: return "influence_boundary";
  }
  return "?";
}

std::string to_string(DelayMode m) { return m == DelayMode::Isolation ? "isolation" : "alarm"; }

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

Placement parse_placement(std::string_view name) {
  const auto n = lower(name);
  if (n == "reference") return Placement::Reference;
  if (n == "worst_case") return Placement::WorstCase;
  if (n == "influence_boundary") return Placement::InfluenceBoundary;
  throw ConfigError("unknown placement '" + std::string(name) + "'");
}

DelayMode parse_delay_mode(std::string_view name) {
  const auto n = lower(name);
  if (n == "isolation") return DelayMode::Isolation;
  if (n == "alarm") return DelayMode::Alarm;
  throw ConfigError("unknown delay mode '" + std::string(name) + "'");
}

EventSite placement_site(const Deployment& dep, const RangeParams& ranges,
                         const DetectionPartition& partition, std::size_t region, Placement p) {
  const auto& r = partition.region(region);
  switch (p) {
    case Placement::Reference: return site_at(dep, ranges, r.reference);
    case Placement::WorstCase: return site_at(dep, ranges, farthest_member_point(dep, r));
    case Placement::InfluenceBoundary: {
      // Every member of N_i sees the event from exactly r_i; the others no closer.
      EventSite site = site_at(dep, ranges, r.reference);
      for (std::size_t s = 0; s < dep.size(); ++s) {
        const bool member = std::binary_search(r.sensors.begin(), r.sensors.end(), s);
        site.distances[s] = member ? ranges.r_i : std::max(ranges.r_i, site.distances[s]);
      }
      site.location.reset();
      site.cover = r.sensors;
      return site;
    }
  }
  return site_at(dep, ranges, r.reference);
}

LlrMap llr_for(const Deployment& dep, const RangeParams& ranges) {
  return make_llr(dep.h_e, dep.sigma, rho(dep.model, ranges.r_d));
}

namespace {

void check_items(const std::vector<PathEvaluator::Item>& items, const DetectionPartition& partition,
                 const Deployment& dep, const LlrMap& llr, const McSettings& mc) {
  if (mc.runs < 1) throw ConfigError("runs must be positive");
  if (items.empty()) throw ConfigError("no procedures to evaluate");
  for (const auto& it : items) make_procedure(it.proc, partition, dep, llr, it.c);
}

}  // namespace

std::vector<EstimateWithCI> estimate_arl2fa_batch(const std::vector<PathEvaluator::Item>& items,
                                                  const DetectionPartition& partition,
                                                  const Deployment& dep, const RangeParams& ranges,
                                                  const McSettings& mc,
                                                  std::vector<std::vector<TrialRecord>>* logs) {
  const auto llr = llr_for(dep, ranges);
  check_items(items, partition, dep, llr, mc);
  Scenario sc;
  sc.seed = mc.seed;
  sc.horizon = mc.horizon;
  const std::size_t m = items.size();
  std::vector<std::vector<TrackedOutcome>> trials(mc.runs);
  parallel_trials(mc.runs, mc.workers, [&](std::uint64_t t) {
    PathEvaluator eval(partition, llr, items);
    GaussianSource src(dep, sc, 0, t);
    trials[t] = eval.run(src, mc.horizon);
  });

  std::vector<EstimateWithCI> out;
  if (logs) logs->assign(m, {});
  for (std::size_t q = 0; q < m; ++q) {
    std::vector<double> stops(mc.runs);
    std::uint64_t censored = 0;
    for (std::uint64_t t = 0; t < mc.runs; ++t) {
      const auto& o = trials[t][q].outcome;
      stops[t] = static_cast<double>(o.tau.value_or(mc.horizon));
      censored += o.censored();
      if (logs) (*logs)[q].push_back({t, std::nullopt, o.tau, o.isolated_region, false});
    }
    if (censored == mc.runs) {
      std::ostringstream os;
      os << "ARL2FA estimate failed for " << to_string(items[q].proc) << " c=" << items[q].c << ": all "
         << mc.runs << " runs censored at horizon " << mc.horizon
         << "; raise the horizon or lower the threshold";
      throw EstimationError(os.str());
    }
    out.push_back(mean_with_ci(stops, censored));
  }
  return out;
}

EstimateWithCI estimate_arl2fa(Procedure proc, const DetectionPartition& partition,
                               const Deployment& dep, const RangeParams& ranges, double c,
                               const McSettings& mc, std::vector<TrialRecord>* log) {
  std::vector<std::vector<TrialRecord>> logs;
  auto est = estimate_arl2fa_batch({{proc, c}}, partition, dep, ranges, mc, log ? &logs : nullptr);
  if (log) *log = std::move(logs.front());
  return est.front();
}

std::vector<EventEstimates> estimate_event_batch(const std::vector<PathEvaluator::Item>& items,
                                                 const DetectionPartition& partition,
                                                 const Deployment& dep, const RangeParams& ranges,
                                                 const McSettings& mc, const EventSettings& ev,
                                                 std::vector<std::vector<TrialRecord>>* logs) {
  const auto llr = llr_for(dep, ranges);
  check_items(items, partition, dep, llr, mc);
  const std::size_t n_regions = partition.size();
  const std::size_t m = items.size();

  std::vector<EventEstimates> out(m);
  for (auto& e : out) {
    e.sadd.point = -1.0;
    e.pfi.point = -1.0;
    e.pfi_total.point = -1.0;
  }
  if (logs) logs->assign(m, {});

  for (std::size_t i = 0; i < n_regions; ++i) {
    Scenario sc;
    sc.change_time = 1;
    sc.event = placement_site(dep, ranges, partition, i, ev.placement);
    sc.seed = mc.seed;
    sc.horizon = mc.horizon;
    std::vector<bool> accept(n_regions);
    for (std::size_t j = 0; j < n_regions; ++j)
      accept[j] = is_subset(partition.region(j).sensors, sc.event.cover);

    std::vector<std::vector<TrackedOutcome>> trials(mc.runs);
    parallel_trials(mc.runs, mc.workers, [&](std::uint64_t t) {
      PathEvaluator eval(partition, llr, items);
      GaussianSource src(dep, sc, 1 + i, t);
      trials[t] = eval.run(src, mc.horizon, ev.delay_mode == DelayMode::Isolation ? &accept : nullptr);
    });

    for (std::size_t q = 0; q < m; ++q) {
      auto& res = out[q];
      std::vector<double> delays(mc.runs);
      std::uint64_t censored = 0;
      std::vector<std::uint64_t> wrong(n_regions, 0);
      std::uint64_t wrong_total = 0;
      for (std::uint64_t t = 0; t < mc.runs; ++t) {
        const auto& tr = trials[t][q];
        const auto stop = ev.delay_mode == DelayMode::Isolation ? tr.accepted_tau : tr.outcome.tau;
        delays[t] = static_cast<double>(stop.value_or(mc.horizon));
        censored += !stop.has_value();
        const auto j = tr.outcome.isolated_region;
        const bool wrong_here = j && !accept[*j];
        if (wrong_here) {
          ++wrong[*j];
          ++wrong_total;
        }
        if (logs) (*logs)[q].push_back({t, i, tr.outcome.tau, j, wrong_here});
      }
      auto est = mean_with_ci(delays, censored);
      est.worst_region = i;
      res.sadd_by_region.push_back(est);
      if (est.point > res.sadd.point) res.sadd = est;

      for (std::size_t j = 0; j < n_regions; ++j) {
        if (accept[j]) continue;
        auto cell = wilson_with_ci(wrong[j], mc.runs);
        if (cell.point > res.pfi.point) {
          res.pfi = cell;
          res.pfi.worst_region = i;
          res.pfi_wrong_region = j;
        }
      }
      auto total = wilson_with_ci(wrong_total, mc.runs);
      if (total.point > res.pfi_total.point) {
        res.pfi_total = total;
        res.pfi_total.worst_region = i;
      }
    }
  }
  for (auto& res : out) {
    // No wrong answer exists anywhere: PFI is exactly zero.
    if (res.pfi.point < 0.0) res.pfi = EstimateWithCI{0.0, 0.0, 0.0, mc.runs, 0, false, std::nullopt};
    if (res.pfi_total.point < 0.0) res.pfi_total = res.pfi;
  }
  return out;
}

EventEstimates estimate_event_metrics(Procedure proc, const DetectionPartition& partition,
                                      const Deployment& dep, const RangeParams& ranges, double c,
                                      const McSettings& mc, const EventSettings& ev,
                                      std::vector<TrialRecord>* log) {
  std::vector<std::vector<TrialRecord>> logs;
  auto est = estimate_event_batch({{proc, c}}, partition, dep, ranges, mc, ev, log ? &logs : nullptr);
  if (log) *log = std::move(logs.front());
  return est.front();
}

EstimateWithCI estimate_sadd(Procedure proc, const DetectionPartition& partition,
                             const Deployment& dep, const RangeParams& ranges, double c,
                             const McSettings& mc, const EventSettings& ev) {
  return estimate_event_metrics(proc, partition, dep, ranges, c, mc, ev).sadd;
}

EstimateWithCI estimate_pfi(Procedure proc, const DetectionPartition& partition,
                            const Deployment& dep, const RangeParams& ranges, double c,
                            const McSettings& mc, const EventSettings& ev) {
  return estimate_event_metrics(proc, partition, dep, ranges, c, mc, ev).pfi;
}

namespace {

// Censoring counts at the horizon, so the mean here is a lower bound on ARL2FA.
EstimateWithCI capped_arl(Procedure proc, const DetectionPartition& partition,
                          const Deployment& dep, const RangeParams& ranges, double c,
                          const McSettings& mc) {
  try {
    return estimate_arl2fa(proc, partition, dep, ranges, c, mc);
  } catch (const EstimationError&) {
    EstimateWithCI e;
    e.point = e.ci_low = e.ci_high = static_cast<double>(mc.horizon);
    e.runs = e.censored = mc.runs;
    e.biased_low = true;
    return e;
  }
}

}  // namespace

Calibration calibrate_threshold(Procedure proc, const DetectionPartition& partition,
                                const Deployment& dep, const RangeParams& ranges,
                                double target_gamma, const CalibrationOptions& opt) {
  if (!(target_gamma > 1.0)) throw DomainError("target ARL2FA must exceed 1");
  if (!(opt.lo > 0.0 && opt.hi > opt.lo)) throw ConfigError("calibration bracket is invalid");

  McSettings mc;
  mc.seed = opt.seed;
  mc.workers = opt.workers;
  mc.runs = std::min<std::uint64_t>(200, opt.max_runs);
  mc.horizon = static_cast<Slot>(std::ceil(5.0 * target_gamma));

  double lo = opt.lo, hi = opt.hi;
  const auto at_lo = capped_arl(proc, partition, dep, ranges, lo, mc);
  const auto at_hi = capped_arl(proc, partition, dep, ranges, hi, mc);
  if (!(at_lo.point < target_gamma) || !(at_hi.point > target_gamma)) {
    std::ostringstream os;
    os << "calibration bracket failure: ARL2FA(" << lo << ") = " << at_lo.point << ", ARL2FA("
       << hi << ") = " << at_hi.point << ", target " << target_gamma;
    throw EstimationError(os.str());
  }

  Calibration best{0.5 * (lo + hi), at_lo, 0};
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    // Coarse runs while the bracket is wide, full precision once it is narrow.
    const bool fine = hi - lo < 0.5;
    mc.runs = fine ? opt.max_runs : std::min<std::uint64_t>(200, opt.max_runs);
    mc.horizon = static_cast<Slot>(std::ceil((fine ? 20.0 : 5.0) * target_gamma));
    const auto est = capped_arl(proc, partition, dep, ranges, mid, mc);
    best = {mid, est, it};
    const double rel = (est.point - target_gamma) / target_gamma;
    if (fine && std::abs(rel) <= opt.tolerance) return best;
    if (rel < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-4) break;
  }
  std::ostringstream os;
  os << "calibration did not reach tolerance " << opt.tolerance << ": last c = " << best.c
     << ", ARL2FA = " << best.estimate.point;
  throw EstimationError(os.str());
}

}  // namespace wsnqd
