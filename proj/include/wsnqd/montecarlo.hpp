#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wsnqd/fusion.hpp"
#include "wsnqd/geometry.hpp"
#include "wsnqd/metrics.hpp"
#include "wsnqd/random.hpp"

namespace wsnqd {

// Where the event sits, as seen by each sensor.
struct EventSite {
  std::optional<Point> location;  // absent for synthetic distance profiles
  std::vector<double> distances;  // one per sensor
  SensorSet cover;                // influence-cover set used to judge isolation
};

struct Scenario {
  std::optional<Slot> change_time;  // nullopt: the event never happens
  EventSite event;
  std::uint64_t seed = 0;
  Slot horizon = 0;
};

EventSite site_at(const Deployment& dep, const RangeParams& ranges, Point location);

std::vector<double> post_change_means(const Deployment& dep, const std::vector<double>& distances);

// One observation of sensor s at slot k (k >= 1).
double gen_observation(const Deployment& dep, const Scenario& scenario, Slot k, std::size_t s,
                       NoiseStream& rng);

// All sensors of one trial, drawn from the (seed, scenario_id, trial) stream.
class GaussianSource : public ObservationSource {
 public:
  GaussianSource(const Deployment& dep, const Scenario& scenario, std::uint64_t scenario_id,
                 std::uint64_t trial);

  std::size_t size() const override { return means_.size(); }
  void next(std::span<double> x) override;

 private:
  NoiseStream stream_;
  std::vector<double> means_;
  double sigma_;
  Slot change_time_;
  Slot k_ = 0;
};

struct EstimateWithCI {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t runs = 0;
  std::uint64_t censored = 0;
  bool biased_low = false;  // censored fraction above 1%
  std::optional<std::size_t> worst_region;
};

// 99% two-sided quantile.
inline constexpr double kZ99 = 2.5758293035489004;

EstimateWithCI mean_with_ci(const std::vector<double>& values, std::uint64_t censored);
EstimateWithCI wilson_with_ci(std::uint64_t successes, std::uint64_t runs);

enum class Placement { Reference, WorstCase, InfluenceBoundary };
enum class DelayMode { Isolation, Alarm };

std::string to_string(Placement p);
std::string to_string(DelayMode m);
Placement parse_placement(std::string_view name);
DelayMode parse_delay_mode(std::string_view name);

// Event site used for region i's delay and isolation trials.
EventSite placement_site(const Deployment& dep, const RangeParams& ranges,
                         const DetectionPartition& partition, std::size_t region, Placement p);

struct McSettings {
  std::uint64_t runs = 10'000;
  std::uint64_t seed = 1;
  Slot horizon = 10'000'000;
  unsigned workers = 1;
};

// Runs f(trial) for trial in [0, n) on a pool of workers; results land in trial order.
template <class F>
void parallel_trials(std::uint64_t n, unsigned workers, F&& f) {
  if (workers <= 1 || n < 2) {
    for (std::uint64_t t = 0; t < n; ++t) f(t);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::uint64_t t; (t = next.fetch_add(1)) < n;) f(t);
    });
  for (auto& th : pool) th.join();
}

LlrMap llr_for(const Deployment& dep, const RangeParams& ranges);

// Per-trial verdicts, filled in trial order when requested.
struct TrialRecord {
  std::uint64_t trial = 0;
  std::optional<std::size_t> scenario_region;  // absent for no-event runs
  std::optional<Slot> tau;
  std::optional<std::size_t> isolated_region;
  bool false_isolation = false;
};

// Mean stopping slot with no event. Censored runs enter at the horizon.
EstimateWithCI estimate_arl2fa(Procedure proc, const DetectionPartition& partition,
                               const Deployment& dep, const RangeParams& ranges, double c,
                               const McSettings& mc, std::vector<TrialRecord>* log = nullptr);

// Several (procedure, threshold) pairs on shared paths; each result equals the
// single-pair estimate with the same settings.
std::vector<EstimateWithCI> estimate_arl2fa_batch(const std::vector<PathEvaluator::Item>& items,
                                                  const DetectionPartition& partition,
                                                  const Deployment& dep, const RangeParams& ranges,
                                                  const McSettings& mc,
                                                  std::vector<std::vector<TrialRecord>>* logs = nullptr);

struct EventEstimates {
  EstimateWithCI sadd;           // max over regions of the mean delay
  EstimateWithCI pfi;            // max over scenarios and wrong regions j of P{L = j}
  EstimateWithCI pfi_total;      // max over scenarios of P{L wrong}
  std::optional<std::size_t> pfi_wrong_region;
  std::vector<EstimateWithCI> sadd_by_region;
};

struct EventSettings {
  Placement placement = Placement::Reference;
  DelayMode delay_mode = DelayMode::Isolation;
};

// Event at slot 1 in every region. Delay counts post-change samples, tau - T + 1.
// Isolation mode measures the first slot at which a region whose sensors all
// lie in the event's cover set fires; alarm mode uses the global tau.
EventEstimates estimate_event_metrics(Procedure proc, const DetectionPartition& partition,
                                      const Deployment& dep, const RangeParams& ranges, double c,
                                      const McSettings& mc, const EventSettings& ev,
                                      std::vector<TrialRecord>* log = nullptr);

std::vector<EventEstimates> estimate_event_batch(const std::vector<PathEvaluator::Item>& items,
                                                 const DetectionPartition& partition,
                                                 const Deployment& dep, const RangeParams& ranges,
                                                 const McSettings& mc, const EventSettings& ev,
                                                 std::vector<std::vector<TrialRecord>>* logs = nullptr);

EstimateWithCI estimate_sadd(Procedure proc, const DetectionPartition& partition,
                             const Deployment& dep, const RangeParams& ranges, double c,
                             const McSettings& mc, const EventSettings& ev);

// Per-hypothesis false isolation, Wilson interval. A partition with no wrong
// answer reports exactly 0.
EstimateWithCI estimate_pfi(Procedure proc, const DetectionPartition& partition,
                            const Deployment& dep, const RangeParams& ranges, double c,
                            const McSettings& mc, const EventSettings& ev);

struct CalibrationOptions {
  double tolerance = 0.05;
  double lo = 0.1;
  double hi = 50.0;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::uint64_t max_runs = 4000;
  int max_iterations = 60;
};

struct Calibration {
  double c;
  EstimateWithCI estimate;
  int iterations;
};

Calibration calibrate_threshold(Procedure proc, const DetectionPartition& partition,
                                const Deployment& dep, const RangeParams& ranges,
                                double target_gamma, const CalibrationOptions& opt);

}  // namespace wsnqd
