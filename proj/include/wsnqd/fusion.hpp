#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsnqd/detection.hpp"
#include "wsnqd/geometry.hpp"

namespace wsnqd {

using Slot = std::uint64_t;

// The three distributed fusion rules plus the centralized matrix CUSUM.
enum class Procedure { Max, Hall, All, Centralized };

std::string to_string(Procedure p);
Procedure parse_procedure(std::string_view name);  // MAX, HALL, ALL, CENTRALIZED
std::optional<LocalRule> local_rule_of(Procedure p);

class ObservationSource {
 public:
  virtual ~ObservationSource() = default;
  virtual std::size_t size() const = 0;
  // Writes the slot's observation for every sensor into x.
  virtual void next(std::span<double> x) = 0;
};

// Plays back fixed rows, then zeros.
class ReplaySource : public ObservationSource {
 public:
  explicit ReplaySource(std::vector<std::vector<double>> rows);
  std::size_t size() const override { return width_; }
  void next(std::span<double> x) override;

 private:
  std::vector<std::vector<double>> rows_;
  std::size_t width_;
  std::size_t pos_ = 0;
};

struct ProcedureOutcome {
  std::optional<Slot> tau;
  Slot horizon = 0;
  std::optional<std::size_t> isolated_region;
  std::map<std::size_t, Slot> per_set_tau;

  bool censored() const { return !tau.has_value(); }
};

// Sequential test over the partition's hypotheses, advanced one slot at a time.
class SequentialProcedure {
 public:
  virtual ~SequentialProcedure() = default;
  virtual void reset() = 0;
  // Region ids whose stopping condition holds at this slot, ascending.
  virtual const std::vector<std::size_t>& step(std::span<const double> x) = 0;
  virtual std::size_t n_sensors() const = 0;
};

class DistributedProcedure : public SequentialProcedure {
 public:
  DistributedProcedure(LocalRule rule, const DetectionPartition& partition, LlrMap llr, double c);

  void reset() override;
  const std::vector<std::size_t>& step(std::span<const double> x) override;
  std::size_t n_sensors() const override { return bank_.size(); }
  const DetectorBank& bank() const { return bank_; }

 private:
  LocalRule rule_;
  DetectorBank bank_;
  std::size_t words_;
  std::vector<std::uint64_t> member_masks_;  // words_ per region
  std::vector<std::uint64_t> decisions_;
  std::vector<std::size_t> firing_;
};

class MatrixCusum : public SequentialProcedure {
 public:
  MatrixCusum(const DetectionPartition& partition, LlrMap llr, double c);

  void reset() override;
  const std::vector<std::size_t>& step(std::span<const double> x) override;
  std::size_t n_sensors() const override { return n_sensors_; }
  // W[i][j], j = 0 is the no-change hypothesis and j = i + 1 is region i.
  double stat(std::size_t i, std::size_t j) const { return w_[i * (n_ + 1) + j]; }

 private:
  std::vector<SensorSet> sets_;
  std::size_t n_;
  std::size_t n_sensors_;
  LlrMap llr_;
  double c_;
  std::vector<double> w_;
  std::vector<double> sums_;
  std::vector<double> z_;
  std::vector<std::size_t> firing_;
};

std::unique_ptr<SequentialProcedure> make_procedure(Procedure p, const DetectionPartition& partition,
                                                    const Deployment& dep, LlrMap llr, double c);

// Runs until a region fires or the horizon passes. If `accept` is given, keeps
// running until an accepted region fires; tau and the isolated region still
// record the first firing of any region. per_set_tau holds each region's first
// firing slot up to the stop.
struct TrackedOutcome {
  ProcedureOutcome outcome;
  std::optional<Slot> accepted_tau;
  std::optional<std::size_t> accepted_region;
};

TrackedOutcome run_tracked(SequentialProcedure& proc, ObservationSource& src, Slot horizon,
                           const std::vector<bool>* accept = nullptr);

ProcedureOutcome run_procedure(SequentialProcedure& proc, ObservationSource& src, Slot horizon);

ProcedureOutcome run_distributed(LocalRule rule, const DetectionPartition& partition, LlrMap llr,
                                 ObservationSource& src, double c, Slot horizon);

// Boolean sensing only; throws UnsupportedModelError otherwise.
ProcedureOutcome run_centralized_matrix_cusum(const DetectionPartition& partition,
                                              const Deployment& dep, LlrMap llr,
                                              ObservationSource& src, double c, Slot horizon);

// Runs many (procedure, threshold) pairs over one observation path. Every
// stopping rule reduces to comparing a per-region score with c: the minimum
// over members of the running CUSUM maximum (MAX), of the maximum within the
// current excursion from zero (HALL), of the statistic itself (ALL), or
// min_j W[i][j] (centralized). The scores do not depend on c, so the outcome of
// each pair equals that of a dedicated run on the same path.
class PathEvaluator {
 public:
  struct Item {
    Procedure proc;
    double c;
  };

  PathEvaluator(const DetectionPartition& partition, LlrMap llr, std::vector<Item> items);

  // Same stopping semantics as run_tracked, one result per item.
  std::vector<TrackedOutcome> run(ObservationSource& src, Slot horizon,
                                  const std::vector<bool>* accept = nullptr);

 private:
  std::vector<std::size_t> members_;  // all regions' sensors, back to back
  std::vector<std::size_t> offsets_;  // region i owns members_[offsets_[i], offsets_[i + 1])
  std::size_t n_sensors_;
  LlrMap llr_;
  std::vector<Item> items_;
};

bool is_false_isolation(const DetectionPartition& partition, const Deployment& dep,
                        const RangeParams& ranges, Point event_location, std::size_t isolated);

}  // namespace wsnqd
