#include "wsnqd/fusion.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "wsnqd/error.hpp"

namespace wsnqd {

std::string to_string(Procedure p) {
  switch (p) {
    case Procedure::Max: return "MAX";
    case Procedure::Hall: return "HALL";
    case Procedure::All: return "ALL";
    case Procedure::Centralized: return "CENTRALIZED";
  }
  return "?";
}

Procedure parse_procedure(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "CENTRALIZED") return Procedure::Centralized;
  switch (parse_local_rule(up)) {
    case LocalRule::Max: return Procedure::Max;
    case LocalRule::Hall: return Procedure::Hall;
    case LocalRule::All: return Procedure::All;
  }
  return Procedure::Max;
}

std::optional<LocalRule> local_rule_of(Procedure p) {
  switch (p) {
    case Procedure::Max: return LocalRule::Max;
    case Procedure::Hall: return LocalRule::Hall;
    case Procedure::All: return LocalRule::All;
    case Procedure::Centralized: return std::nullopt;
  }
  return std::nullopt;
}

ReplaySource::ReplaySource(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  width_ = rows_.empty() ? 0 : rows_.front().size();
  for (const auto& r : rows_)
    if (r.size() != width_) throw ConfigError("replay rows must have equal width");
}

void ReplaySource::next(std::span<double> x) {
  if (pos_ < rows_.size()) {
    std::copy(rows_[pos_].begin(), rows_[pos_].end(), x.begin());
    ++pos_;
  } else {
    std::fill(x.begin(), x.end(), 0.0);
  }
}

namespace {

void require_regions(const DetectionPartition& partition) {
  if (partition.regions.empty()) throw ConfigError("partition has no regions");
}

}  // namespace

DistributedProcedure::DistributedProcedure(LocalRule rule, const DetectionPartition& partition,
                                           LlrMap llr, double c)
    : rule_(rule), bank_(partition.n_sensors, c, llr), words_((partition.n_sensors + 63) / 64) {
  require_regions(partition);
  if (!(c > 0.0)) throw DomainError("threshold must be positive");
  member_masks_.assign(partition.size() * words_, 0);
  for (const auto& r : partition.regions)
    for (auto s : r.sensors) member_masks_[r.id * words_ + s / 64] |= std::uint64_t{1} << (s % 64);
  decisions_.assign(words_, 0);
  firing_.reserve(partition.size());
}

void DistributedProcedure::reset() { bank_.reset(); }

const std::vector<std::size_t>& DistributedProcedure::step(std::span<const double> x) {
  bank_.step(x);
  std::fill(decisions_.begin(), decisions_.end(), 0);
  const std::size_t n = bank_.size();
  auto collect = [&](auto&& decide) {
    for (std::size_t s = 0; s < n; ++s)
      decisions_[s / 64] |= std::uint64_t{decide(bank_.state(s))} << (s % 64);
  };
  switch (rule_) {
    case LocalRule::Max: collect([](const CusumState& c) { return c.crossed_once; }); break;
    case LocalRule::Hall: collect([](const CusumState& c) { return c.in_excursion; }); break;
    case LocalRule::All: collect([](const CusumState& c) { return c.c_stat >= c.threshold; }); break;
  }
  firing_.clear();
  const std::size_t n_regions = member_masks_.size() / words_;
  if (words_ == 1) {
    const auto d = decisions_[0];
    for (std::size_t i = 0; i < n_regions; ++i)
      if ((d & member_masks_[i]) == member_masks_[i]) firing_.push_back(i);
    return firing_;
  }
  for (std::size_t i = 0; i < n_regions; ++i) {
    bool all = true;
    for (std::size_t w = 0; w < words_ && all; ++w) {
      const auto m = member_masks_[i * words_ + w];
      all = (decisions_[w] & m) == m;
    }
    if (all) firing_.push_back(i);
  }
  return firing_;
}

MatrixCusum::MatrixCusum(const DetectionPartition& partition, LlrMap llr, double c)
    : n_(partition.size()), n_sensors_(partition.n_sensors), llr_(llr), c_(c) {
  require_regions(partition);
  if (!(c > 0.0)) throw DomainError("threshold must be positive");
  for (const auto& r : partition.regions) sets_.push_back(r.sensors);
  w_.assign(n_ * (n_ + 1), 0.0);
  sums_.assign(n_ + 1, 0.0);
  z_.assign(n_sensors_, 0.0);
  firing_.reserve(n_);
}

void MatrixCusum::reset() { std::fill(w_.begin(), w_.end(), 0.0); }

const std::vector<std::size_t>& MatrixCusum::step(std::span<const double> x) {
  for (std::size_t s = 0; s < n_sensors_; ++s) z_[s] = llr_(x[s]);
  // ln g_i / g_j = S_i - S_j with S_i the LLR sum over region i's sensors, S_0 = 0.
  sums_[0] = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (auto s : sets_[i]) acc += z_[s];
    sums_[i + 1] = acc;
  }
  firing_.clear();
  for (std::size_t i = 0; i < n_; ++i) {
    double* row = &w_[i * (n_ + 1)];
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= n_; ++j) {
      if (j == i + 1) continue;
      row[j] = std::max(0.0, row[j] + sums_[i + 1] - sums_[j]);
      lowest = std::min(lowest, row[j]);
    }
    if (lowest >= c_) firing_.push_back(i);
  }
  return firing_;
}

std::unique_ptr<SequentialProcedure> make_procedure(Procedure p, const DetectionPartition& partition,
                                                    const Deployment& dep, LlrMap llr, double c) {
  if (p == Procedure::Centralized) {
    if (dep.model.kind != SensingKind::Boolean)
      throw UnsupportedModelError("centralized matrix CUSUM needs the Boolean sensing model");
    return std::make_unique<MatrixCusum>(partition, llr, c);
  }
  return std::make_unique<DistributedProcedure>(*local_rule_of(p), partition, llr, c);
}

TrackedOutcome run_tracked(SequentialProcedure& proc, ObservationSource& src, Slot horizon,
                           const std::vector<bool>* accept) {
  if (horizon < 1) throw DomainError("horizon must be at least one slot");
  if (src.size() != proc.n_sensors()) throw ConfigError("observation width does not match sensors");
  proc.reset();
  TrackedOutcome t;
  t.outcome.horizon = horizon;
  std::vector<double> x(proc.n_sensors());
  for (Slot k = 1; k <= horizon; ++k) {
    src.next(x);
    const auto& firing = proc.step(x);
    if (firing.empty()) continue;
    for (auto i : firing) t.outcome.per_set_tau.try_emplace(i, k);
    if (!t.outcome.tau) {
      t.outcome.tau = k;
      t.outcome.isolated_region = firing.front();
    }
    if (!accept) break;
    for (auto i : firing) {
      if ((*accept)[i]) {
        t.accepted_tau = k;
        t.accepted_region = i;
        return t;
      }
    }
  }
  return t;
}

ProcedureOutcome run_procedure(SequentialProcedure& proc, ObservationSource& src, Slot horizon) {
  return run_tracked(proc, src, horizon).outcome;
}

ProcedureOutcome run_distributed(LocalRule rule, const DetectionPartition& partition, LlrMap llr,
                                 ObservationSource& src, double c, Slot horizon) {
  DistributedProcedure proc(rule, partition, llr, c);
  return run_procedure(proc, src, horizon);
}

ProcedureOutcome run_centralized_matrix_cusum(const DetectionPartition& partition,
                                              const Deployment& dep, LlrMap llr,
                                              ObservationSource& src, double c, Slot horizon) {
  auto proc = make_procedure(Procedure::Centralized, partition, dep, llr, c);
  return run_procedure(*proc, src, horizon);
}

PathEvaluator::PathEvaluator(const DetectionPartition& partition, LlrMap llr, std::vector<Item> items)
    : n_sensors_(partition.n_sensors), llr_(llr), items_(std::move(items)) {
  require_regions(partition);
  offsets_.push_back(0);
  for (const auto& r : partition.regions) {
    members_.insert(members_.end(), r.sensors.begin(), r.sensors.end());
    offsets_.push_back(members_.size());
  }
  for (const auto& it : items_)
    if (!(it.c > 0.0)) throw DomainError("threshold must be positive");
}

std::vector<TrackedOutcome> PathEvaluator::run(ObservationSource& src, Slot horizon,
                                               const std::vector<bool>* accept) {
  if (horizon < 1) throw DomainError("horizon must be at least one slot");
  if (src.size() != n_sensors_) throw ConfigError("observation width does not match sensors");
  const std::size_t n = n_sensors_;
  const std::size_t nr = offsets_.size() - 1;
  constexpr int kinds = 4;
  constexpr int central = static_cast<int>(Procedure::Centralized);

  std::vector<double> x(n), z(n), cstat(n, 0.0), run_max(n, 0.0), exc_max(n, 0.0);
  std::vector<double> w, sums(nr + 1, 0.0), score(kinds * nr, 0.0);
  std::vector<TrackedOutcome> out(items_.size());
  std::vector<char> done(items_.size(), 0);
  std::size_t remaining = items_.size();
  for (auto& o : out) o.outcome.horizon = horizon;
  auto done_flag = [&](std::size_t q) { return done[q] != 0; };
  double best[kinds] = {0, 0, 0, 0};
  int active[kinds] = {0, 0, 0, 0};  // unfinished items per kind
  double min_c[kinds];               // smallest threshold among them
  for (const auto& it : items_) ++active[static_cast<int>(it.proc)];
  if (active[central]) w.assign(nr * (nr + 1), 0.0);
  auto refresh_min_c = [&] {
    std::fill(std::begin(min_c), std::end(min_c), std::numeric_limits<double>::infinity());
    for (std::size_t q = 0; q < items_.size(); ++q) {
      const int kind = static_cast<int>(items_[q].proc);
      if (!done_flag(q)) min_c[kind] = std::min(min_c[kind], items_[q].c);
    }
  };
  refresh_min_c();


  for (Slot k = 1; k <= horizon && remaining > 0; ++k) {
    src.next(x);
    // Largest per-sensor value of each statistic; no region score exceeds it.
    double top_stat[central] = {0, 0, 0};
    for (std::size_t s = 0; s < n; ++s) {
      z[s] = llr_(x[s]);
      const double v = cstat[s] + z[s];
      const double cs = v > 0.0 ? v : 0.0;
      cstat[s] = cs;
      if (cs > run_max[s]) run_max[s] = cs;
      exc_max[s] = cs == 0.0 ? 0.0 : (cs > exc_max[s] ? cs : exc_max[s]);
      top_stat[static_cast<int>(Procedure::Max)] = std::max(top_stat[static_cast<int>(Procedure::Max)], run_max[s]);
      top_stat[static_cast<int>(Procedure::Hall)] = std::max(top_stat[static_cast<int>(Procedure::Hall)], exc_max[s]);
      top_stat[static_cast<int>(Procedure::All)] = std::max(top_stat[static_cast<int>(Procedure::All)], cs);
    }
    for (int kind = 0; kind < central; ++kind) {
      if (!active[kind]) continue;
      if (top_stat[kind] < min_c[kind]) {
        best[kind] = top_stat[kind];
        continue;
      }
      const double* stat = kind == static_cast<int>(Procedure::Max)    ? run_max.data()
                           : kind == static_cast<int>(Procedure::Hall) ? exc_max.data()
                                                                        : cstat.data();
      double top = 0.0;
      for (std::size_t i = 0; i < nr; ++i) {
        double lowest = std::numeric_limits<double>::infinity();
        for (std::size_t m = offsets_[i]; m < offsets_[i + 1]; ++m)
          lowest = stat[members_[m]] < lowest ? stat[members_[m]] : lowest;
        score[kind * nr + i] = lowest;
        top = lowest > top ? lowest : top;
      }
      best[kind] = top;
    }
    if (active[central]) {
      sums[0] = 0.0;
      for (std::size_t i = 0; i < nr; ++i) {
        double acc = 0.0;
        for (std::size_t m = offsets_[i]; m < offsets_[i + 1]; ++m) acc += z[members_[m]];
        sums[i + 1] = acc;
      }
      double top = 0.0;
      for (std::size_t i = 0; i < nr; ++i) {
        double* row = &w[i * (nr + 1)];
        double lowest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j <= nr; ++j) {
          if (j == i + 1) continue;
          row[j] = std::max(0.0, row[j] + sums[i + 1] - sums[j]);
          lowest = std::min(lowest, row[j]);
        }
        score[central * nr + i] = lowest;
        top = std::max(top, lowest);
      }
      best[central] = top;
    }

    for (std::size_t q = 0; q < items_.size(); ++q) {
      if (done[q]) continue;
      const int kind = static_cast<int>(items_[q].proc);
      const double c = items_[q].c;
      if (!(best[kind] >= c)) continue;
      auto& t = out[q];
      for (std::size_t i = 0; i < nr; ++i) {
        if (!(score[kind * nr + i] >= c)) continue;
        t.outcome.per_set_tau.try_emplace(i, k);
        if (!t.outcome.tau) {
          t.outcome.tau = k;
          t.outcome.isolated_region = i;
        }
        if (accept && !t.accepted_tau && (*accept)[i]) {
          t.accepted_tau = k;
          t.accepted_region = i;
        }
      }
      if (!accept || t.accepted_tau) {
        done[q] = 1;
        --remaining;
        --active[kind];
        refresh_min_c();
      }
    }
  }
  return out;
}

bool is_false_isolation(const DetectionPartition& partition, const Deployment& dep,
                        const RangeParams& ranges, Point event_location, std::size_t isolated) {
  const auto cover = influence_cover_set(dep, ranges, event_location);
  return !is_subset(partition.region(isolated).sensors, cover);
}

}  // namespace wsnqd
