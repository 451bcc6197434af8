#include "wsnqd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "wsnqd/error.hpp"

namespace wsnqd {

double kl_gaussian(double mu, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("kl_gaussian: sigma must be positive");
  return mu * mu / (2.0 * sigma * sigma);
}

double kl_between_hypotheses(const DetectionPartition& partition, std::size_t i, std::size_t j,
                             double kl_unit) {
  return static_cast<double>(symmetric_difference_size(partition.region(i).sensors,
                                                       partition.region(j).sensors)) *
         kl_unit;
}

MinimalSetConstant minimal_set_constant(const DetectionPartition& partition) {
  if (partition.regions.empty()) throw ConfigError("partition has no regions");
  MinimalSetConstant out;
  const auto& rs = partition.regions;
  for (const auto& r : rs) {
    bool minimal = true;
    for (const auto& q : rs)
      if (q.id != r.id && is_subset(q.sensors, r.sensors)) minimal = false;
    if (minimal) out.minimal_family.push_back(r.id);
  }
  out.m_arl = std::numeric_limits<std::size_t>::max();
  for (auto i : out.minimal_family) {
    std::size_t own = 0;
    for (auto s : rs[i].sensors) {
      bool shared = false;
      for (auto j : out.minimal_family)
        if (j != i && std::binary_search(rs[j].sensors.begin(), rs[j].sensors.end(), s))
          shared = true;
      if (!shared) ++own;
    }
    out.m_arl = std::min(out.m_arl, own);
  }
  return out;
}

std::vector<ViolatingPair> violating_pairs(const DetectionPartition& partition,
                                           const Deployment& dep, const RangeParams& ranges) {
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  const auto& rs = partition.regions;
  auto visit = [&](std::size_t i, const SensorSet& cover) {
    for (const auto& rj : rs)
      if (!is_subset(rj.sensors, cover))
        seen.emplace(i, rj.id, difference_size(rj.sensors, cover));
  };
  for (const auto& ri : rs) {
    if (dep.model.kind == SensingKind::Boolean) {
      visit(ri.id, ri.sensors);
      continue;
    }
    std::set<SensorSet> covers;
    for (const auto& p : ri.samples) covers.insert(influence_cover_set(dep, ranges, p));
    for (const auto& cover : covers) visit(ri.id, cover);
  }
  std::vector<ViolatingPair> out;
  for (const auto& [i, j, m] : seen) out.push_back({i, j, m});
  return out;
}

std::optional<PfiConstants> pfi_constants(const DetectionPartition& partition,
                                          const Deployment& dep, const RangeParams& ranges) {
  const auto pairs = violating_pairs(partition, dep, ranges);
  if (pairs.empty()) return std::nullopt;
  PfiConstants k{std::numeric_limits<std::size_t>::max(), 0};
  for (const auto& p : pairs) {
    k.m_pfi = std::min(k.m_pfi, p.m_ji);
    k.m_bar_pfi = std::max(k.m_bar_pfi, p.m_ji);
  }
  return k;
}

double BoundConstants::a(LocalRule rule) const {
  switch (rule) {
    case LocalRule::Max: return a_max;
    case LocalRule::Hall: return a_hall;
    case LocalRule::All: return a_all;
  }
  return 0.0;
}

double BoundConstants::b(LocalRule rule) const {
  switch (rule) {
    case LocalRule::Max: return b_max;
    case LocalRule::Hall: return b_hall;
    case LocalRule::All: return b_all;
  }
  return 0.0;
}

double BoundConstants::big_b(LocalRule rule) const {
  switch (rule) {
    case LocalRule::Max: return big_b_max;
    case LocalRule::Hall: return big_b_hall;
    case LocalRule::All: return big_b_all;
  }
  return 0.0;
}

BoundConstants bound_constants(const DetectionPartition& partition, const Deployment& dep,
                               const RangeParams& ranges, double delta) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  BoundConstants k;
  k.delta = delta;
  k.n = dep.size();
  k.powerlaw = dep.model.kind == SensingKind::PowerLaw;
  k.xi = k.powerlaw ? 1.0 : 2.0;
  k.omega0_lower = k.powerlaw ? ranges.omega0_lower : 1.0;
  k.kl = kl_gaussian(dep.h_e * rho(dep.model, ranges.r_d), dep.sigma);
  k.m_arl = minimal_set_constant(partition).m_arl;
  k.n_lower = std::numeric_limits<std::size_t>::max();
  for (const auto& r : partition.regions) k.n_lower = std::min(k.n_lower, r.sensors.size());

  k.a_max = k.a_hall = 1.0 - delta;
  k.a_all = static_cast<double>(k.m_arl) - delta;

  const auto pairs = violating_pairs(partition, dep, ranges);
  k.pfi_applicable = !pairs.empty();
  if (!k.pfi_applicable) return k;

  std::size_t m = std::numeric_limits<std::size_t>::max(), m_bar = 0;
  for (const auto& p : pairs) {
    m = std::min(m, p.m_ji);
    m_bar = std::max(m_bar, p.m_ji);
  }
  k.m_pfi = m;
  k.m_bar_pfi = m_bar;
  const double n = static_cast<double>(k.n);
  const double lead = static_cast<double>(m) * k.xi * k.omega0_lower / 2.0;
  k.b_max = k.b_hall = lead - (1.0 + static_cast<double>(m_bar)) / n;
  k.b_all = lead - 1.0 / n;

  double alpha_max = std::numeric_limits<double>::infinity();
  double alpha_hall = std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    const double e = 1.0 + static_cast<double>(p.m_ji);
    const double ni = static_cast<double>(partition.region(p.i).sensors.size());
    alpha_max = std::min(alpha_max, std::pow(k.kl, e));
    alpha_hall = std::min(alpha_hall, std::pow(k.kl * ni, e));
  }
  if (k.powerlaw) {
    const double q = std::exp(-k.kl * k.omega0_lower * k.omega0_lower / 4.0);
    const double ratio = q / (1.0 - q);
    k.big_k = 0.0;
    for (const auto& p : pairs)
      k.big_k = std::max(k.big_k, std::pow(ratio, static_cast<double>(p.m_ji)));
  }
  k.big_b_all = static_cast<double>(k.n_lower) * k.kl / k.big_k;
  k.big_b_max = alpha_max / k.big_k;
  k.big_b_hall = alpha_hall / k.big_k;
  return k;
}

BoundValue arl2fa_lower_bound(LocalRule rule, double c, const BoundConstants& k) {
  if (!(c >= 0.0)) throw DomainError("threshold must be non-negative");
  const double a = k.a(rule);
  return {std::exp(a * c), a <= 0.0};
}

BoundValue pfi_upper_bound(LocalRule rule, double c, const BoundConstants& k) {
  if (!(c >= 0.0)) throw DomainError("threshold must be non-negative");
  if (!k.pfi_applicable) return {0.0, true};
  const double b = k.b(rule);
  return {std::exp(-b * c) / k.big_b(rule), b <= 0.0};
}

double sadd_upper_bound(double c, double kl_unit) {
  if (!(kl_unit > 0.0)) throw DomainError("sadd_upper_bound: KL must be positive");
  return c / kl_unit;
}

double threshold_for_targets(double gamma, double alpha, const BoundConstants& k, LocalRule rule) {
  if (!(gamma > 1.0)) throw DomainError("gamma must exceed 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  const double a = k.a(rule), b = k.b(rule);
  if (!(a > 0.0)) throw DomainError(to_string(rule) + ": ARL2FA exponent is not positive");
  if (!k.pfi_applicable) return std::log(gamma) / a;
  if (!(b > 0.0)) throw DomainError(to_string(rule) + ": PFI exponent is not positive");
  return std::max(std::log(gamma) / a, -std::log(alpha) / b);
}

double sadd_target_bound(double gamma, double alpha, const BoundConstants& k, LocalRule rule) {
  return threshold_for_targets(gamma, alpha, k, rule) / k.kl;
}

double centralized_sadd_bound(const DetectionPartition& partition, double gamma, double alpha,
                              double kl_unit) {
  if (!(kl_unit > 0.0)) throw DomainError("KL must be positive");
  std::size_t a_star = std::numeric_limits<std::size_t>::max();
  std::size_t b_star = std::numeric_limits<std::size_t>::max();
  for (const auto& ri : partition.regions) {
    a_star = std::min(a_star, ri.sensors.size());
    for (const auto& rj : partition.regions)
      if (ri.id != rj.id) b_star = std::min(b_star, symmetric_difference_size(ri.sensors, rj.sensors));
  }
  double out = std::log(gamma) / (static_cast<double>(a_star) * kl_unit);
  if (partition.size() > 1)
    out = std::max(out, -std::log(alpha) / (static_cast<double>(b_star) * kl_unit));
  return out;
}

double mean_drift(const Deployment& dep, const RangeParams& ranges, double d) {
  const double rho_rd = rho(dep.model, ranges.r_d);
  const double mu = dep.h_e * rho_rd;
  return mu * mu / (2.0 * dep.sigma * dep.sigma) * (2.0 * rho(dep.model, d) / rho_rd - 1.0);
}

double escape_time_lower_bound(const Deployment& dep, const RangeParams& ranges, double c, double d) {
  const double ratio = rho(dep.model, d) / rho(dep.model, ranges.r_d);
  if (!(2.0 * ratio < 1.0))
    throw DomainError("escape_time_lower_bound: needs 2 rho(d) < rho(r_d)");
  return std::exp((1.0 - 2.0 * ratio) * c);
}

double cusum_tail_bound(double c, double omega0_lower, double kl_unit) {
  const double q = std::exp(-kl_unit * omega0_lower * omega0_lower / 4.0);
  return std::exp(-omega0_lower * c / 2.0) * q / (1.0 - q);
}

}  // namespace wsnqd
