#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wsnqd/fusion.hpp"
#include "wsnqd/geometry.hpp"

namespace wsnqd {

double kl_gaussian(double mu, double sigma);

// Boolean model: |N_i xor N_j| * kl_unit.
double kl_between_hypotheses(const DetectionPartition& partition, std::size_t i, std::size_t j,
                             double kl_unit);

struct MinimalSetConstant {
  std::size_t m_arl = 0;
  std::vector<std::size_t> minimal_family;  // region ids, ascending
};

MinimalSetConstant minimal_set_constant(const DetectionPartition& partition);

// One (i, event location, j) triple with N_j not inside the event's cover set.
struct ViolatingPair {
  std::size_t i;
  std::size_t j;
  std::size_t m_ji;  // |N_j \ N(l_e)|
};

// Boolean: all (i, j) with N_j not a subset of N_i. Path-loss: cover sets taken
// at every grid sample of each region, deduplicated by (i, j, m_ji).
std::vector<ViolatingPair> violating_pairs(const DetectionPartition& partition,
                                           const Deployment& dep, const RangeParams& ranges);

struct PfiConstants {
  std::size_t m_pfi = 0;
  std::size_t m_bar_pfi = 0;
};

// nullopt when no violating pair exists (the PFI bound does not apply).
std::optional<PfiConstants> pfi_constants(const DetectionPartition& partition,
                                          const Deployment& dep, const RangeParams& ranges);

struct BoundConstants {
  std::size_t m_arl = 0;
  std::optional<std::size_t> m_pfi;
  std::optional<std::size_t> m_bar_pfi;
  double xi = 2.0;
  double omega0_lower = 1.0;
  std::size_t n = 0;
  std::size_t n_lower = 0;  // smallest |N_i|
  double delta = 0.01;
  double kl = 0.5;  // KL(f1, f0), the alpha of the PFI constants
  double a_max = 0, a_hall = 0, a_all = 0;
  double b_max = 0, b_hall = 0, b_all = 0;
  double big_k = 1.0;  // geometric factor, 1 for Boolean
  double big_b_max = 0, big_b_hall = 0, big_b_all = 0;
  bool pfi_applicable = false;
  bool powerlaw = false;

  double a(LocalRule rule) const;
  double b(LocalRule rule) const;
  double big_b(LocalRule rule) const;
};

BoundConstants bound_constants(const DetectionPartition& partition, const Deployment& dep,
                               const RangeParams& ranges, double delta = 0.01);

struct BoundValue {
  double value;
  bool vacuous;  // exponent <= 0 or constants not applicable
};

// exp(a_rule * c), dropping the (1 + o(1)) factor.
BoundValue arl2fa_lower_bound(LocalRule rule, double c, const BoundConstants& k);
// exp(-b_rule * c) / B_rule.
BoundValue pfi_upper_bound(LocalRule rule, double c, const BoundConstants& k);
double sadd_upper_bound(double c, double kl_unit);

// max(ln gamma / a_rule, -ln alpha / b_rule). Throws DomainError when b_rule <= 0.
double threshold_for_targets(double gamma, double alpha, const BoundConstants& k, LocalRule rule);

// (1/KL) max(ln gamma / a_rule, -ln alpha / b_rule).
double sadd_target_bound(double gamma, double alpha, const BoundConstants& k, LocalRule rule);

// Centralized benchmark: max(ln gamma / min_i KL(g_i, g_0), -ln alpha / min_{i != j} KL(g_i, g_j)).
double centralized_sadd_bound(const DetectionPartition& partition, double gamma, double alpha,
                              double kl_unit);

// E[Z] for a sensor at distance d from the event.
double mean_drift(const Deployment& dep, const RangeParams& ranges, double d);
// exp(omega0 c), omega0 = 1 - 2 rho(d)/rho(r_d); requires 2 rho(d) < rho(r_d).
double escape_time_lower_bound(const Deployment& dep, const RangeParams& ranges, double c, double d);
// exp(-omega0_lower c / 2) q / (1 - q), q = exp(-KL omega0_lower^2 / 4).
double cusum_tail_bound(double c, double omega0_lower, double kl_unit);

}  // namespace wsnqd
