#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wsnqd {

enum class LocalRule { Max, All, Hall };

std::string to_string(LocalRule rule);
LocalRule parse_local_rule(std::string_view name);  // "MAX", "ALL", "HALL"

// Affine form of the Gaussian log-likelihood ratio: z = scale * x + offset.
struct LlrMap {
  double scale = 1.0;
  double offset = -0.5;

  double operator()(double x) const { return scale * x + offset; }
};

// ln f1(x)/f0(x) for f0 = N(0, sigma^2), f1 = N(h_e * rho_rd, sigma^2).
LlrMap make_llr(double h_e, double sigma, double rho_rd);
double llr(double x, double h_e, double sigma, double rho_rd);

struct CusumState {
  double c_stat = 0.0;
  bool crossed_once = false;
  bool in_excursion = false;
  double threshold = 1.0;
};

inline CusumState cusum_step(CusumState s, double z) {
  s.c_stat = s.c_stat + z > 0.0 ? s.c_stat + z : 0.0;
  if (s.c_stat >= s.threshold) {
    s.crossed_once = true;
    s.in_excursion = true;
  } else if (s.c_stat == 0.0) {
    s.in_excursion = false;
  }
  return s;
}

inline bool local_decision(const CusumState& s, LocalRule rule) {
  switch (rule) {
    case LocalRule::Max: return s.crossed_once;
    case LocalRule::All: return s.c_stat >= s.threshold;
    case LocalRule::Hall: return s.in_excursion;
  }
  return false;
}

// One CUSUM per sensor sharing a threshold and an LLR map.
class DetectorBank {
 public:
  DetectorBank(std::size_t n_sensors, double threshold, LlrMap llr);

  void reset();
  // Feeds one observation per sensor.
  void step(std::span<const double> x) {
    for (std::size_t s = 0; s < states_.size(); ++s) states_[s] = cusum_step(states_[s], llr_(x[s]));
  }
  void step_llr(std::span<const double> z) {
    for (std::size_t s = 0; s < states_.size(); ++s) states_[s] = cusum_step(states_[s], z[s]);
  }

  bool decision(std::size_t sensor, LocalRule rule) const {
    return local_decision(states_[sensor], rule);
  }
  const CusumState& state(std::size_t sensor) const { return states_[sensor]; }
  std::size_t size() const { return states_.size(); }
  const LlrMap& llr_map() const { return llr_; }

 private:
  std::vector<CusumState> states_;
  LlrMap llr_;
  double threshold_;
};

}  // namespace wsnqd
