#include "wsnqd/detection.hpp"

#include <algorithm>
#include <cctype>

#include "wsnqd/error.hpp"

namespace wsnqd {

std::string to_string(LocalRule rule) {
  switch (rule) {
    case LocalRule::Max: return "MAX";
    case LocalRule::All: return "ALL";
    case LocalRule::Hall: return "HALL";
  }
  return "?";
}

LocalRule parse_local_rule(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "MAX") return LocalRule::Max;
  if (up == "ALL") return LocalRule::All;
  if (up == "HALL") return LocalRule::Hall;
  throw ConfigError("unknown local rule '" + std::string(name) + "'");
}

LlrMap make_llr(double h_e, double sigma, double rho_rd) {
  if (!(sigma > 0.0)) throw DomainError("llr: sigma must be positive");
  const double mu = h_e * rho_rd;
  const double var = sigma * sigma;
  return {mu / var, -mu * mu / (2.0 * var)};
}

double llr(double x, double h_e, double sigma, double rho_rd) {
  return make_llr(h_e, sigma, rho_rd)(x);
}

DetectorBank::DetectorBank(std::size_t n_sensors, double threshold, LlrMap llr)
    : states_(n_sensors), llr_(llr), threshold_(threshold) {
  reset();
}

void DetectorBank::reset() {
  for (auto& s : states_) s = CusumState{0.0, false, false, threshold_};
}

}  // namespace wsnqd
