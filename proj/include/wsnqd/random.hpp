#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cstdint>
#include <string>

namespace wsnqd {

// Name accepted by the config's rng key.
inline constexpr const char* kRngName = "mt19937_64";

// Standard-normal stream keyed by (seed, scenario, trial). A trial draws its
// sensors from one stream in sensor order, slot after slot.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t scenario, std::uint64_t trial);

  double normal() { return dist_(engine_); }
  boost::random::mt19937_64& engine() { return engine_; }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> dist_;
};

}  // namespace wsnqd
