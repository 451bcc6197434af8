#include "wsnqd/random.hpp"

namespace wsnqd {

namespace {

// SplitMix64 finaliser; decorrelates nearby keys before they seed the engine.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t scenario, std::uint64_t trial) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ scenario);
  return mix(h ^ trial);
}

}  // namespace

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t scenario, std::uint64_t trial)
    : engine_(stream_key(seed, scenario, trial)), dist_(0.0, 1.0) {}

}  // namespace wsnqd
