#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace psrl::rng {

// SplitMix64 finalizer. Used both as a PRNG step and as the stream-derivation
// hash so that every (seed, index...) pair owns an independent stream.
inline std::uint64_t splitmix64(std::uint64_t state) {
  std::uint64_t z = state + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t id) {
  return splitmix64(seed ^ splitmix64(id + 0x51'7c'c1'b7'27'22'0a'95ULL));
}

template <class... Ids>
std::uint64_t derive(std::uint64_t seed, std::uint64_t id, Ids... rest) {
  return derive(derive(seed, id), rest...);
}

// Strictly inside (0,1).
inline double to_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

// Counter-based draws: stateless, so planner particles evaluated on any
// thread in any order produce identical noise.
inline double counter_uniform(std::uint64_t key, std::uint64_t counter) {
  return to_unit(derive(key, counter));
}

inline double counter_gaussian(std::uint64_t key, std::uint64_t counter) {
  const double u1 = counter_uniform(key, 2 * counter);
  const double u2 = counter_uniform(key, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64{seed}; }

// Distributions are constructed per call: no hidden state survives a
// checkpoint boundary, and draw sequences depend only on the engine state.
inline double normal(std::mt19937_64& eng, double mean = 0.0, double stddev = 1.0) {
  std::normal_distribution<double> d(mean, stddev);
  return d(eng);
}

inline double uniform(std::mt19937_64& eng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(eng);
}

inline std::string engine_state(const std::mt19937_64& eng) {
  std::ostringstream os;
  os << eng;
  return os.str();
}

inline void restore_engine(std::mt19937_64& eng, const std::string& state) {
  std::istringstream is(state);
  is >> eng;
}

}  // namespace psrl::rng
