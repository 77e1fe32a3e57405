#pragma once

#include <cmath>
#include <cstdint>

namespace projfilt {

// Counter-based normal generator. Every draw is a pure function of
// (seed, stream, index), so signal simulation, filters and Monte Carlo
// workers can consume the same increments independently of evaluation
// order, and any stored path can be replayed bit-exactly.
class CounterRng {
 public:
  static CounterRng derive(std::uint64_t seed, std::uint64_t stream) {
    return CounterRng(mix(seed ^ 0x7f4a7c15u, stream));
  }

  double uniform(std::uint64_t index) const { return to_unit(mix(key_, index)); }

  /// Standard normal draw at the given counter position.
  double normal(std::uint64_t index) const {
    const double u1 = to_unit(mix(key_, 2 * index));
    const double u2 = to_unit(mix(key_, 2 * index + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // splitmix64 finalizer over a golden-ratio keyed counter
  static std::uint64_t mix(std::uint64_t key, std::uint64_t counter) {
    std::uint64_t z = key + 0x9e3779b97f4a7c15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // (0,1), never returns an endpoint
  static double to_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  std::uint64_t key_;
};

}  // namespace projfilt
