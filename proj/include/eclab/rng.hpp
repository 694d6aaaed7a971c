#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace eclab {

/// One splitmix64 step. Used for seed mixing and sub-stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic random source. Every stochastic operation in the library
/// receives an explicit seed; the same seed always produces the same stream.
/// Normal variates use Box-Muller on top of mt19937_64 so the mapping from
/// seed to samples is fixed by this file, not by the standard library's
/// unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in (0, 1]; never returns 0 so log() is always safe.
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Derives an independent sub-stream seed from a master seed and a key
  /// path. Parallel callers must use distinct key paths.
  template <class... Keys>
  static std::uint64_t derive(std::uint64_t master, Keys... keys) {
    std::uint64_t s = master;
    ((s = derive_one(s, static_cast<std::uint64_t>(keys))), ...);
    return s;
  }

 private:
  static std::uint64_t derive_one(std::uint64_t s, std::uint64_t key) {
    std::uint64_t state = s ^ (0xd1b54a32d192ed03ull * (key + 1));
    return splitmix64(state);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace eclab
