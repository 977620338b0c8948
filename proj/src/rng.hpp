#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace hdcal {

// All randomness in the library flows through explicitly seeded Rng values.
// No global state; identical seeds give identical streams on every run.
//
// The engine is std::mt19937_64 (a fully specified, portable sequence) but the
// value transforms below are hand-rolled so results do not depend on the
// standard library's unspecified distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 significant bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (fresh pair each call keeps the stream
  // layout independent of call history parity at the cost of one draw).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    // rejection sampling to avoid modulo bias
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return v % n;
  }

  // Derive an independent child stream. Deterministic in (parent seed, label);
  // used to give repeats / samples / steps their own reproducible streams.
  Rng split(uint64_t label) {
    uint64_t x = eng_() ^ (0x9e3779b97f4a7c15ULL * (label + 1));
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x = x ^ (x >> 31);
    return Rng(x);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hdcal
