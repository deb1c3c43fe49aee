#pragma once

#include <cmath>
#include <cstdint>

namespace msde {

// 64-bit finalizer (murmur3 fmix64). Bijective, good avalanche.
inline uint64_t mix64(uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

inline double u64_to_unit(uint64_t x) {
  // 53 mantissa bits -> [0,1)
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Sequential generator for sampling grids and shuffles (not for trajectory noise).
struct SplitMix {
  uint64_t state;

  explicit SplitMix(uint64_t seed) : state(seed) {}

  uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    return mix64(state);
  }
  double uniform() { return u64_to_unit(next()); }
  // uniform in (-1,1)^n rejected to the open unit ball
  template <class VecT>
  void unit_ball(int d, VecT& out) {
    out.assign(d, 0.0);
    for (;;) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        out[i] = 2.0 * uniform() - 1.0;
        s += out[i] * out[i];
      }
      if (s < 1.0) return;
    }
  }
  double gaussian() {
    // Box-Muller, one value per call (discard the pair partner)
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }
};

// Stateless counter PRF: every Gaussian increment is a pure function of
// (seed, trajectory, step, component), so trajectories are bit-reproducible
// independent of evaluation order and worker count.
struct CounterRng {
  uint64_t key;

  CounterRng(uint64_t seed, uint64_t trajectory)
      : key(mix64(seed ^ mix64(trajectory + 0x517cc1b727220a95ULL))) {}

  double gaussian(uint64_t step, uint64_t component) const {
    const uint64_t h =
        mix64(key ^ mix64(step * 0x9e3779b97f4a7c15ULL + component + 0x2545f4914f6cdd1dULL));
    const double u1 = 1.0 - u64_to_unit(h);  // (0,1]
    const double u2 = u64_to_unit(mix64(h ^ 0xda942042e4dd58b5ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }
};

}  // namespace msde
