// SPDX-License-Identifier: MIT
/// @file rng.hpp
/// @brief Deterministic seeded random source.
///
/// A fixed-algorithm generator (SplitMix64 state advance + Box-Muller normals)
/// is used instead of <random> distributions so identical seeds produce
/// identical streams on every platform and standard library.  The experiment
/// harness's reproducibility guarantee (same config + seed = byte-identical
/// output, regardless of worker count) rests on this plus per-trial derived
/// streams.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "jlbo/config.hpp"

namespace jlbo {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent child stream; children with distinct salts never collide
  /// with each other or the parent regardless of draw order.
  Rng derive(std::uint64_t salt) const {
    Rng child(mix(state_ + 0x9e3779b97f4a7c15ULL * (salt + 1)));
    child.next_u64();
    return child;
  }

  std::uint64_t next_u64() { return mix(state_ += 0x9e3779b97f4a7c15ULL); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal, Box-Muller with pair caching.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * kPi * uniform();
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
  }

  /// Circularly-symmetric complex normal with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance) {
    const double s = std::sqrt(variance / 2.0);
    return {s * normal(), s * normal()};
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace jlbo
