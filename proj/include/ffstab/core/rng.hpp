// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace ffstab {

// Seeded generator with platform-stable value mapping (mt19937_64 output is
// pinned by the standard; the [0,1) mapping avoids distribution objects,
// whose streams are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() { return (eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) { return n ? eng_() % n : 0; }
  double sign() { return (eng_() & 1u) ? 1.0 : -1.0; }
  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ffstab
