#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace vcsg {

// Deterministic random stream.
//
// The raw std::mt19937_64 output sequence is pinned by the ISO standard, so it
// is identical on every platform and toolchain. Everything shaped like a
// distribution is implemented by hand below, because the std::*_distribution
// algorithms are implementation-defined and would break the byte-identical
// trace contract across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased uniform draw from {0, ..., bound-1} via rejection sampling.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    // Reject the low 2^64 mod bound values so the remainder is exactly uniform.
    const std::uint64_t cutoff = (~bound + 1) % bound;  // 2^64 mod bound
    std::uint64_t r = next_u64();
    while (r < cutoff) r = next_u64();
    return r % bound;
  }

  // Uniform double in [0, 1), 53 random mantissa bits.
  double uniform_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1] -- safe as a log() argument.
  double uniform_unit_positive() { return 1.0 - uniform_unit(); }

  // Standard normal, polar Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform_unit() - 1.0;
      v = 2.0 * uniform_unit() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vcsg
