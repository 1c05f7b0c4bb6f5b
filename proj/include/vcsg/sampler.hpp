#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "vcsg/rng.hpp"

namespace vcsg {

// Uniform random size-m subset of {0, ..., n-1}, returned sorted ascending so
// downstream batch reductions run in a fixed index order.
//
// Small m uses Floyd's algorithm (O(m^2) with a flat scan, m is a minibatch
// size here); large m swaps to a partial Fisher-Yates shuffle. Both yield every
// subset with probability 1/C(n,m), and the branch depends only on (n, m), so a
// given call site always consumes the stream the same way.
inline std::vector<std::size_t> sample_subset(std::size_t n, std::size_t m, Rng& rng) {
  if (m == 0 || m > n) throw std::invalid_argument("sample_subset: need 1 <= m <= n");
  std::vector<std::size_t> out;
  out.reserve(m);
  if (m <= 64 && m * 8 <= n) {
    for (std::size_t k = n - m; k < n; ++k) {
      const auto r = static_cast<std::size_t>(rng.uniform_below(k + 1));
      if (std::find(out.begin(), out.end(), r) != out.end()) {
        out.push_back(k);
      } else {
        out.push_back(r);
      }
    }
  } else {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t k = 0; k < m; ++k) {
      const auto j = k + static_cast<std::size_t>(rng.uniform_below(n - k));
      std::swap(pool[k], pool[j]);
    }
    out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct GeometricDraw {
  std::uint64_t value = 0;
  bool capped = false;
};

// Inner-loop length cap: a geometric draw has unbounded support, so runaway
// epochs are clipped at 50x the expected length (callers record cap events).
inline double geometric_cap(std::size_t anchor_batch, std::size_t minibatch) {
  return std::ceil(50.0 * static_cast<double>(anchor_batch) / static_cast<double>(minibatch));
}

// Pure inverse-CDF step, split out so the cap logic is testable with a forced
// unit draw. With continuation probability g = B/(B+b):
//   P(N = k) = g^k (1 - g),  k = 0, 1, 2, ...   and   E[N] = B/b.
inline GeometricDraw geometric_from_unit(double u, std::size_t anchor_batch, std::size_t minibatch) {
  if (anchor_batch == 0 || minibatch == 0)
    throw std::invalid_argument("geometric_from_unit: batch sizes must be positive");
  if (!(u > 0.0) || u > 1.0) throw std::invalid_argument("geometric_from_unit: unit draw outside (0, 1]");
  const double g = static_cast<double>(anchor_batch) /
                   static_cast<double>(anchor_batch + minibatch);
  const double raw = std::floor(std::log(u) / std::log(g));
  const double cap = geometric_cap(anchor_batch, minibatch);
  GeometricDraw out;
  if (!(raw < cap)) {  // also catches any non-finite fallout
    out.value = static_cast<std::uint64_t>(cap);
    out.capped = true;
  } else {
    out.value = static_cast<std::uint64_t>(raw < 0.0 ? 0.0 : raw);
  }
  return out;
}

// Number of inner steps for one epoch: N ~ Geom(B/(B+b)) on {0, 1, 2, ...}.
inline GeometricDraw sample_geometric(std::size_t anchor_batch, std::size_t minibatch, Rng& rng) {
  return geometric_from_unit(rng.uniform_unit_positive(), anchor_batch, minibatch);
}

// Weighted pick of the returned snapshot: P(idx = i) proportional to weights[i].
inline std::size_t sample_output_index(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) throw std::invalid_argument("sample_output_index: empty weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("sample_output_index: weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("sample_output_index: all weights are zero");
  const double u = rng.uniform_unit() * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) last_positive = i;
    cum += weights[i];
    if (u < cum) return i;
  }
  return last_positive;  // numeric drift fallback
}

}  // namespace vcsg
