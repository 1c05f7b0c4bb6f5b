#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace vcsg {

// Dense coordinate vector. Problems here are desk-scale (d <= a few hundred),
// so plain contiguous doubles with fixed-order loops beat anything fancier and
// keep every reduction bit-reproducible.
using Vector = std::vector<double>;

namespace vec {

inline void check_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a, b);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

// y += c * x
inline void axpy(double c, std::span<const double> x, std::span<double> y) {
  check_same_size(x, y);
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += c * x[k];
}

inline void fill(std::span<double> x, double v) {
  for (auto& e : x) e = v;
}

inline void scale(std::span<double> x, double c) {
  for (auto& e : x) e *= c;
}

inline Vector sub(std::span<const double> a, std::span<const double> b) {
  check_same_size(a, b);
  Vector out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

inline bool all_finite(std::span<const double> a) {
  for (double e : a)
    if (!std::isfinite(e)) return false;
  return true;
}

}  // namespace vec
}  // namespace vcsg
