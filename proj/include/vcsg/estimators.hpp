#pragma once

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vcsg/vec.hpp"

namespace vcsg {

enum class EstimatorFamily { Plain, WeightedUnbiased, Biased };

// Search-direction recipe. `weight` is the correction weight in (0, 1) for the
// two weighted families; Plain carries no weight (stored as 0).
struct EstimatorKind {
  EstimatorFamily family = EstimatorFamily::Plain;
  double weight = 0.0;

  static EstimatorKind plain() { return {EstimatorFamily::Plain, 0.0}; }
  static EstimatorKind weighted_unbiased(double w) {
    check_weight(w);
    return {EstimatorFamily::WeightedUnbiased, w};
  }
  static EstimatorKind biased(double w) {
    check_weight(w);
    return {EstimatorFamily::Biased, w};
  }
  static void check_weight(double w) {
    if (!(w > 0.0) || !(w < 1.0))
      throw std::invalid_argument("estimator weight must lie strictly inside (0, 1)");
  }
};

// Weight minimizing the variance-side constant of the weighted-unbiased
// estimator: (15 - sqrt(97)) / 16 ~= 0.3219.
inline double optimal_weight_unbiased() { return (15.0 - std::sqrt(97.0)) / 16.0; }
// Weight minimizing the biased estimator's constant: 5/8.
inline constexpr double optimal_weight_biased = 0.625;

// All three directions are pure functions of the same three gradients:
//   gk = minibatch gradient at the current iterate,
//   g0 = the same minibatch at the epoch anchor,
//   gj = anchor batch gradient.

namespace detail {
inline void check_triple(const Vector& gk, const Vector& g0, const Vector& gj) {
  if (gk.size() != g0.size() || gk.size() != gj.size() || gk.empty())
    throw std::invalid_argument("estimator inputs must share one nonzero dimension");
}
}  // namespace detail

// v = gk - g0 + gj
inline Vector estimate_plain(const Vector& gk, const Vector& g0, const Vector& gj) {
  detail::check_triple(gk, g0, gj);
  Vector v(gk.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = gk[k] - g0[k] + gj[k];
  return v;
}

// v = (1-w) * gk - w * (g0 - gj); unbiased once averaged over minibatches.
inline Vector estimate_weighted_unbiased(double w, const Vector& gk, const Vector& g0,
                                         const Vector& gj) {
  EstimatorKind::check_weight(w);
  detail::check_triple(gk, g0, gj);
  Vector v(gk.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (1.0 - w) * gk[k] - w * (g0[k] - gj[k]);
  return v;
}

// v = (1-w) * (gk - g0) + w * gj; trades bias for variance.
inline Vector estimate_biased(double w, const Vector& gk, const Vector& g0, const Vector& gj) {
  EstimatorKind::check_weight(w);
  detail::check_triple(gk, g0, gj);
  Vector v(gk.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (1.0 - w) * (gk[k] - g0[k]) + w * gj[k];
  return v;
}

inline Vector estimate(const EstimatorKind& kind, const Vector& gk, const Vector& g0,
                       const Vector& gj) {
  switch (kind.family) {
    case EstimatorFamily::Plain: return estimate_plain(gk, g0, gj);
    case EstimatorFamily::WeightedUnbiased:
      return estimate_weighted_unbiased(kind.weight, gk, g0, gj);
    case EstimatorFamily::Biased: return estimate_biased(kind.weight, gk, g0, gj);
  }
  throw std::logic_error("unreachable estimator family");
}

// --- config-tag round trip ---------------------------------------------------
// Tags: "plain" | "weighted_unbiased:<w>" | "biased:<w>"

inline std::string format_estimator(const EstimatorKind& kind) {
  auto with_weight = [&](const char* head) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), kind.weight);
    (void)ec;
    return std::string(head) + ":" + std::string(buf, p);
  };
  switch (kind.family) {
    case EstimatorFamily::Plain: return "plain";
    case EstimatorFamily::WeightedUnbiased: return with_weight("weighted_unbiased");
    case EstimatorFamily::Biased: return with_weight("biased");
  }
  return "?";
}

inline EstimatorKind parse_estimator(std::string_view tag) {
  if (tag == "plain") return EstimatorKind::plain();
  const auto parse_weight = [&](std::string_view body) {
    double w = 0.0;
    const auto* first = body.data();
    const auto* last = body.data() + body.size();
    auto [p, ec] = std::from_chars(first, last, w);
    if (ec != std::errc{} || p != last)
      throw std::invalid_argument("estimator tag has a malformed weight: '" + std::string(tag) +
                                  "'");
    return w;
  };
  constexpr std::string_view wu = "weighted_unbiased:";
  constexpr std::string_view bi = "biased:";
  try {
    if (tag.substr(0, wu.size()) == wu)
      return EstimatorKind::weighted_unbiased(parse_weight(tag.substr(wu.size())));
    if (tag.substr(0, bi.size()) == bi)
      return EstimatorKind::biased(parse_weight(tag.substr(bi.size())));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " (tag '" + std::string(tag) + "')");
  }
  throw std::invalid_argument("unknown estimator tag '" + std::string(tag) +
                              "'; expected plain | weighted_unbiased:<w> | biased:<w>");
}

}  // namespace vcsg
