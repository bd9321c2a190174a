#pragma once

#include <cmath>

#include "sera/common.hpp"

namespace sera {

enum class CutoffShape {
  /// g(u) = exp(-1/u) blend; C-infinity and symmetric about the midpoint.
  kExponentialBump,
  /// Quintic smoothstep blend; C^2, kept for experiments.
  kSmoothstep,
};

/// The cutoff H: equal to 1 up to transition_lo, 0 from transition_hi on,
/// non-increasing and smooth in between.
struct CutoffSpec {
  double transition_lo = 0.5;
  double transition_hi = 1.0;
  CutoffShape shape = CutoffShape::kExponentialBump;
};

namespace detail {
inline double bump_g(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
}  // namespace detail

/// H(t) for t >= 0. Negative t is a domain error: the kernels only ever
/// evaluate H at sqrt(|j|_1)/n.
inline double cutoff_h(const CutoffSpec& spec, double t) {
  require(t >= 0.0 && std::isfinite(t), "cutoff_h: t must be finite and >= 0");
  if (t <= spec.transition_lo) return 1.0;
  if (t >= spec.transition_hi) return 0.0;
  const double s = (t - spec.transition_lo) / (spec.transition_hi - spec.transition_lo);
  switch (spec.shape) {
    case CutoffShape::kExponentialBump: {
      const double a = detail::bump_g(1.0 - s);
      const double b = detail::bump_g(s);
      return a / (a + b);
    }
    case CutoffShape::kSmoothstep: {
      const double u = 1.0 - s;
      return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
    }
  }
  return 0.0;
}

inline double cutoff_h(double t) { return cutoff_h(CutoffSpec{}, t); }

}  // namespace sera
