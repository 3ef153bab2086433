#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "motionopt/priors.hpp"
#include "motionopt/uncertainty.hpp"

namespace motionopt {

enum class CurveKind {
  local_optimal,
  integral_optimal,
  blended_optimal,
  equivalence_contour,
  max_sensitivity
};

inline const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::local_optimal: return "local_optimal";
    case CurveKind::integral_optimal: return "integral_optimal";
    case CurveKind::blended_optimal: return "blended_optimal";
    case CurveKind::equivalence_contour: return "equivalence_contour";
    case CurveKind::max_sensitivity: return "max_sensitivity";
  }
  return "?";
}

struct CurveMeta {
  UncertaintyWeights weights;
  std::optional<double> v_e;      // integral/blended sets
  std::optional<double> gamma;    // blended sets
  std::optional<double> level;    // equivalence contours
  int omitted = 0;                // samples with no solution (T <= T_min)
  double residual_max = 0.0;      // worst |orthogonality residual| on the curve
  bool closed = false;            // contour polyline closes on itself
  bool empty_flag = false;        // requested level below the field minimum
};

struct Curve {
  CurveKind kind = CurveKind::local_optimal;
  std::vector<std::array<double, 2>> points;  // ordered (t, s)
  CurveMeta meta;
};

// Normalized form of the orthogonality condition <g, v> = 0:
//   (dU/dS * v + dU/dT) / (|dU/dS * v| + |dU/dT| + eps).
// Zero exactly on the optimal set; the sign tells which side of the curve
// the point lies on.
inline double orthogonality_residual(double t, double s, double v,
                                     const UncertaintyWeights& w) {
  detail::require_positive(v, "v");
  const Gradient g = uncertainty_gradient(t, s, w);
  const double a = g.du_ds * v;
  const double b = g.du_dt;
  constexpr double eps_norm = 1e-30;
  return (a + b) / (std::abs(a) + std::abs(b) + eps_norm);
}

namespace detail {
// Root of space_loc*S - space_freq/S + b = 0 for S > 0, written to avoid
// cancellation for either sign of b.
inline double solve_local_s(double b, const UncertaintyWeights& w) {
  const double disc = std::sqrt(b * b + 4.0 * w.space_loc * w.space_freq);
  if (b > 0.0) return 2.0 * w.space_freq / (b + disc);
  return (disc - b) / (2.0 * w.space_loc);
}

inline void require_increasing(std::span<const double> t_samples) {
  for (std::size_t k = 0; k < t_samples.size(); ++k) {
    require_positive(t_samples[k], "t sample");
    if (k > 0 && !(t_samples[k] > t_samples[k - 1]))
      throw std::domain_error("t samples must be strictly increasing");
  }
}
}  // namespace detail

// Optimal set without speed integration: each sensor tuned to v = S/T.
// For each T the unique S > 0 solves
//   space_loc*S - space_freq/S + (time_loc*T - time_freq/T) = 0.
inline Curve local_optimal_set(const UncertaintyWeights& w,
                               std::span<const double> t_samples) {
  w.validate();
  detail::require_increasing(t_samples);
  Curve curve;
  curve.kind = CurveKind::local_optimal;
  curve.meta.weights = w;
  curve.points.reserve(t_samples.size());
  for (double t : t_samples) {
    const double b = w.time_loc * t - w.time_freq / t;
    const double s = detail::solve_local_s(b, w);
    curve.points.push_back({t, s});
    curve.meta.residual_max = std::max(
        curve.meta.residual_max, std::abs(orthogonality_residual(t, s, s / t, w)));
  }
  return curve;
}

struct Asymptotes {
  double t_min;       // vertical asymptote: no solution at or below this T
  double s_infinity;  // horizontal asymptote approached as T grows
};

inline Asymptotes asymptotes(const UncertaintyWeights& w, double v_e) {
  w.validate();
  detail::require_positive(v_e, "v_e");
  const double k = v_e * w.space_loc + w.time_loc;
  return {std::sqrt(w.time_freq / k), std::sqrt(v_e * w.space_freq / k)};
}

// Optimal set with full speed integration: every sensor sees the expected
// speed v_e, so S(T) = sqrt(v_e*space_freq / (v_e*space_loc + time_loc
// - time_freq/T^2)) for T above the vertical asymptote. Samples at or
// below it are omitted and counted in the metadata.
inline Curve integral_optimal_set(const UncertaintyWeights& w, double v_e,
                                  std::span<const double> t_samples) {
  w.validate();
  detail::require_positive(v_e, "v_e");
  detail::require_increasing(t_samples);
  Curve curve;
  curve.kind = CurveKind::integral_optimal;
  curve.meta.weights = w;
  curve.meta.v_e = v_e;
  const double k = v_e * w.space_loc + w.time_loc;
  for (double t : t_samples) {
    const double denom = k - w.time_freq / (t * t);
    if (!(denom > 0.0)) {
      ++curve.meta.omitted;
      continue;
    }
    const double s = std::sqrt(v_e * w.space_freq / denom);
    curve.points.push_back({t, s});
    curve.meta.residual_max = std::max(
        curve.meta.residual_max, std::abs(orthogonality_residual(t, s, v_e, w)));
  }
  return curve;
}

namespace detail {
// Residual of the blended orthogonality condition at (t, s) for blend
// gamma: the sensor speed is (S/T)^(1-gamma) * v_e^gamma. Strictly
// increasing in s for gamma in [0, 1).
inline double blended_condition(double t, double s, double v_e, double gamma,
                                const UncertaintyWeights& w) {
  const double v = std::pow(s / t, 1.0 - gamma) * std::pow(v_e, gamma);
  return (w.space_loc - w.space_freq / (s * s)) * v + (w.time_loc - w.time_freq / (t * t));
}

inline double bisect_blended_s(double t, double v_e, double gamma,
                               const UncertaintyWeights& w) {
  double lo = std::sqrt(w.space_freq / w.space_loc);  // condition < 0 side
  double hi = lo;
  // Expand until the condition brackets zero.
  for (int it = 0; blended_condition(t, lo, v_e, gamma, w) > 0.0; ++it) {
    lo *= 0.25;
    if (it > 600) throw std::runtime_error("blended set: lower bracket not found");
  }
  for (int it = 0; blended_condition(t, hi, v_e, gamma, w) < 0.0; ++it) {
    hi *= 4.0;
    if (it > 600) throw std::runtime_error("blended set: upper bracket not found");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (blended_condition(t, mid, v_e, gamma, w) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

// Partial speed integration between the local (gamma = 0) and integral
// (gamma = 1) extremes, with sensor speed (S/T)^(1-gamma) * v_e^gamma.
inline Curve blended_optimal_set(const UncertaintyWeights& w, double v_e, double gamma,
                                 std::span<const double> t_samples) {
  w.validate();
  detail::require_positive(v_e, "v_e");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::domain_error("gamma must lie in [0, 1], got " + std::to_string(gamma));
  if (gamma == 0.0) {
    Curve curve = local_optimal_set(w, t_samples);
    curve.kind = CurveKind::blended_optimal;
    curve.meta.v_e = v_e;
    curve.meta.gamma = gamma;
    return curve;
  }
  if (gamma == 1.0) {
    Curve curve = integral_optimal_set(w, v_e, t_samples);
    curve.kind = CurveKind::blended_optimal;
    curve.meta.gamma = gamma;
    return curve;
  }
  detail::require_increasing(t_samples);
  Curve curve;
  curve.kind = CurveKind::blended_optimal;
  curve.meta.weights = w;
  curve.meta.v_e = v_e;
  curve.meta.gamma = gamma;
  for (double t : t_samples) {
    const double s = detail::bisect_blended_s(t, v_e, gamma, w);
    const double v = std::pow(s / t, 1.0 - gamma) * std::pow(v_e, gamma);
    curve.points.push_back({t, s});
    curve.meta.residual_max =
        std::max(curve.meta.residual_max, std::abs(orthogonality_residual(t, s, v, w)));
  }
  return curve;
}

}  // namespace motionopt
