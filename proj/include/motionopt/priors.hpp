#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "motionopt/uncertainty.hpp"

namespace motionopt {

enum class PriorKind { delta, log_normal, histogram };

inline const char* to_string(PriorKind k) {
  switch (k) {
    case PriorKind::delta: return "delta";
    case PriorKind::log_normal: return "log_normal";
    case PriorKind::histogram: return "histogram";
  }
  return "?";
}

// Distribution p(v) over stimulus speed. Histogram weights are normalized
// on construction; bin centers must be positive.
struct SpeedPrior {
  PriorKind kind = PriorKind::delta;
  double v0 = 1.0;                                   // delta
  double mu = 0.0;                                   // log_normal: mean of ln v
  double sigma_log = 0.5;                            // log_normal: stddev of ln v
  std::vector<std::pair<double, double>> bins;       // histogram: (center, weight)

  static SpeedPrior delta(double v) {
    detail::require_positive(v, "prior v0");
    SpeedPrior p;
    p.kind = PriorKind::delta;
    p.v0 = v;
    return p;
  }

  static SpeedPrior log_normal(double mu, double sigma_log) {
    detail::require_positive(sigma_log, "prior sigma_log");
    if (!std::isfinite(mu)) throw std::domain_error("prior mu must be finite");
    SpeedPrior p;
    p.kind = PriorKind::log_normal;
    p.mu = mu;
    p.sigma_log = sigma_log;
    return p;
  }

  static SpeedPrior histogram(std::vector<std::pair<double, double>> bins_in) {
    if (bins_in.empty()) throw std::domain_error("prior histogram has no bins");
    double total = 0.0;
    for (auto& [v, wgt] : bins_in) {
      detail::require_positive(v, "prior bin center");
      if (wgt < 0.0 || !std::isfinite(wgt))
        throw std::domain_error("prior bin weight must be non-negative, got " +
                                std::to_string(wgt));
      total += wgt;
    }
    if (!(total > 0.0)) throw std::domain_error("prior histogram weights sum to zero");
    for (auto& [v, wgt] : bins_in) wgt /= total;
    SpeedPrior p;
    p.kind = PriorKind::histogram;
    p.bins = std::move(bins_in);
    return p;
  }

  void validate() const {
    switch (kind) {
      case PriorKind::delta:
        detail::require_positive(v0, "prior v0");
        break;
      case PriorKind::log_normal:
        detail::require_positive(sigma_log, "prior sigma_log");
        if (!std::isfinite(mu)) throw std::domain_error("prior mu must be finite");
        break;
      case PriorKind::histogram: {
        if (bins.empty()) throw std::domain_error("prior histogram has no bins");
        double total = 0.0;
        for (auto& [v, wgt] : bins) {
          detail::require_positive(v, "prior bin center");
          if (wgt < 0.0) throw std::domain_error("prior bin weight must be non-negative");
          total += wgt;
        }
        if (!(total > 0.0)) throw std::domain_error("prior histogram weights sum to zero");
        break;
      }
    }
  }

  bool operator==(const SpeedPrior&) const = default;
};

namespace detail {
// Trapezoid rule for integral p(v)*v dv of the log-normal prior, taken in
// u = ln v. Window covers both the density (mu +- 8 sigma) and the mode of
// the integrand at mu + sigma^2, so tail truncation stays far below 1e-6.
inline double log_normal_mean_quadrature(double mu, double sigma_log, int n_points = 4096) {
  const double lo = mu - 8.0 * sigma_log;
  const double hi = mu + sigma_log * sigma_log + 8.0 * sigma_log;
  const double h = (hi - lo) / (n_points - 1);
  const double norm = 1.0 / (sigma_log * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const double u = lo + h * k;
    const double z = (u - mu) / sigma_log;
    const double f = norm * std::exp(-0.5 * z * z) * std::exp(u);
    acc += (k == 0 || k == n_points - 1) ? 0.5 * f : f;
  }
  return acc * h;
}
}  // namespace detail

// Expected speed v_e = integral of p(v)*v dv.
inline double expected_speed(const SpeedPrior& prior) {
  prior.validate();
  switch (prior.kind) {
    case PriorKind::delta:
      return prior.v0;
    case PriorKind::histogram: {
      double total = 0.0, acc = 0.0;
      for (auto& [v, wgt] : prior.bins) {
        total += wgt;
        acc += wgt * v;
      }
      return acc / total;
    }
    case PriorKind::log_normal:
      return detail::log_normal_mean_quadrature(prior.mu, prior.sigma_log);
  }
  throw std::logic_error("unreachable prior kind");
}

}  // namespace motionopt
