#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "motionopt/optimal_sets.hpp"
#include "motionopt/parallel.hpp"
#include "motionopt/priors.hpp"
#include "motionopt/uncertainty.hpp"

namespace motionopt {

// Allocation preference, reciprocal to uncertainty and normalized so the
// best condition scores exactly 1.
inline ScalarField preference_field(const ScalarField& u_field) {
  u_field.validate();
  for (double v : u_field.values)
    if (!(v > 0.0))
      throw std::domain_error("preference requires positive uncertainty values, got " +
                              std::to_string(v));
  ScalarField pref(u_field.grid, "preference");
  const double u_min = u_field.min_value();
  for (std::size_t k = 0; k < u_field.values.size(); ++k)
    pref.values[k] = u_min / u_field.values[k];
  return pref;
}

enum class RegimeLabel { coupling, tradeoff, stationary_t, stationary_s, minimum };

inline const char* to_string(RegimeLabel r) {
  switch (r) {
    case RegimeLabel::coupling: return "coupling";
    case RegimeLabel::tradeoff: return "tradeoff";
    case RegimeLabel::stationary_t: return "stationary_t";
    case RegimeLabel::stationary_s: return "stationary_s";
    case RegimeLabel::minimum: return "minimum";
  }
  return "?";
}

// Classifies the point by the slope of the level set through it,
// dS/dT = -dU_T/dU_S: positive slope means conserving uncertainty requires
// changing T and S in the same direction (coupling), negative slope the
// opposite (tradeoff).
inline RegimeLabel regime_classify(double t, double s, const UncertaintyWeights& w) {
  const Gradient g = uncertainty_gradient(t, s, w);
  if (g.du_dt == 0.0 && g.du_ds == 0.0) return RegimeLabel::minimum;
  if (g.du_dt == 0.0) return RegimeLabel::stationary_t;
  if (g.du_ds == 0.0) return RegimeLabel::stationary_s;
  return (-g.du_dt / g.du_ds) > 0.0 ? RegimeLabel::coupling : RegimeLabel::tradeoff;
}

namespace detail {

// Edge of the sample lattice, in canonical orientation: along_s edges run
// from (i, j) to (i, j+1), the others from (i, j) to (i+1, j). Shared by
// the two adjacent cells, which therefore agree on the crossing vertex.
struct EdgeId {
  bool along_s;
  int i, j;
  auto operator<=>(const EdgeId&) const = default;
};

struct ContourSegment {
  EdgeId a, b;
  std::size_t cell;  // row-major cell index, used for deterministic walk order
};

}  // namespace detail

// Level curves of a scalar field by marching squares with linear
// interpolation along cell edges, done in log coordinates (the grid's
// native spacing). Saddle cells are disambiguated by the cell-center mean.
// Segments sharing a lattice edge are joined into polylines; walks start
// at the unused segment with the lowest cell index. A level below the
// field minimum yields an empty curve flagged in its metadata; a level
// equal to the minimum yields the argmin sample as a degenerate point.
inline std::vector<Curve> equivalence_contours(const ScalarField& field,
                                               std::span<const double> levels) {
  field.validate();
  const GridSpec& g = field.grid;
  const int nt = g.n_t, ns = g.n_s;
  std::vector<double> lt(nt), ls(ns);
  for (int i = 0; i < nt; ++i) lt[i] = std::log(g.t_sample(i));
  for (int j = 0; j < ns; ++j) ls[j] = std::log(g.s_sample(j));
  const double field_min = field.min_value();

  std::vector<Curve> out;
  for (double level : levels) {
    if (level < field_min) {
      Curve empty;
      empty.kind = CurveKind::equivalence_contour;
      empty.meta.level = level;
      empty.meta.empty_flag = true;
      out.push_back(std::move(empty));
      continue;
    }

    auto below = [&](int i, int j) { return field.at(i, j) < level; };
    auto crossing = [&](const detail::EdgeId& e) -> std::array<double, 2> {
      const double va = field.at(e.i, e.j);
      const int i2 = e.along_s ? e.i : e.i + 1;
      const int j2 = e.along_s ? e.j + 1 : e.j;
      const double vb = field.at(i2, j2);
      const double frac = (level - va) / (vb - va);
      const double plt = lt[e.i] + frac * (lt[i2] - lt[e.i]);
      const double pls = ls[e.j] + frac * (ls[j2] - ls[e.j]);
      return {std::exp(plt), std::exp(pls)};
    };

    std::vector<detail::ContourSegment> segments;
    for (int i = 0; i + 1 < nt; ++i) {
      for (int j = 0; j + 1 < ns; ++j) {
        const int code = (below(i, j) ? 1 : 0) | (below(i + 1, j) ? 2 : 0) |
                         (below(i + 1, j + 1) ? 4 : 0) | (below(i, j + 1) ? 8 : 0);
        if (code == 0 || code == 15) continue;
        const detail::EdgeId bottom{false, i, j};      // (i,j)-(i+1,j)
        const detail::EdgeId top{false, i, j + 1};     // (i,j+1)-(i+1,j+1)
        const detail::EdgeId left{true, i, j};         // (i,j)-(i,j+1)
        const detail::EdgeId right{true, i + 1, j};    // (i+1,j)-(i+1,j+1)
        const std::size_t cell = std::size_t(i) * (ns - 1) + j;
        auto add = [&](detail::EdgeId a, detail::EdgeId b) {
          segments.push_back({a, b, cell});
        };
        switch (code) {
          case 1: add(left, bottom); break;
          case 2: add(bottom, right); break;
          case 3: add(left, right); break;
          case 4: add(right, top); break;
          case 6: add(bottom, top); break;
          case 7: add(left, top); break;
          case 8: add(top, left); break;
          case 9: add(top, bottom); break;  // reversed 6
          case 11: add(right, top); break;   // complement of 4
          case 12: add(right, left); break;  // complement of 3
          case 13: add(bottom, right); break;
          case 14: add(left, bottom); break;
          case 5:
          case 10: {
            const double center = 0.25 * (field.at(i, j) + field.at(i + 1, j) +
                                          field.at(i, j + 1) + field.at(i + 1, j + 1));
            const bool center_below = center < level;
            const bool diag_below_is_ac = (code == 5);
            if (center_below == diag_below_is_ac) {
              add(left, top);
              add(bottom, right);
            } else {
              add(left, bottom);
              add(right, top);
            }
            break;
          }
          default: break;
        }
      }
    }

    if (segments.empty()) {
      if (level == field_min) {
        Curve point;
        point.kind = CurveKind::equivalence_contour;
        point.meta.level = level;
        point.meta.closed = true;
        auto [ai, aj] = field.argmin();
        point.points.push_back({g.t_sample(ai), g.s_sample(aj)});
        out.push_back(std::move(point));
      } else {
        Curve empty;
        empty.kind = CurveKind::equivalence_contour;
        empty.meta.level = level;
        out.push_back(std::move(empty));
      }
      continue;
    }

    // Edge -> segment adjacency (each lattice edge borders at most 2 cells).
    std::map<detail::EdgeId, std::vector<std::size_t>> by_edge;
    for (std::size_t k = 0; k < segments.size(); ++k) {
      by_edge[segments[k].a].push_back(k);
      by_edge[segments[k].b].push_back(k);
    }
    std::vector<bool> used(segments.size(), false);
    std::vector<std::size_t> order(segments.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return segments[a].cell < segments[b].cell;
    });

    auto next_unused = [&](const detail::EdgeId& edge, std::size_t self) -> std::size_t {
      for (std::size_t k : by_edge[edge])
        if (k != self && !used[k]) return k;
      return segments.size();
    };

    for (std::size_t start : order) {
      if (used[start]) continue;
      used[start] = true;
      std::vector<detail::EdgeId> chain{segments[start].a, segments[start].b};
      // Extend forward from the tail edge.
      for (;;) {
        std::size_t k = next_unused(chain.back(), segments.size());
        if (k == segments.size()) break;
        used[k] = true;
        chain.push_back(segments[k].a == chain.back() ? segments[k].b : segments[k].a);
      }
      bool closed = chain.front() == chain.back();
      if (!closed) {
        // Extend backward from the head edge.
        for (;;) {
          std::size_t k = next_unused(chain.front(), segments.size());
          if (k == segments.size()) break;
          used[k] = true;
          chain.insert(chain.begin(),
                       segments[k].a == chain.front() ? segments[k].b : segments[k].a);
        }
        closed = chain.front() == chain.back();
      }
      Curve poly;
      poly.kind = CurveKind::equivalence_contour;
      poly.meta.level = level;
      poly.meta.closed = closed;
      poly.points.reserve(chain.size());
      for (const auto& e : chain) poly.points.push_back(crossing(e));
      out.push_back(std::move(poly));
    }
  }
  return out;
}

// Speed-weighting kernel in log-speed. Bounded log-slope (|d ln K/du| <=
// 2/beta), so the ratio of two translated copies peaks at the midpoint of
// their centers instead of running off to the grid boundary.
inline double speed_kernel(double log_ratio, double beta) {
  detail::require_positive(beta, "beta");
  const double a = 1.0 + std::abs(log_ratio) / beta;
  return 1.0 / (a * a);
}

// Mixture of the speed kernel over the prior, as a function of the
// sensor's log speed x = ln(S/T). Always in (0, 1].
inline double prior_kernel_mixture(const SpeedPrior& prior, double x, double beta) {
  prior.validate();
  switch (prior.kind) {
    case PriorKind::delta:
      return speed_kernel(x - std::log(prior.v0), beta);
    case PriorKind::histogram: {
      double total = 0.0, acc = 0.0;
      for (auto& [v, wgt] : prior.bins) {
        total += wgt;
        acc += wgt * speed_kernel(x - std::log(v), beta);
      }
      return acc / total;
    }
    case PriorKind::log_normal: {
      // Trapezoid in u = ln v over the density support.
      const int n = 4096;
      const double lo = prior.mu - 8.0 * prior.sigma_log;
      const double hi = prior.mu + 8.0 * prior.sigma_log;
      const double h = (hi - lo) / (n - 1);
      const double norm = 1.0 / (prior.sigma_log * std::sqrt(2.0 * std::numbers::pi));
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        const double u = lo + h * k;
        const double z = (u - prior.mu) / prior.sigma_log;
        const double f = norm * std::exp(-0.5 * z * z) * speed_kernel(x - u, beta);
        acc += (k == 0 || k == n - 1) ? 0.5 * f : f;
      }
      return acc * h;
    }
  }
  throw std::logic_error("unreachable prior kind");
}

// Predicted allocation of a fixed resource pool: kernel-weighted usefulness
// of each condition divided by its measurement uncertainty, normalized to
// unit sum over the grid.
inline ScalarField sensitivity_map(const SpeedPrior& prior, const GridSpec& grid,
                                   const UncertaintyWeights& w, double beta,
                                   unsigned threads = 1) {
  grid.validate();
  w.validate();
  prior.validate();
  detail::require_positive(beta, "beta");
  ScalarField sens(grid, "sensitivity");
  const auto ts = grid.t_axis();
  const auto ss = grid.s_axis();
  parallel_chunks(std::size_t(grid.n_t), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      for (int j = 0; j < grid.n_s; ++j) {
        const double x = std::log(ss[j] / ts[i]);
        const double u = spatiotemporal_uncertainty(ts[i], ss[j], w);
        sens.values[i * grid.n_s + j] = prior_kernel_mixture(prior, x, beta) / u;
      }
    }
  });
  const double total = sens.sum();
  for (double& v : sens.values) v /= total;
  return sens;
}

// Per-cell percent ratio of two equally normalized maps.
inline ScalarField ratio_map_percent(const ScalarField& a, const ScalarField& b) {
  a.validate();
  b.validate();
  if (!(a.grid == b.grid)) throw std::domain_error("ratio map: grids differ");
  ScalarField change(a.grid, "percent");
  for (int i = 0; i < a.grid.n_t; ++i) {
    for (int j = 0; j < a.grid.n_s; ++j) {
      const double denom = b.at(i, j);
      if (denom == 0.0)
        throw std::domain_error("change map: zero denominator at cell (i=" +
                                std::to_string(i) + ", j=" + std::to_string(j) +
                                ", T=" + std::to_string(a.grid.t_sample(i)) +
                                ", S=" + std::to_string(a.grid.s_sample(j)) + ")");
      change.at(i, j) = 100.0 * a.at(i, j) / denom;
    }
  }
  return change;
}

struct AdaptationConfig {
  SpeedPrior prior_a;
  SpeedPrior prior_b;
  double beta = 0.5;
  GridSpec grid;
  UncertaintyWeights weights;

  void validate() const {
    prior_a.validate();
    prior_b.validate();
    detail::require_positive(beta, "beta");
    grid.validate();
    weights.validate();
  }
};

// Sensitivity change between two stimulus contexts, 100 * a / b. Equal
// priors give the constant 100; differing priors must produce both gains
// (> 100) and losses (< 100) since both maps sum to 1.
inline ScalarField adaptation_change_map(const AdaptationConfig& cfg,
                                         unsigned threads = 1) {
  cfg.validate();
  const ScalarField a = sensitivity_map(cfg.prior_a, cfg.grid, cfg.weights, cfg.beta, threads);
  const ScalarField b = sensitivity_map(cfg.prior_b, cfg.grid, cfg.weights, cfg.beta, threads);
  return ratio_map_percent(a, b);
}

// Ridge of the sensitivity map: for every T column the S sample maximizing
// sensitivity, ties resolved toward smaller S.
inline Curve max_sensitivity_set(const SpeedPrior& prior, const GridSpec& grid,
                                 const UncertaintyWeights& w, double beta,
                                 unsigned threads = 1) {
  const ScalarField sens = sensitivity_map(prior, grid, w, beta, threads);
  Curve curve;
  curve.kind = CurveKind::max_sensitivity;
  curve.meta.weights = w;
  curve.meta.v_e = expected_speed(prior);
  curve.points.reserve(grid.n_t);
  for (int i = 0; i < grid.n_t; ++i) {
    int best = 0;
    for (int j = 1; j < grid.n_s; ++j)
      if (sens.at(i, j) > sens.at(i, best)) best = j;
    curve.points.push_back({grid.t_sample(i), grid.s_sample(best)});
  }
  return curve;
}

// Half-period reciprocal mapping from measurement intervals to stimulus
// frequencies, used for the frequency-coordinate CSV columns.
inline std::array<double, 2> interval_to_frequency(double t, double s) {
  detail::require_positive(t, "t");
  detail::require_positive(s, "s");
  return {1.0 / (2.0 * t), 1.0 / (2.0 * s)};
}

}  // namespace motionopt
