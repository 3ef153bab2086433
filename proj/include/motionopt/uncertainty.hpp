#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "motionopt/parallel.hpp"

namespace motionopt {

namespace detail {
inline void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error(std::string(name) + " must be positive and finite, got " +
                            std::to_string(x));
}
}  // namespace detail

// One information cell: interval width on the location axis and the fixed
// area constant. The frequency width is always derived, so the area law
// width * freq_width == capacity holds exactly.
struct Logon {
  double width = 1.0;     // interval on the location axis (space or time)
  double capacity = 1.0;  // area constant of the limiting uncertainty relation

  Logon() = default;
  Logon(double width_, double capacity_) : width(width_), capacity(capacity_) {
    detail::require_positive(width, "logon width");
    detail::require_positive(capacity, "logon capacity");
  }

  double freq_width() const { return capacity / width; }
};

// Weights of the two uncertainty components on a single axis.
struct AxisWeights {
  double loc = 1.0;   // weight of the location-interval term
  double freq = 1.0;  // weight of the frequency-interval term

  void validate() const {
    detail::require_positive(loc, "loc weight");
    detail::require_positive(freq, "freq weight");
  }
};

// The four weights of the spatiotemporal uncertainty functional
//   U(T, S) = space_loc*S + space_freq/S + time_loc*T + time_freq/T.
struct UncertaintyWeights {
  double space_loc = 1.0;   // multiplies S
  double space_freq = 1.0;  // multiplies 1/S
  double time_loc = 1.0;    // multiplies T
  double time_freq = 1.0;   // multiplies 1/T

  void validate() const {
    detail::require_positive(space_loc, "lambda space_loc");
    detail::require_positive(space_freq, "lambda space_freq");
    detail::require_positive(time_loc, "lambda time_loc");
    detail::require_positive(time_freq, "lambda time_freq");
  }

  AxisWeights space() const { return {space_loc, space_freq}; }
  AxisWeights time() const { return {time_loc, time_freq}; }

  bool operator==(const UncertaintyWeights&) const = default;
};

// U(dx) = loc*dx + freq/dx. Strictly convex on dx > 0.
inline double joint_uncertainty_1d(double delta_x, const AxisWeights& w) {
  w.validate();
  detail::require_positive(delta_x, "delta_x");
  return w.loc * delta_x + w.freq / delta_x;
}

struct Equilibrium1d {
  double delta_x_star;  // argmin of the 1D joint uncertainty
  double u_min;         // its value, 2*sqrt(loc*freq)
};

inline Equilibrium1d equilibrium_1d(const AxisWeights& w) {
  w.validate();
  return {std::sqrt(w.freq / w.loc), 2.0 * std::sqrt(w.loc * w.freq)};
}

inline double spatiotemporal_uncertainty(double t, double s, const UncertaintyWeights& w) {
  w.validate();
  detail::require_positive(t, "t");
  detail::require_positive(s, "s");
  // Grouped per axis so separability into the two 1D functionals is exact.
  return (w.space_loc * s + w.space_freq / s) + (w.time_loc * t + w.time_freq / t);
}

struct Gradient {
  double du_dt;
  double du_ds;
};

inline Gradient uncertainty_gradient(double t, double s, const UncertaintyWeights& w) {
  w.validate();
  detail::require_positive(t, "t");
  detail::require_positive(s, "s");
  return {w.time_loc - w.time_freq / (t * t), w.space_loc - w.space_freq / (s * s)};
}

struct GlobalMinimum {
  double t_star;
  double s_star;
  double u_min;
};

inline GlobalMinimum global_minimum(const UncertaintyWeights& w) {
  w.validate();
  return {std::sqrt(w.time_freq / w.time_loc), std::sqrt(w.space_freq / w.space_loc),
          2.0 * std::sqrt(w.space_loc * w.space_freq) +
              2.0 * std::sqrt(w.time_loc * w.time_freq)};
}

// Log-spaced sampling of the (T, S) plane. Sample i on an axis is
// min*(max/min)^(i/(n-1)), so axis samples are strictly increasing.
struct GridSpec {
  double t_min = 0.01, t_max = 100.0;
  double s_min = 0.01, s_max = 100.0;
  int n_t = 128, n_s = 128;

  void validate() const {
    detail::require_positive(t_min, "t_min");
    detail::require_positive(s_min, "s_min");
    if (!(t_min < t_max)) throw std::domain_error("grid requires t_min < t_max");
    if (!(s_min < s_max)) throw std::domain_error("grid requires s_min < s_max");
    if (n_t < 2) throw std::domain_error("grid requires n_t >= 2");
    if (n_s < 2) throw std::domain_error("grid requires n_s >= 2");
  }

  double t_sample(int i) const {
    return t_min * std::pow(t_max / t_min, double(i) / double(n_t - 1));
  }
  double s_sample(int j) const {
    return s_min * std::pow(s_max / s_min, double(j) / double(n_s - 1));
  }

  std::vector<double> t_axis() const {
    std::vector<double> out(n_t);
    for (int i = 0; i < n_t; ++i) out[i] = t_sample(i);
    return out;
  }
  std::vector<double> s_axis() const {
    std::vector<double> out(n_s);
    for (int j = 0; j < n_s; ++j) out[j] = s_sample(j);
    return out;
  }

  bool operator==(const GridSpec&) const = default;
};

// Scalar quantity sampled on a grid, row-major with T as the slow index.
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;  // size n_t * n_s, values[i*n_s + j] at (t_i, s_j)
  std::string label;

  ScalarField() = default;
  ScalarField(const GridSpec& g, std::string label_) : grid(g), label(std::move(label_)) {
    grid.validate();
    values.assign(std::size_t(grid.n_t) * grid.n_s, 0.0);
  }

  double& at(int i, int j) { return values[std::size_t(i) * grid.n_s + j]; }
  double at(int i, int j) const { return values[std::size_t(i) * grid.n_s + j]; }

  void validate() const {
    grid.validate();
    if (values.size() != std::size_t(grid.n_t) * grid.n_s)
      throw std::domain_error("field values size does not match grid");
    for (double v : values)
      if (!std::isfinite(v)) throw std::domain_error("field contains non-finite value");
  }

  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  double max_value() const { return *std::max_element(values.begin(), values.end()); }

  // Ties resolve to the lowest row-major index.
  std::pair<int, int> argmin() const {
    auto it = std::min_element(values.begin(), values.end());
    auto k = int(it - values.begin());
    return {k / grid.n_s, k % grid.n_s};
  }
  std::pair<int, int> argmax() const {
    auto it = std::max_element(values.begin(), values.end());
    auto k = int(it - values.begin());
    return {k / grid.n_s, k % grid.n_s};
  }

  double sum() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
};

// Samples the spatiotemporal uncertainty on the grid. Rows are independent,
// so the evaluation may be chunked across threads; every cell is computed
// from the same precomputed axes, keeping results bit-identical.
inline ScalarField evaluate_field(const GridSpec& grid, const UncertaintyWeights& w,
                                  unsigned threads = 1) {
  grid.validate();
  w.validate();
  ScalarField field(grid, "uncertainty");
  const auto ts = grid.t_axis();
  const auto ss = grid.s_axis();
  parallel_chunks(std::size_t(grid.n_t), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (int j = 0; j < grid.n_s; ++j)
        field.values[i * grid.n_s + j] = (w.space_loc * ss[j] + w.space_freq / ss[j]) +
                                         (w.time_loc * ts[i] + w.time_freq / ts[i]);
  });
  return field;
}

}  // namespace motionopt
