#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "motionopt/parallel.hpp"
#include "motionopt/priors.hpp"
#include "motionopt/sensitivity.hpp"
#include "motionopt/streams.hpp"
#include "motionopt/uncertainty.hpp"

namespace motionopt {

// One sensor's current intervals plus the stable stream id assigned at
// init. The id, not the vector position, keys the random stream, so
// removing a sensor cannot perturb any other sensor's trajectory.
struct SensorState {
  double t = 1.0;
  double s = 1.0;
  std::uint64_t id = 0;
};

using Population = std::vector<SensorState>;

struct BoundsBox {
  double t_lo = 0.01, t_hi = 100.0;
  double s_lo = 0.01, s_hi = 100.0;

  void validate() const {
    detail::require_positive(t_lo, "bounds t_lo");
    detail::require_positive(s_lo, "bounds s_lo");
    if (!(t_lo < t_hi)) throw std::domain_error("bounds require t_lo < t_hi");
    if (!(s_lo < s_hi)) throw std::domain_error("bounds require s_lo < s_hi");
  }

  bool operator==(const BoundsBox&) const = default;
};

struct SimulationConfig {
  int n_sensors = 10000;
  UncertaintyWeights weights;
  BoundsBox bounds;
  double gain = 0.02;
  int epochs = 500;
  std::uint64_t seed = 1;
  std::optional<SpeedPrior> prior;  // environment shaping, off by default
  double blend_gamma = 1.0;         // how strongly the prior shapes the landscape
  double beta = 0.5;                // log-speed kernel bandwidth for the prior term
  GridSpec density_grid{0.01, 100.0, 0.01, 100.0, 32, 32};
  int checkpoint_interval = 0;  // 0: no intermediate density checkpoints
  unsigned threads = 1;

  void validate() const {
    if (n_sensors < 1) throw std::domain_error("n_sensors must be >= 1");
    weights.validate();
    bounds.validate();
    detail::require_positive(gain, "gain");
    if (epochs < 1) throw std::domain_error("epochs must be >= 1");
    if (prior) prior->validate();
    if (!(blend_gamma >= 0.0 && blend_gamma <= 1.0))
      throw std::domain_error("blend_gamma must lie in [0, 1]");
    detail::require_positive(beta, "beta");
    density_grid.validate();
    if (checkpoint_interval < 0)
      throw std::domain_error("checkpoint_interval must be >= 0");
  }
};

// Uncertainty landscape the walk responds to. Without a prior this is the
// plain spatiotemporal uncertainty; with one, conditions away from useful
// speeds are penalized by the same kernel mixture the sensitivity map
// uses, U / mixture^gamma.
inline double effective_uncertainty(double t, double s, const SimulationConfig& cfg) {
  const double u = spatiotemporal_uncertainty(t, s, cfg.weights);
  if (!cfg.prior || cfg.blend_gamma == 0.0) return u;
  const double m = prior_kernel_mixture(*cfg.prior, std::log(s / t), cfg.beta);
  return u / std::pow(m, cfg.blend_gamma);
}

namespace detail {
// Reflecting fold of x into [lo, hi]: periodize over 2*(hi-lo), mirror the
// upper half. Handles arbitrarily large excursions in one shot.
inline double reflect_into(double x, double lo, double hi) {
  const double span = hi - lo;
  double y = std::fmod(x - lo, 2.0 * span);
  if (y < 0.0) y += 2.0 * span;
  if (y > span) y = 2.0 * span - y;
  return lo + y;
}

constexpr std::uint64_t kInitStreamTag = 0x696e6974ull;  // distinct from epoch ids
}  // namespace detail

// Uniform log-space draw over the bounds from each sensor's own stream.
inline Population init_population(const SimulationConfig& cfg) {
  cfg.validate();
  Population pop(std::size_t(cfg.n_sensors));
  const double lt_lo = std::log(cfg.bounds.t_lo), lt_hi = std::log(cfg.bounds.t_hi);
  const double ls_lo = std::log(cfg.bounds.s_lo), ls_hi = std::log(cfg.bounds.s_hi);
  parallel_chunks(pop.size(), cfg.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      KeyedStream stream(cfg.seed, k, detail::kInitStreamTag);
      // next_unit is in (0, 1]; flip so the draw covers [lo, hi) per axis.
      pop[k].t = std::exp(lt_lo + (lt_hi - lt_lo) * (1.0 - stream.next_unit()));
      pop[k].s = std::exp(ls_lo + (ls_hi - ls_lo) * (1.0 - stream.next_unit()));
      pop[k].id = k;
    }
  });
  return pop;
}

// One diffusion epoch: every sensor independently takes a log-space step
// with amplitude gain * U_eff/u_min and reflects off the bounds. There is
// no gradient term; the drift toward low uncertainty comes entirely from
// the state-dependent amplitude.
inline void step_population(Population& pop, const SimulationConfig& cfg,
                            int epoch_index) {
  cfg.validate();
  if (epoch_index < 0) throw std::domain_error("epoch_index must be >= 0");
  const double u_min = global_minimum(cfg.weights).u_min;
  const double lt_lo = std::log(cfg.bounds.t_lo), lt_hi = std::log(cfg.bounds.t_hi);
  const double ls_lo = std::log(cfg.bounds.s_lo), ls_hi = std::log(cfg.bounds.s_hi);
  parallel_chunks(pop.size(), cfg.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      SensorState& sensor = pop[k];
      const double amp =
          cfg.gain * effective_uncertainty(sensor.t, sensor.s, cfg) / u_min;
      KeyedStream stream(cfg.seed, sensor.id, std::uint64_t(epoch_index));
      const auto [eta_t, eta_s] = stream.next_normal_pair();
      sensor.t = std::exp(
          detail::reflect_into(std::log(sensor.t) + amp * eta_t, lt_lo, lt_hi));
      sensor.s = std::exp(
          detail::reflect_into(std::log(sensor.s) + amp * eta_s, ls_lo, ls_hi));
    }
  });
}

// Normalized histogram of sensor states on a log grid; right-open cells
// with the top edge inclusive. Every sensor must fall inside the grid.
inline ScalarField population_density(const Population& pop, const GridSpec& grid) {
  grid.validate();
  if (pop.empty()) throw std::domain_error("population is empty");
  ScalarField density(grid, "density");
  const double lt_lo = std::log(grid.t_min), lt_hi = std::log(grid.t_max);
  const double ls_lo = std::log(grid.s_min), ls_hi = std::log(grid.s_max);
  auto cell_of = [](double lx, double lo, double hi, int n) -> int {
    if (lx < lo || lx > hi) return -1;
    if (lx == hi) return n - 1;  // top edge inclusive
    return std::min(n - 1, int((lx - lo) / (hi - lo) * n));
  };
  for (std::size_t k = 0; k < pop.size(); ++k) {
    const int ci = cell_of(std::log(pop[k].t), lt_lo, lt_hi, grid.n_t);
    const int cj = cell_of(std::log(pop[k].s), ls_lo, ls_hi, grid.n_s);
    if (ci < 0 || cj < 0)
      throw std::domain_error("population_density: sensor " + std::to_string(k) +
                              " (id " + std::to_string(pop[k].id) + ") at (t=" +
                              std::to_string(pop[k].t) + ", s=" + std::to_string(pop[k].s) +
                              ") lies outside the grid");
    density.at(ci, cj) += 1.0;
  }
  for (double& v : density.values) v /= double(pop.size());
  return density;
}

namespace detail {
// Average ranks (1-based) with ties sharing their mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t run_end = k + 1;
    while (run_end < order.size() && values[order[run_end]] == values[order[k]]) ++run_end;
    const double mean_rank = 0.5 * double(k + 1 + run_end);  // average of k+1 .. run_end
    for (std::size_t m = k; m < run_end; ++m) ranks[order[m]] = mean_rank;
    k = run_end;
  }
  return ranks;
}
}  // namespace detail

struct RankComparison {
  double spearman_rho;
  double top_decile_overlap;
};

// Spearman rank correlation over cells (average-rank ties; defined as 0
// when either rank vector has zero variance) and the shared fraction of
// top-decile cells.
inline RankComparison compare_to_preference(const ScalarField& density,
                                            const ScalarField& preference) {
  density.validate();
  preference.validate();
  if (!(density.grid == preference.grid))
    throw std::domain_error("compare_to_preference: grids differ");
  const auto ra = detail::average_ranks(density.values);
  const auto rb = detail::average_ranks(preference.values);
  const std::size_t n = ra.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ma += ra[k];
    mb += rb[k];
  }
  ma /= double(n);
  mb /= double(n);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cov += (ra[k] - ma) * (rb[k] - mb);
    va += (ra[k] - ma) * (ra[k] - ma);
    vb += (rb[k] - mb) * (rb[k] - mb);
  }
  const double rho = (va > 0.0 && vb > 0.0) ? cov / std::sqrt(va * vb) : 0.0;

  const std::size_t deciles = std::max<std::size_t>(1, n / 10);
  auto top_cells = [&](const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values[a] > values[b];
    });
    order.resize(deciles);
    std::sort(order.begin(), order.end());
    return order;
  };
  const auto ta = top_cells(density.values);
  const auto tb = top_cells(preference.values);
  std::vector<std::size_t> shared;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(),
                        std::back_inserter(shared));
  return {rho, double(shared.size()) / double(deciles)};
}

struct EpochStats {
  double median_uncertainty;
  double mean_uncertainty;
};

struct SimulationSummary {
  std::vector<EpochStats> epoch_stats;  // index 0 is the initial population
  ScalarField final_density;
  double spearman_rho = 0.0;
  double top_decile_overlap = 0.0;
  std::vector<std::pair<int, ScalarField>> checkpoints;  // (epoch, density)
};

namespace detail {
inline EpochStats population_stats(const Population& pop, const SimulationConfig& cfg) {
  std::vector<double> u(pop.size());
  for (std::size_t k = 0; k < pop.size(); ++k)
    u[k] = effective_uncertainty(pop[k].t, pop[k].s, cfg);
  double mean = 0.0;
  for (double v : u) mean += v;
  mean /= double(u.size());
  const std::size_t mid = u.size() / 2;
  std::nth_element(u.begin(), u.begin() + mid, u.end());
  double median = u[mid];
  if (u.size() % 2 == 0) {
    std::nth_element(u.begin(), u.begin() + (mid - 1), u.begin() + mid);
    median = 0.5 * (median + u[mid - 1]);
  }
  return {median, mean};
}
}  // namespace detail

// Runs the stochastic-tuning loop on an existing population. epoch_offset
// shifts the per-epoch stream ids, so a run continued from a previous
// final state (e.g. after an environment switch) draws fresh noise. The
// emergent density is compared against the preference field of the same
// landscape on the density grid; the returned population argument is left
// in its final state.
inline SimulationSummary run_simulation_from(const SimulationConfig& cfg, Population& pop,
                                             int epoch_offset = 0) {
  cfg.validate();
  if (pop.empty()) throw std::domain_error("population is empty");
  SimulationSummary summary;
  summary.epoch_stats.reserve(std::size_t(cfg.epochs) + 1);
  summary.epoch_stats.push_back(detail::population_stats(pop, cfg));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    step_population(pop, cfg, epoch_offset + epoch);
    summary.epoch_stats.push_back(detail::population_stats(pop, cfg));
    if (cfg.checkpoint_interval > 0 && (epoch + 1) % cfg.checkpoint_interval == 0 &&
        epoch + 1 < cfg.epochs)
      summary.checkpoints.emplace_back(epoch + 1, population_density(pop, cfg.density_grid));
  }
  summary.final_density = population_density(pop, cfg.density_grid);

  ScalarField landscape(cfg.density_grid, "uncertainty");
  for (int i = 0; i < cfg.density_grid.n_t; ++i)
    for (int j = 0; j < cfg.density_grid.n_s; ++j)
      landscape.at(i, j) = effective_uncertainty(cfg.density_grid.t_sample(i),
                                                 cfg.density_grid.s_sample(j), cfg);
  const auto comparison = compare_to_preference(summary.final_density,
                                                preference_field(landscape));
  summary.spearman_rho = comparison.spearman_rho;
  summary.top_decile_overlap = comparison.top_decile_overlap;
  return summary;
}

inline SimulationSummary run_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  Population pop = init_population(cfg);
  return run_simulation_from(cfg, pop, 0);
}

}  // namespace motionopt
