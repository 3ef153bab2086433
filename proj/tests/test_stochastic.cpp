#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "motionopt/stochastic.hpp"

using namespace motionopt;
using Catch::Approx;

namespace {

SimulationConfig small_config() {
  SimulationConfig cfg;
  cfg.n_sensors = 500;
  cfg.epochs = 40;
  cfg.seed = 42;
  cfg.density_grid = GridSpec{0.01, 100.0, 0.01, 100.0, 8, 8};
  return cfg;
}

}  // namespace

TEST_CASE("init_population: deterministic per seed, log-uniform marginals") {
  SimulationConfig cfg = small_config();
  cfg.n_sensors = 3;
  auto a = init_population(cfg);
  auto b = init_population(cfg);
  REQUIRE(a.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(a[k].t == b[k].t);
    REQUIRE(a[k].s == b[k].s);
    REQUIRE(a[k].id == k);
  }
  cfg.seed = 43;
  auto c = init_population(cfg);
  REQUIRE(c[0].t != a[0].t);

  // Mean of ln T over 10^4 draws within 3 standard errors of the midpoint.
  cfg = small_config();
  cfg.n_sensors = 10000;
  auto pop = init_population(cfg);
  double mean = 0.0;
  for (const auto& sensor : pop) mean += std::log(sensor.t);
  mean /= double(pop.size());
  const double span = std::log(100.0) - std::log(0.01);
  const double se = span / std::sqrt(12.0) / std::sqrt(double(pop.size()));
  REQUIRE(std::abs(mean - 0.0) < 3.0 * se);

  cfg.n_sensors = 0;
  REQUIRE_THROWS_AS(init_population(cfg), std::domain_error);
  cfg = small_config();
  cfg.bounds = BoundsBox{1.0, 1.0, 0.01, 100.0};
  REQUIRE_THROWS_AS(init_population(cfg), std::domain_error);
}

TEST_CASE("step_population: zero-gain identity and per-id determinism") {
  SimulationConfig cfg = small_config();
  auto pop = init_population(cfg);
  {
    // gain is required positive; the identity check uses a vanishing gain.
    SimulationConfig frozen = cfg;
    frozen.gain = 1e-300;
    auto stepped = pop;
    step_population(stepped, frozen, 0);
    for (std::size_t k = 0; k < pop.size(); ++k) {
      REQUIRE(stepped[k].t == Approx(pop[k].t).epsilon(1e-12));
      REQUIRE(stepped[k].s == Approx(pop[k].s).epsilon(1e-12));
    }
  }
  {
    // Two sensors with identical state and stream id move identically.
    Population twins{{2.0, 3.0, 77}, {2.0, 3.0, 77}, {2.0, 3.0, 78}};
    step_population(twins, cfg, 5);
    REQUIRE(twins[0].t == twins[1].t);
    REQUIRE(twins[0].s == twins[1].s);
    REQUIRE(twins[0].t != twins[2].t);
  }
  {
    // The amplitude factor U/u_min is smallest (exactly 1) at the optimum.
    const auto gm = global_minimum(cfg.weights);
    REQUIRE(effective_uncertainty(gm.t_star, gm.s_star, cfg) / gm.u_min == 1.0);
    REQUIRE(effective_uncertainty(3.0, 0.2, cfg) / gm.u_min > 1.0);
  }
}

TEST_CASE("step_population: uncoupledness under deletion") {
  SimulationConfig cfg = small_config();
  cfg.n_sensors = 6;
  auto full = init_population(cfg);
  auto reduced = full;
  reduced.erase(reduced.begin() + 2);
  for (int epoch = 0; epoch < 10; ++epoch) {
    step_population(full, cfg, epoch);
    step_population(reduced, cfg, epoch);
  }
  // Every surviving sensor followed the exact same trajectory.
  std::size_t r = 0;
  for (std::size_t k = 0; k < full.size(); ++k) {
    if (k == 2) continue;
    REQUIRE(full[k].id == reduced[r].id);
    REQUIRE(full[k].t == reduced[r].t);
    REQUIRE(full[k].s == reduced[r].s);
    ++r;
  }
}

TEST_CASE("step_population: states stay inside bounds") {
  SimulationConfig cfg = small_config();
  cfg.gain = 1.5;  // large steps exercise the reflecting fold
  auto pop = init_population(cfg);
  for (int epoch = 0; epoch < 30; ++epoch) {
    step_population(pop, cfg, epoch);
    for (const auto& sensor : pop) {
      REQUIRE(sensor.t >= cfg.bounds.t_lo);
      REQUIRE(sensor.t <= cfg.bounds.t_hi);
      REQUIRE(sensor.s >= cfg.bounds.s_lo);
      REQUIRE(sensor.s <= cfg.bounds.s_hi);
    }
  }
}

TEST_CASE("population_density: binning rules and errors") {
  GridSpec g{0.01, 100.0, 0.01, 100.0, 2, 2};
  {
    Population one{{0.5, 0.5, 0}};
    auto d = population_density(one, g);
    REQUIRE(d.at(0, 0) == 1.0);
    REQUIRE(d.sum() == 1.0);
  }
  {
    // Top edge inclusive, right-open interior cells.
    Population pop{{100.0, 100.0, 0}, {2.0, 2.0, 1}, {0.5, 0.5, 2}};
    auto d = population_density(pop, g);
    REQUIRE(d.at(1, 1) == Approx(2.0 / 3.0));  // top corner counts into the last cell
    REQUIRE(d.at(0, 0) == Approx(1.0 / 3.0));
    REQUIRE(d.sum() == Approx(1.0).margin(1e-15));
  }
  {
    Population stray{{0.5, 0.5, 0}, {200.0, 1.0, 1}};
    REQUIRE_THROWS_WITH(population_density(stray, g),
                        Catch::Matchers::ContainsSubstring("sensor 1"));
  }
  {
    // Uniform log-spread population lands ~1/4 in each quadrant.
    SimulationConfig cfg = small_config();
    cfg.n_sensors = 4000;
    auto pop = init_population(cfg);
    auto d = population_density(pop, g);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) REQUIRE(d.at(i, j) == Approx(0.25).margin(0.025));
  }
}

TEST_CASE("compare_to_preference: identity, reversal, constants") {
  GridSpec g{0.1, 10.0, 0.1, 10.0, 4, 4};
  ScalarField pref(g, "preference");
  for (int k = 0; k < 16; ++k) pref.values[k] = 0.05 + 0.01 * k;
  {
    auto r = compare_to_preference(pref, pref);
    REQUIRE(r.spearman_rho == Approx(1.0).margin(1e-14));
    REQUIRE(r.top_decile_overlap == 1.0);
  }
  {
    ScalarField rev(g, "density");
    for (int k = 0; k < 16; ++k) rev.values[k] = pref.values[15 - k];
    auto r = compare_to_preference(rev, pref);
    REQUIRE(r.spearman_rho == Approx(-1.0).margin(1e-14));
  }
  {
    // Constant field: all ranks tie, rho defined as 0. Oracle: the rank
    // vector has zero variance, so the correlation is degenerate.
    ScalarField flat(g, "density");
    for (double& v : flat.values) v = 1.0 / 16.0;
    auto r = compare_to_preference(flat, pref);
    REQUIRE(r.spearman_rho == 0.0);
  }
  {
    GridSpec other{0.1, 10.0, 0.1, 10.0, 2, 8};
    ScalarField wrong(other, "density");
    REQUIRE_THROWS_AS(compare_to_preference(wrong, pref), std::domain_error);
  }
}

TEST_CASE("compare_to_preference: average ranks agree with a direct oracle") {
  // Hand-computable case with ties: values {1, 2, 2, 3} get ranks
  // {1, 2.5, 2.5, 4}.
  GridSpec g{0.1, 10.0, 0.1, 10.0, 2, 2};
  ScalarField a(g, "density"), b(g, "preference");
  a.values = {1.0, 2.0, 2.0, 3.0};
  b.values = {1.0, 2.0, 3.0, 4.0};
  // Pearson on ranks {1,2.5,2.5,4} vs {1,2,3,4}: by hand = 0.9486832980505138.
  auto r = compare_to_preference(a, b);
  REQUIRE(r.spearman_rho == Approx(0.9486832980505138).epsilon(1e-12));
}

TEST_CASE("run_simulation: drift to low uncertainty and rank agreement") {
  SimulationConfig cfg;
  cfg.n_sensors = 2000;
  cfg.epochs = 120;
  cfg.seed = 3;
  cfg.density_grid = GridSpec{0.01, 100.0, 0.01, 100.0, 16, 16};
  auto summary = run_simulation(cfg);
  REQUIRE(summary.epoch_stats.size() == std::size_t(cfg.epochs) + 1);
  REQUIRE(summary.epoch_stats.back().median_uncertainty <
          summary.epoch_stats.front().median_uncertainty);
  REQUIRE(summary.spearman_rho > 0.7);
  REQUIRE(summary.final_density.sum() == Approx(1.0).margin(1e-12));

  // Bit-identical across thread counts and repeat runs.
  SimulationConfig threaded = cfg;
  threaded.threads = 4;
  auto again = run_simulation(threaded);
  REQUIRE(again.final_density.values == summary.final_density.values);
  REQUIRE(again.spearman_rho == summary.spearman_rho);
  for (std::size_t e = 0; e < summary.epoch_stats.size(); ++e) {
    REQUIRE(again.epoch_stats[e].median_uncertainty ==
            summary.epoch_stats[e].median_uncertainty);
    REQUIRE(again.epoch_stats[e].mean_uncertainty ==
            summary.epoch_stats[e].mean_uncertainty);
  }
}

TEST_CASE("run_simulation: checkpoints at the configured interval") {
  SimulationConfig cfg = small_config();
  cfg.epochs = 10;
  cfg.checkpoint_interval = 4;
  auto summary = run_simulation(cfg);
  REQUIRE(summary.checkpoints.size() == 2);  // epochs 4 and 8; 10 is final
  REQUIRE(summary.checkpoints[0].first == 4);
  REQUIRE(summary.checkpoints[1].first == 8);
  for (auto& [epoch, density] : summary.checkpoints)
    REQUIRE(density.sum() == Approx(1.0).margin(1e-12));
}

TEST_CASE("run_simulation: environment prior pulls the density to its speed line") {
  SimulationConfig cfg;
  cfg.n_sensors = 3000;
  cfg.epochs = 150;
  cfg.seed = 7;
  cfg.prior = SpeedPrior::delta(4.0);
  cfg.density_grid = GridSpec{0.01, 100.0, 0.01, 100.0, 16, 16};
  auto summary = run_simulation(cfg);
  auto [i, j] = summary.final_density.argmax();
  const double x =
      std::log(cfg.density_grid.s_sample(j) / cfg.density_grid.t_sample(i));
  // Argmax cell lies near ln(S/T) = ln 4 (within two 16x16 cells).
  const double cell = std::log(100.0 / 0.01) / 15.0;
  REQUIRE(std::abs(x - std::log(4.0)) < 2.0 * cell);
}

TEST_CASE("run_simulation_from: environment switch moves the density argmax") {
  SimulationConfig cfg;
  cfg.n_sensors = 3000;
  cfg.epochs = 150;
  cfg.seed = 11;
  cfg.prior = SpeedPrior::delta(4.0);
  cfg.density_grid = GridSpec{0.01, 100.0, 0.01, 100.0, 16, 16};
  Population pop = init_population(cfg);
  auto first = run_simulation_from(cfg, pop, 0);

  SimulationConfig switched = cfg;
  switched.prior = SpeedPrior::delta(0.25);
  switched.epochs = 200;
  auto second = run_simulation_from(switched, pop, cfg.epochs);

  auto dist_to = [&](const ScalarField& d, double v) {
    auto [i, j] = d.argmax();
    return std::abs(std::log(cfg.density_grid.s_sample(j) /
                             cfg.density_grid.t_sample(i)) -
                    std::log(v));
  };
  REQUIRE(dist_to(second.final_density, 0.25) < dist_to(first.final_density, 0.25));
  const double cell = std::log(100.0 / 0.01) / 15.0;
  REQUIRE(dist_to(second.final_density, 0.25) < 2.0 * cell);
}
