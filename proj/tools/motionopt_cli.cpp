// Command-line front end: every computation as a subcommand with CSV/JSON
// (and optional SVG) file outputs plus a manifest echoing the effective
// configuration, so a run is fully determined by the binary and its
// manifest. Exit codes: 0 success, 2 config/validation error, 3 unwritable
// output directory.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "motionopt/motionopt.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace motionopt;

namespace {

struct RunConfig {
  UncertaintyWeights weights{};
  GridSpec grid{};
  std::optional<SpeedPrior> prior;
  std::optional<SpeedPrior> prior_a;
  std::optional<SpeedPrior> prior_b;
  double beta = 0.5;
  double gamma = 1.0;
  double v_e = 1.0;
  std::string mode = "local";
  std::vector<double> levels{};
  int curve_samples = 512;

  // stochastic tuning
  int sensors = 10000;
  int epochs = 500;
  double gain = 0.02;
  std::uint64_t seed = 1;
  BoundsBox bounds{};
  GridSpec density_grid{0.01, 100.0, 0.01, 100.0, 32, 32};
  int checkpoint_interval = 0;

  // replica expansion
  double omega0 = 1.0;
  double base_sigma = 1.0;
  double target_sigma = 0.5;
  int n_points = 512;
  double half_range = 8.0;
  int harmonics = 6;

  // entropy checks
  std::vector<double> sigmas{1.0};

  std::string out_dir;
  std::vector<std::string> formats{"csv", "json"};
  unsigned threads = 1;

  bool operator==(const RunConfig&) const = default;
};

void to_json(json& j, const RunConfig& c) {
  j = json{{"weights", c.weights},
           {"grid", c.grid},
           {"beta", c.beta},
           {"gamma", c.gamma},
           {"v_e", c.v_e},
           {"mode", c.mode},
           {"levels", c.levels},
           {"curve_samples", c.curve_samples},
           {"sensors", c.sensors},
           {"epochs", c.epochs},
           {"gain", c.gain},
           {"seed", c.seed},
           {"bounds", c.bounds},
           {"density_grid", c.density_grid},
           {"checkpoint_interval", c.checkpoint_interval},
           {"omega0", c.omega0},
           {"base_sigma", c.base_sigma},
           {"target_sigma", c.target_sigma},
           {"n_points", c.n_points},
           {"half_range", c.half_range},
           {"harmonics", c.harmonics},
           {"sigmas", c.sigmas},
           {"out_dir", c.out_dir},
           {"formats", c.formats},
           {"threads", c.threads}};
  if (c.prior) j["prior"] = *c.prior;
  if (c.prior_a) j["prior_a"] = *c.prior_a;
  if (c.prior_b) j["prior_b"] = *c.prior_b;
}

void from_json(const json& j, RunConfig& c) {
  j.at("weights").get_to(c.weights);
  j.at("grid").get_to(c.grid);
  j.at("beta").get_to(c.beta);
  j.at("gamma").get_to(c.gamma);
  j.at("v_e").get_to(c.v_e);
  j.at("mode").get_to(c.mode);
  j.at("levels").get_to(c.levels);
  j.at("curve_samples").get_to(c.curve_samples);
  j.at("sensors").get_to(c.sensors);
  j.at("epochs").get_to(c.epochs);
  j.at("gain").get_to(c.gain);
  j.at("seed").get_to(c.seed);
  j.at("bounds").get_to(c.bounds);
  j.at("density_grid").get_to(c.density_grid);
  j.at("checkpoint_interval").get_to(c.checkpoint_interval);
  j.at("omega0").get_to(c.omega0);
  j.at("base_sigma").get_to(c.base_sigma);
  j.at("target_sigma").get_to(c.target_sigma);
  j.at("n_points").get_to(c.n_points);
  j.at("half_range").get_to(c.half_range);
  j.at("harmonics").get_to(c.harmonics);
  j.at("sigmas").get_to(c.sigmas);
  j.at("out_dir").get_to(c.out_dir);
  j.at("formats").get_to(c.formats);
  j.at("threads").get_to(c.threads);
  if (j.contains("prior")) c.prior = j.at("prior").get<SpeedPrior>();
  if (j.contains("prior_a")) c.prior_a = j.at("prior_a").get<SpeedPrior>();
  if (j.contains("prior_b")) c.prior_b = j.at("prior_b").get<SpeedPrior>();
}

std::vector<double> parse_doubles(const std::string& text, const char* field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::domain_error(std::string(field) + ": cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw std::domain_error(std::string(field) + ": empty list");
  return out;
}

UncertaintyWeights parse_lambda(const std::string& text) {
  const auto v = parse_doubles(text, "lambda");
  if (v.size() != 4)
    throw std::domain_error("lambda: expected 4 comma-separated weights, got " +
                            std::to_string(v.size()));
  UncertaintyWeights w{v[0], v[1], v[2], v[3]};
  try {
    w.validate();
  } catch (const std::exception& e) {
    throw std::domain_error(std::string("lambda: ") + e.what());
  }
  return w;
}

GridSpec parse_grid(const std::string& text) {
  const auto v = parse_doubles(text, "grid");
  if (v.size() != 6)
    throw std::domain_error("grid: expected t_min,t_max,s_min,s_max,n_t,n_s");
  GridSpec g{v[0], v[1], v[2], v[3], int(v[4]), int(v[5])};
  try {
    g.validate();
  } catch (const std::exception& e) {
    throw std::domain_error(std::string("grid: ") + e.what());
  }
  return g;
}

BoundsBox parse_bounds(const std::string& text) {
  const auto v = parse_doubles(text, "bounds");
  if (v.size() != 4) throw std::domain_error("bounds: expected t_lo,t_hi,s_lo,s_hi");
  BoundsBox b{v[0], v[1], v[2], v[3]};
  try {
    b.validate();
  } catch (const std::exception& e) {
    throw std::domain_error(std::string("bounds: ") + e.what());
  }
  return b;
}

// delta:V | lognormal:MU,SIGMA | hist:V=W,V=W,...
SpeedPrior parse_prior(const std::string& text, const char* field) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::domain_error(std::string(field) +
                            ": expected delta:V, lognormal:MU,SIGMA or hist:V=W,...");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  try {
    if (kind == "delta") {
      const auto v = parse_doubles(rest, field);
      if (v.size() != 1) throw std::domain_error("delta takes one value");
      return SpeedPrior::delta(v[0]);
    }
    if (kind == "lognormal") {
      const auto v = parse_doubles(rest, field);
      if (v.size() != 2) throw std::domain_error("lognormal takes mu,sigma");
      return SpeedPrior::log_normal(v[0], v[1]);
    }
    if (kind == "hist") {
      std::vector<std::pair<double, double>> bins;
      std::stringstream ss(rest);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::domain_error("hist bins are V=W pairs");
        bins.emplace_back(std::stod(item.substr(0, eq)), std::stod(item.substr(eq + 1)));
      }
      return SpeedPrior::histogram(std::move(bins));
    }
  } catch (const std::domain_error& e) {
    throw std::domain_error(std::string(field) + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::domain_error(std::string(field) + ": " + e.what());
  }
  throw std::domain_error(std::string(field) + ": unknown prior kind '" + kind + "'");
}

bool wants(const RunConfig& cfg, const std::string& format) {
  for (const auto& f : cfg.formats)
    if (f == format) return true;
  return false;
}

std::vector<double> curve_t_samples(const RunConfig& cfg) {
  std::vector<double> out(cfg.curve_samples);
  for (int i = 0; i < cfg.curve_samples; ++i)
    out[i] = cfg.grid.t_min *
             std::pow(cfg.grid.t_max / cfg.grid.t_min, double(i) / (cfg.curve_samples - 1));
  return out;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg,
                    json extra = json::object()) {
  json j{{"command", command}, {"config", cfg}};
  for (auto& [key, value] : extra.items()) j[key] = value;
  write_json(dir / (command + "_manifest.json"), j);
}

// Per-subcommand flag holders so that explicit flags override --config.
struct CommonFlags {
  std::string config_path;
  std::string lambda_text, grid_text, out_text, formats_text;
  unsigned threads = 1;
  CLI::Option *o_lambda = nullptr, *o_grid = nullptr, *o_out = nullptr,
              *o_formats = nullptr, *o_threads = nullptr, *o_config = nullptr;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  f.o_config = cmd->add_option("--config", f.config_path,
                               "JSON config file; explicit flags override it");
  f.o_lambda = cmd->add_option("--lambda", f.lambda_text,
                               "weights space_loc,space_freq,time_loc,time_freq");
  f.o_grid = cmd->add_option("--grid", f.grid_text, "t_min,t_max,s_min,s_max,n_t,n_s");
  f.o_out = cmd->add_option("--out", f.out_text, "output directory");
  f.o_formats = cmd->add_option("--formats", f.formats_text, "csv,json,svg subset");
  f.o_threads = cmd->add_option("--threads", f.threads, "worker cap (results unchanged)");
}

RunConfig resolve_common(const CommonFlags& f) {
  RunConfig cfg;
  if (const char* env = std::getenv("MOTIONOPT_OUT_DIR")) cfg.out_dir = env;
  if (cfg.out_dir.empty()) cfg.out_dir = ".";
  if (f.o_config->count()) cfg = load_json(f.config_path).get<RunConfig>();
  if (f.o_lambda->count()) cfg.weights = parse_lambda(f.lambda_text);
  if (f.o_grid->count()) cfg.grid = parse_grid(f.grid_text);
  if (f.o_out->count()) cfg.out_dir = f.out_text;
  if (f.o_formats->count()) {
    cfg.formats.clear();
    std::stringstream ss(f.formats_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item != "csv" && item != "json" && item != "svg")
        throw std::domain_error("formats: unknown format '" + item + "'");
      cfg.formats.push_back(item);
    }
  }
  if (f.o_threads->count()) cfg.threads = f.threads;
  cfg.weights.validate();
  cfg.grid.validate();
  return cfg;
}

// ---- subcommand bodies -----------------------------------------------------

int cmd_surface(const RunConfig& cfg) {
  ensure_output_dir(cfg.out_dir);
  auto field = evaluate_field(cfg.grid, cfg.weights, cfg.threads);
  if (wants(cfg, "csv")) write_field_csv(fs::path(cfg.out_dir) / "surface.csv", field);
  if (wants(cfg, "svg"))
    write_svg(fs::path(cfg.out_dir) / "surface.svg", cfg.grid, &field, {},
              SvgOptions{.log_color = true});
  write_manifest(cfg.out_dir, "surface", cfg, {{"field", field_manifest_json(field)}});
  return 0;
}

int cmd_minimum(const RunConfig& cfg) {
  ensure_output_dir(cfg.out_dir);
  const auto gm = global_minimum(cfg.weights);
  std::printf("T*=%g S*=%g U=%g\n", gm.t_star, gm.s_star, gm.u_min);
  write_json(fs::path(cfg.out_dir) / "minimum.json",
             json{{"t_star", gm.t_star}, {"s_star", gm.s_star}, {"u_min", gm.u_min}});
  write_manifest(cfg.out_dir, "minimum", cfg);
  return 0;
}

int cmd_contours(const RunConfig& cfg) {
  if (cfg.levels.empty()) throw std::domain_error("levels: at least one level required");
  ensure_output_dir(cfg.out_dir);
  auto field = evaluate_field(cfg.grid, cfg.weights, cfg.threads);
  auto curves = equivalence_contours(field, cfg.levels);
  json meta = json::array();
  int index = 0;
  for (const auto& curve : curves) {
    char name[64];
    std::snprintf(name, sizeof(name), "contour_%03d.csv", index);
    if (wants(cfg, "csv")) write_curve_csv(fs::path(cfg.out_dir) / name, curve);
    json m = curve_meta_json(curve);
    m["file"] = name;
    meta.push_back(m);
    ++index;
  }
  if (wants(cfg, "svg"))
    write_svg(fs::path(cfg.out_dir) / "contours.svg", cfg.grid, &field, curves,
              SvgOptions{.log_color = true});
  write_manifest(cfg.out_dir, "contours", cfg, {{"curves", meta}});
  return 0;
}

int cmd_regimes(const RunConfig& cfg) {
  ensure_output_dir(cfg.out_dir);
  auto f = open_for_write(fs::path(cfg.out_dir) / "regimes.csv");
  f << "T,S,regime\n";
  for (int i = 0; i < cfg.grid.n_t; ++i)
    for (int j = 0; j < cfg.grid.n_s; ++j) {
      const double t = cfg.grid.t_sample(i), s = cfg.grid.s_sample(j);
      f << format_g17(t) << ',' << format_g17(s) << ','
        << to_string(regime_classify(t, s, cfg.weights)) << '\n';
    }
  f.close();
  write_manifest(cfg.out_dir, "regimes", cfg);
  return 0;
}

int cmd_optimal_set(const RunConfig& cfg) {
  ensure_output_dir(cfg.out_dir);
  const auto ts = curve_t_samples(cfg);
  Curve curve;
  if (cfg.mode == "local") {
    curve = local_optimal_set(cfg.weights, ts);
  } else if (cfg.mode == "integral") {
    curve = integral_optimal_set(cfg.weights, cfg.v_e, ts);
  } else if (cfg.mode == "blend") {
    curve = blended_optimal_set(cfg.weights, cfg.v_e, cfg.gamma, ts);
  } else {
    throw std::domain_error("mode: expected local, integral or blend, got '" + cfg.mode +
                            "'");
  }
  if (wants(cfg, "csv"))
    write_curve_csv(fs::path(cfg.out_dir) / "optimal_set.csv", curve);
  if (wants(cfg, "svg"))
    write_svg(fs::path(cfg.out_dir) / "optimal_set.svg", cfg.grid, nullptr, {curve});
  write_manifest(cfg.out_dir, "optimal-set", cfg, {{"curve", curve_meta_json(curve)}});
  return 0;
}

int cmd_sensitivity(const RunConfig& cfg) {
  if (!cfg.prior) throw std::domain_error("prior: required for sensitivity");
  ensure_output_dir(cfg.out_dir);
  auto map = sensitivity_map(*cfg.prior, cfg.grid, cfg.weights, cfg.beta, cfg.threads);
  if (wants(cfg, "csv")) write_field_csv(fs::path(cfg.out_dir) / "sensitivity.csv", map);
  if (wants(cfg, "svg"))
    write_svg(fs::path(cfg.out_dir) / "sensitivity.svg", cfg.grid, &map, {},
              SvgOptions{.log_color = true});
  write_manifest(cfg.out_dir, "sensitivity", cfg, {{"field", field_manifest_json(map)}});
  return 0;
}

int cmd_adapt(const RunConfig& cfg) {
  if (!cfg.prior_a) throw std::domain_error("prior-a: required for adapt");
  if (!cfg.prior_b) throw std::domain_error("prior-b: required for adapt");
  ensure_output_dir(cfg.out_dir);
  auto map_a = sensitivity_map(*cfg.prior_a, cfg.grid, cfg.weights, cfg.beta, cfg.threads);
  auto map_b = sensitivity_map(*cfg.prior_b, cfg.grid, cfg.weights, cfg.beta, cfg.threads);
  auto change = ratio_map_percent(map_a, map_b);
  if (wants(cfg, "csv")) {
    write_field_csv(fs::path(cfg.out_dir) / "sensitivity_a.csv", map_a);
    write_field_csv(fs::path(cfg.out_dir) / "sensitivity_b.csv", map_b);
    write_field_csv(fs::path(cfg.out_dir) / "change_map.csv", change);
  }
  if (wants(cfg, "svg")) {
    write_svg(fs::path(cfg.out_dir) / "sensitivity_a.svg", cfg.grid, &map_a, {},
              SvgOptions{.log_color = true});
    write_svg(fs::path(cfg.out_dir) / "sensitivity_b.svg", cfg.grid, &map_b, {},
              SvgOptions{.log_color = true});
    write_svg(fs::path(cfg.out_dir) / "change_map.svg", cfg.grid, &change, {},
              SvgOptions{.log_color = true});
  }
  auto [mi, mj] = change.argmax();
  write_manifest(cfg.out_dir, "adapt", cfg,
                 {{"fields",
                   {{"sensitivity_a", field_manifest_json(map_a)},
                    {"sensitivity_b", field_manifest_json(map_b)},
                    {"change_map", field_manifest_json(change)}}},
                  {"change_max", change.max_value()},
                  {"change_min", change.min_value()},
                  {"change_argmax_t", cfg.grid.t_sample(mi)},
                  {"change_argmax_s", cfg.grid.s_sample(mj)}});
  return 0;
}

int cmd_maxset(const RunConfig& cfg) {
  if (!cfg.prior) throw std::domain_error("prior: required for maxset");
  ensure_output_dir(cfg.out_dir);
  auto curve = max_sensitivity_set(*cfg.prior, cfg.grid, cfg.weights, cfg.beta, cfg.threads);
  // Frequency columns carry the documented half-period reciprocal mapping.
  if (wants(cfg, "csv"))
    write_curve_csv(fs::path(cfg.out_dir) / "maxset.csv", curve, true);
  if (wants(cfg, "svg"))
    write_svg(fs::path(cfg.out_dir) / "maxset.svg", cfg.grid, nullptr, {curve});
  write_manifest(cfg.out_dir, "maxset", cfg, {{"curve", curve_meta_json(curve)}});
  return 0;
}

json epoch_stats_json(const SimulationSummary& summary) {
  json stats = json::array();
  for (std::size_t e = 0; e < summary.epoch_stats.size(); ++e)
    stats.push_back({{"epoch", e},
                     {"median_uncertainty", summary.epoch_stats[e].median_uncertainty},
                     {"mean_uncertainty", summary.epoch_stats[e].mean_uncertainty}});
  return stats;
}

int cmd_simulate(const RunConfig& cfg) {
  ensure_output_dir(cfg.out_dir);
  SimulationConfig sim;
  sim.n_sensors = cfg.sensors;
  sim.weights = cfg.weights;
  sim.bounds = cfg.bounds;
  sim.gain = cfg.gain;
  sim.epochs = cfg.epochs;
  sim.seed = cfg.seed;
  sim.prior = cfg.prior;
  sim.blend_gamma = cfg.gamma;
  sim.beta = cfg.beta;
  sim.density_grid = cfg.density_grid;
  sim.checkpoint_interval = cfg.checkpoint_interval;
  sim.threads = cfg.threads;
  sim.validate();
  auto summary = run_simulation(sim);
  if (wants(cfg, "csv")) {
    write_field_csv(fs::path(cfg.out_dir) / "density_final.csv", summary.final_density);
    for (auto& [epoch, density] : summary.checkpoints) {
      char name[64];
      std::snprintf(name, sizeof(name), "density_epoch_%05d.csv", epoch);
      write_field_csv(fs::path(cfg.out_dir) / name, density);
    }
  }
  if (wants(cfg, "svg"))
    write_svg(fs::path(cfg.out_dir) / "density_final.svg", cfg.density_grid,
              &summary.final_density, {});
  write_json(fs::path(cfg.out_dir) / "simulation.json",
             json{{"config", cfg},
                  {"epoch_stats", epoch_stats_json(summary)},
                  {"spearman_rho", summary.spearman_rho},
                  {"top_decile_overlap", summary.top_decile_overlap}});
  write_manifest(cfg.out_dir, "simulate", cfg,
                 {{"spearman_rho", summary.spearman_rho},
                  {"top_decile_overlap", summary.top_decile_overlap}});
  return 0;
}

int cmd_expand(const RunConfig& cfg) {
  ensure_output_dir(cfg.out_dir);
  auto expansion = cosine_expansion(cfg.omega0, SamplerKernel::gaussian(cfg.base_sigma),
                                    cfg.n_points, cfg.half_range);
  if (wants(cfg, "csv"))
    write_expansion_csv(fs::path(cfg.out_dir) / "expansion.csv", expansion);
  write_manifest(cfg.out_dir, "expand", cfg,
                 {{"achieved_residual", expansion.achieved_residual},
                  {"terms", expansion.coefficients.size()}});
  return 0;
}

int cmd_emulate(const RunConfig& cfg) {
  ensure_output_dir(cfg.out_dir);
  auto result = emulate_sampler(SamplerKernel::gaussian(cfg.target_sigma),
                                SamplerKernel::gaussian(cfg.base_sigma), cfg.harmonics,
                                cfg.n_points, cfg.half_range);
  if (wants(cfg, "csv"))
    write_expansion_csv(fs::path(cfg.out_dir) / "emulation.csv", result.expansion);
  write_manifest(cfg.out_dir, "emulate", cfg,
                 {{"sup_error", result.sup_error},
                  {"terms", result.expansion.coefficients.size()}});
  return 0;
}

int cmd_entropy_check(const RunConfig& cfg) {
  ensure_output_dir(cfg.out_dir);
  auto f = open_for_write(fs::path(cfg.out_dir) / "entropy_check.csv");
  f << "sigma,gaussian,uniform,laplace,gaussian_quadrature,uniform_quadrature,"
       "laplace_quadrature,gaussian_largest\n";
  bool all_largest = true;
  for (double sigma : cfg.sigmas) {
    const auto r = max_entropy_check(sigma);
    all_largest = all_largest && r.gaussian_strictly_largest;
    f << format_g17(sigma) << ',' << format_g17(r.gaussian) << ',' << format_g17(r.uniform)
      << ',' << format_g17(r.laplace) << ',' << format_g17(r.gaussian_quadrature) << ','
      << format_g17(r.uniform_quadrature) << ',' << format_g17(r.laplace_quadrature) << ','
      << (r.gaussian_strictly_largest ? 1 : 0) << '\n';
  }
  f.close();
  // Seeded independence-bound sweep.
  KeyedStream st(cfg.seed, 0, 0xA11Dull);
  double min_slack = 1e308;
  int zero_count = 0;
  const int draws = 1000;
  for (int rep = 0; rep < draws; ++rep) {
    const int nx = 2 + int(st.next_unit() * 5);
    const int nf = 2 + int(st.next_unit() * 5);
    std::vector<double> p(std::size_t(nx) * nf);
    double total = 0.0;
    for (double& x : p) {
      x = -std::log(st.next_unit());
      total += x;
    }
    for (double& x : p) x /= total;
    const auto r = independence_bound(DiscreteJoint(nx, nf, p));
    min_slack = std::min(min_slack, r.slack);
    if (r.slack < 1e-10) ++zero_count;
  }
  write_manifest(cfg.out_dir, "entropy-check", cfg,
                 {{"gaussian_largest_everywhere", all_largest},
                  {"independence_draws", draws},
                  {"independence_min_slack", min_slack},
                  {"independence_near_zero_slack_count", zero_count}});
  return 0;
}

int cmd_reproduce_figures(const RunConfig& base_cfg) {
  const fs::path root = base_cfg.out_dir;
  ensure_output_dir(root);
  const UncertaintyWeights ones{};
  const unsigned threads = base_cfg.threads;

  {  // fig2c: 1D joint uncertainty and allocation preference across scale.
    ensure_output_dir(root / "fig2c");
    auto f = open_for_write(root / "fig2c" / "preference_1d.csv");
    f << "delta_x,uncertainty,preference\n";
    const auto eq = equilibrium_1d({1.0, 1.0});
    Curve pref_curve;
    pref_curve.kind = CurveKind::max_sensitivity;
    for (int i = 0; i < 256; ++i) {
      const double dx = 0.1 * std::pow(100.0, i / 255.0);
      const double u = joint_uncertainty_1d(dx, {1.0, 1.0});
      f << format_g17(dx) << ',' << format_g17(u) << ',' << format_g17(eq.u_min / u)
        << '\n';
      pref_curve.points.push_back({dx, eq.u_min / u});
    }
    f.close();
    write_svg(root / "fig2c" / "preference_1d.svg",
              GridSpec{0.1, 10.0, 0.05, 1.0, 2, 2}, nullptr, {pref_curve},
              SvgOptions{.x_label = "delta_x", .y_label = "preference"});
  }

  {  // fig3b: uncertainty surface with equivalence contours and the minimum.
    ensure_output_dir(root / "fig3b");
    RunConfig cfg = base_cfg;
    cfg.out_dir = (root / "fig3b").string();
    auto field = evaluate_field(cfg.grid, ones, threads);
    write_field_csv(root / "fig3b" / "surface.csv", field);
    auto curves =
        equivalence_contours(field, std::vector<double>{4.4, 5.0, 6.0, 8.0, 12.0});
    write_svg(root / "fig3b" / "surface.svg", cfg.grid, &field, curves,
              SvgOptions{.log_color = true});
    write_json(root / "fig3b" / "minimum.json", json{{"t_star", 1.0}, {"s_star", 1.0}});
  }

  {  // fig4: equivalence contours with regime labels at their vertices.
    ensure_output_dir(root / "fig4");
    auto field = evaluate_field(base_cfg.grid, ones, threads);
    auto curves = equivalence_contours(field, std::vector<double>{5.0, 6.5, 9.0});
    auto f = open_for_write(root / "fig4" / "contour_regimes.csv");
    f << "level,T,S,regime\n";
    for (const auto& curve : curves)
      for (auto [t, s] : curve.points)
        f << format_g17(*curve.meta.level) << ',' << format_g17(t) << ',' << format_g17(s)
          << ',' << to_string(regime_classify(t, s, ones)) << '\n';
    f.close();
    write_svg(root / "fig4" / "contours.svg", base_cfg.grid, nullptr, curves);
  }

  {  // fig5c/6c: local vs integral optimal sets at v_e = 1.
    ensure_output_dir(root / "fig5c6c");
    RunConfig cfg = base_cfg;
    const auto ts = curve_t_samples(cfg);
    auto local = local_optimal_set(ones, ts);
    auto integral = integral_optimal_set(ones, 1.0, ts);
    write_curve_csv(root / "fig5c6c" / "local_optimal.csv", local);
    write_curve_csv(root / "fig5c6c" / "integral_optimal.csv", integral);
    write_svg(root / "fig5c6c" / "optimal_sets.svg", cfg.grid, nullptr, {local, integral});
  }

  {  // fig7: integral sets for decreasing expected speeds, log coordinates.
    ensure_output_dir(root / "fig7");
    RunConfig cfg = base_cfg;
    const auto ts = curve_t_samples(cfg);
    std::vector<Curve> curves;
    json meta = json::array();
    for (double ve : {4.0, 1.0, 0.25}) {
      auto curve = integral_optimal_set(ones, ve, ts);
      char name[64];
      std::snprintf(name, sizeof(name), "integral_ve_%g.csv", ve);
      write_curve_csv(root / "fig7" / name, curve);
      const auto a = asymptotes(ones, ve);
      meta.push_back({{"v_e", ve},
                      {"file", name},
                      {"t_min_asymptote", a.t_min},
                      {"s_infinity_asymptote", a.s_infinity}});
      curves.push_back(std::move(curve));
    }
    write_json(root / "fig7" / "asymptotes.json", meta);
    write_svg(root / "fig7" / "integral_sets.svg", cfg.grid, nullptr, curves);
  }

  {  // fig8: model-side maximal-sensitivity curve with frequency columns.
    ensure_output_dir(root / "fig8");
    auto curve = max_sensitivity_set(SpeedPrior::delta(1.0), base_cfg.grid, ones, 0.5,
                                     threads);
    write_curve_csv(root / "fig8" / "maxset.csv", curve, true);
    const auto ts = curve_t_samples(base_cfg);
    auto integral = integral_optimal_set(ones, 1.0, ts);
    write_curve_csv(root / "fig8" / "integral_optimal.csv", integral);
    write_svg(root / "fig8" / "maxset.svg", base_cfg.grid, nullptr, {curve, integral});
  }

  {  // fig9: sensitivity maps for fast/slow contexts and their percent change.
    ensure_output_dir(root / "fig9");
    auto map_a = sensitivity_map(SpeedPrior::delta(2.0), base_cfg.grid, ones, 0.5, threads);
    auto map_b = sensitivity_map(SpeedPrior::delta(0.5), base_cfg.grid, ones, 0.5, threads);
    auto change = ratio_map_percent(map_a, map_b);
    write_field_csv(root / "fig9" / "sensitivity_high_speed.csv", map_a);
    write_field_csv(root / "fig9" / "sensitivity_low_speed.csv", map_b);
    write_field_csv(root / "fig9" / "change_map.csv", change);
    write_svg(root / "fig9" / "sensitivity_high_speed.svg", base_cfg.grid, &map_a, {},
              SvgOptions{.log_color = true});
    write_svg(root / "fig9" / "sensitivity_low_speed.svg", base_cfg.grid, &map_b, {},
              SvgOptions{.log_color = true});
    write_svg(root / "fig9" / "change_map.svg", base_cfg.grid, &change, {},
              SvgOptions{.log_color = true});
  }

  write_manifest(base_cfg.out_dir, "reproduce-figures", base_cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normative resource allocation for visual motion measurement"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* cmd;
    CommonFlags flags;
  };
  std::map<std::string, Sub> subs;
  auto make = [&](const std::string& name, const std::string& desc) -> Sub& {
    Sub& sub = subs[name];
    sub.cmd = app.add_subcommand(name, desc);
    add_common(sub.cmd, sub.flags);
    return sub;
  };

  auto& surface = make("surface", "sample the uncertainty surface on a grid");

  auto& minimum = make("minimum", "closed-form minimum of the uncertainty surface");

  auto& contours = make("contours", "equivalence contours of the uncertainty surface");
  std::string levels_text;
  auto* o_levels = contours.cmd->add_option("--levels", levels_text, "comma list");

  auto& regimes = make("regimes", "coupling/tradeoff classification on a grid");

  auto& optset = make("optimal-set", "local/integral/blended optimal sets");
  std::string mode_text;
  double ve_val = 1.0, gamma_val = 1.0;
  int samples_val = 512;
  auto* o_mode = optset.cmd->add_option("--mode", mode_text, "local|integral|blend");
  auto* o_ve = optset.cmd->add_option("--ve", ve_val, "expected speed");
  auto* o_gamma = optset.cmd->add_option("--gamma", gamma_val, "blend in [0,1]");
  auto* o_samples = optset.cmd->add_option("--samples", samples_val, "T sample count");

  auto& sens = make("sensitivity", "prior-weighted sensitivity map");
  std::string prior_text;
  double beta_val = 0.5;
  auto* o_prior = sens.cmd->add_option("--prior", prior_text, "delta:V|lognormal:M,S|hist:V=W,..");
  auto* o_beta = sens.cmd->add_option("--beta", beta_val, "log-speed bandwidth");

  auto& adapt = make("adapt", "sensitivity change map between two priors");
  std::string prior_a_text, prior_b_text;
  double adapt_beta_val = 0.5;
  auto* o_prior_a = adapt.cmd->add_option("--prior-a", prior_a_text, "context A prior");
  auto* o_prior_b = adapt.cmd->add_option("--prior-b", prior_b_text, "context B prior");
  auto* o_adapt_beta = adapt.cmd->add_option("--beta", adapt_beta_val, "bandwidth");

  auto& maxset = make("maxset", "per-column maximal-sensitivity curve");
  std::string maxset_prior_text;
  double maxset_beta_val = 0.5;
  auto* o_maxset_prior = maxset.cmd->add_option("--prior", maxset_prior_text, "prior");
  auto* o_maxset_beta = maxset.cmd->add_option("--beta", maxset_beta_val, "bandwidth");

  auto& simulate = make("simulate", "stochastic tuning of a sensor population");
  int sensors_val = 10000, epochs_val = 500, checkpoint_val = 0;
  double gain_val = 0.02, sim_beta_val = 0.5, sim_gamma_val = 1.0;
  std::uint64_t seed_val = 1;
  std::string bounds_text, density_grid_text, sim_prior_text;
  auto* o_sensors = simulate.cmd->add_option("--sensors", sensors_val, "population size");
  auto* o_epochs = simulate.cmd->add_option("--epochs", epochs_val, "epoch count");
  auto* o_gain = simulate.cmd->add_option("--gain", gain_val, "step-size multiplier");
  auto* o_seed = simulate.cmd->add_option("--seed", seed_val, "64-bit seed");
  auto* o_bounds = simulate.cmd->add_option("--bounds", bounds_text, "t_lo,t_hi,s_lo,s_hi");
  auto* o_density_grid =
      simulate.cmd->add_option("--density-grid", density_grid_text, "density grid spec");
  auto* o_checkpoint = simulate.cmd->add_option("--checkpoint-every", checkpoint_val,
                                                "density dump interval (epochs)");
  auto* o_sim_prior = simulate.cmd->add_option("--prior", sim_prior_text, "environment prior");
  auto* o_sim_beta = simulate.cmd->add_option("--beta", sim_beta_val, "kernel bandwidth");
  auto* o_sim_gamma = simulate.cmd->add_option("--gamma", sim_gamma_val,
                                               "environment blend in [0,1]");

  auto& expand = make("expand", "cosine-to-replica expansion of a sampling kernel");
  double omega0_val = 1.0, sigma_val = 1.0, half_range_val = 8.0;
  int npoints_val = 512;
  auto* o_omega0 = expand.cmd->add_option("--omega0", omega0_val, "target frequency");
  auto* o_sigma = expand.cmd->add_option("--sigma", sigma_val, "base gaussian width");
  auto* o_npoints = expand.cmd->add_option("--n-points", npoints_val, "nodes");
  auto* o_half_range = expand.cmd->add_option("--half-range", half_range_val, "node window");

  auto& emulate = make("emulate", "emulate one sampler with replicas of another");
  double tgt_sigma_val = 0.5, base_sigma_val = 1.0, em_half_range_val = 8.0;
  int harmonics_val = 6, em_npoints_val = 2048;
  auto* o_tgt_sigma = emulate.cmd->add_option("--target-sigma", tgt_sigma_val, "target width");
  auto* o_base_sigma = emulate.cmd->add_option("--base-sigma", base_sigma_val, "base width");
  auto* o_harmonics = emulate.cmd->add_option("--harmonics", harmonics_val, "series terms");
  auto* o_em_npoints = emulate.cmd->add_option("--n-points", em_npoints_val, "nodes/term");
  auto* o_em_half_range =
      emulate.cmd->add_option("--half-range", em_half_range_val, "shift window");

  auto& entropy = make("entropy-check", "entropy bound and maximum-entropy verification");
  std::string sigmas_text;
  std::uint64_t entropy_seed_val = 1;
  auto* o_sigmas = entropy.cmd->add_option("--sigmas", sigmas_text, "comma list of sigmas");
  auto* o_entropy_seed = entropy.cmd->add_option("--seed", entropy_seed_val, "sweep seed");

  auto& figures = make("reproduce-figures", "run the documented reference configurations into an output tree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (surface.cmd->parsed()) return cmd_surface(resolve_common(surface.flags));
    if (minimum.cmd->parsed()) return cmd_minimum(resolve_common(minimum.flags));
    if (contours.cmd->parsed()) {
      RunConfig cfg = resolve_common(contours.flags);
      if (o_levels->count()) cfg.levels = parse_doubles(levels_text, "levels");
      return cmd_contours(cfg);
    }
    if (regimes.cmd->parsed()) return cmd_regimes(resolve_common(regimes.flags));
    if (optset.cmd->parsed()) {
      RunConfig cfg = resolve_common(optset.flags);
      if (o_mode->count()) cfg.mode = mode_text;
      if (o_ve->count()) cfg.v_e = ve_val;
      if (o_gamma->count()) cfg.gamma = gamma_val;
      if (o_samples->count()) cfg.curve_samples = samples_val;
      if (cfg.curve_samples < 2) throw std::domain_error("samples: must be >= 2");
      return cmd_optimal_set(cfg);
    }
    if (sens.cmd->parsed()) {
      RunConfig cfg = resolve_common(sens.flags);
      if (o_prior->count()) cfg.prior = parse_prior(prior_text, "prior");
      if (o_beta->count()) cfg.beta = beta_val;
      return cmd_sensitivity(cfg);
    }
    if (adapt.cmd->parsed()) {
      RunConfig cfg = resolve_common(adapt.flags);
      if (o_prior_a->count()) cfg.prior_a = parse_prior(prior_a_text, "prior-a");
      if (o_prior_b->count()) cfg.prior_b = parse_prior(prior_b_text, "prior-b");
      if (o_adapt_beta->count()) cfg.beta = adapt_beta_val;
      return cmd_adapt(cfg);
    }
    if (maxset.cmd->parsed()) {
      RunConfig cfg = resolve_common(maxset.flags);
      if (o_maxset_prior->count()) cfg.prior = parse_prior(maxset_prior_text, "prior");
      if (o_maxset_beta->count()) cfg.beta = maxset_beta_val;
      return cmd_maxset(cfg);
    }
    if (simulate.cmd->parsed()) {
      RunConfig cfg = resolve_common(simulate.flags);
      if (o_sensors->count()) cfg.sensors = sensors_val;
      if (o_epochs->count()) cfg.epochs = epochs_val;
      if (o_gain->count()) cfg.gain = gain_val;
      if (o_seed->count()) cfg.seed = seed_val;
      if (o_bounds->count()) cfg.bounds = parse_bounds(bounds_text);
      if (o_density_grid->count()) cfg.density_grid = parse_grid(density_grid_text);
      if (o_checkpoint->count()) cfg.checkpoint_interval = checkpoint_val;
      if (o_sim_prior->count()) cfg.prior = parse_prior(sim_prior_text, "prior");
      if (o_sim_beta->count()) cfg.beta = sim_beta_val;
      if (o_sim_gamma->count()) cfg.gamma = sim_gamma_val;
      return cmd_simulate(cfg);
    }
    if (expand.cmd->parsed()) {
      RunConfig cfg = resolve_common(expand.flags);
      if (o_omega0->count()) cfg.omega0 = omega0_val;
      if (o_sigma->count()) cfg.base_sigma = sigma_val;
      if (o_npoints->count()) cfg.n_points = npoints_val;
      if (o_half_range->count()) cfg.half_range = half_range_val;
      return cmd_expand(cfg);
    }
    if (emulate.cmd->parsed()) {
      RunConfig cfg = resolve_common(emulate.flags);
      if (o_tgt_sigma->count()) cfg.target_sigma = tgt_sigma_val;
      if (o_base_sigma->count()) cfg.base_sigma = base_sigma_val;
      if (o_harmonics->count()) cfg.harmonics = harmonics_val;
      if (o_em_npoints->count()) cfg.n_points = em_npoints_val;
      if (o_em_half_range->count()) cfg.half_range = em_half_range_val;
      return cmd_emulate(cfg);
    }
    if (entropy.cmd->parsed()) {
      RunConfig cfg = resolve_common(entropy.flags);
      if (o_sigmas->count()) cfg.sigmas = parse_doubles(sigmas_text, "sigmas");
      if (o_entropy_seed->count()) cfg.seed = entropy_seed_val;
      for (double s : cfg.sigmas)
        if (!(s > 0.0)) throw std::domain_error("sigmas: must be positive");
      return cmd_entropy_check(cfg);
    }
    if (figures.cmd->parsed()) return cmd_reproduce_figures(resolve_common(figures.flags));
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const OutputDirError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SpectrumHoleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
