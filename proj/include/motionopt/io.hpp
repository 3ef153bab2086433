#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "motionopt/foundations.hpp"
#include "motionopt/optimal_sets.hpp"
#include "motionopt/priors.hpp"
#include "motionopt/sensitivity.hpp"
#include "motionopt/stochastic.hpp"
#include "motionopt/uncertainty.hpp"

namespace motionopt {

// 17 significant digits round-trip doubles exactly; '.' decimal point is
// guaranteed by the "C" formatting of snprintf with the classic locale.
inline std::string format_g17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

class OutputDirError : public std::runtime_error {
 public:
  explicit OutputDirError(const std::string& path)
      : std::runtime_error("output directory not writable: " + path) {}
};

inline void ensure_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputDirError(dir.string());
  const auto probe = dir / ".write_probe";
  std::ofstream f(probe, std::ios::binary);
  if (!f) throw OutputDirError(dir.string());
  f.close();
  std::filesystem::remove(probe, ec);
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!f) throw OutputDirError(path.parent_path().string());
  return f;
}

inline void write_field_csv(const std::filesystem::path& path, const ScalarField& field) {
  auto f = open_for_write(path);
  f << "T,S,value\n";
  for (int i = 0; i < field.grid.n_t; ++i)
    for (int j = 0; j < field.grid.n_s; ++j)
      f << format_g17(field.grid.t_sample(i)) << ',' << format_g17(field.grid.s_sample(j))
        << ',' << format_g17(field.at(i, j)) << '\n';
}

inline void write_curve_csv(const std::filesystem::path& path, const Curve& curve,
                            bool with_frequency = false) {
  auto f = open_for_write(path);
  f << (with_frequency ? "T,S,f_t,f_s\n" : "T,S\n");
  for (const auto& [t, s] : curve.points) {
    f << format_g17(t) << ',' << format_g17(s);
    if (with_frequency) {
      const auto [ft, fs] = interval_to_frequency(t, s);
      f << ',' << format_g17(ft) << ',' << format_g17(fs);
    }
    f << '\n';
  }
}

inline void write_expansion_csv(const std::filesystem::path& path, const Expansion& e) {
  auto f = open_for_write(path);
  f << "c,d\n";
  for (std::size_t k = 0; k < e.coefficients.size(); ++k)
    f << format_g17(e.coefficients[k]) << ',' << format_g17(e.shifts[k]) << '\n';
}

// ---- JSON bindings ---------------------------------------------------------

inline void to_json(nlohmann::json& j, const UncertaintyWeights& w) {
  j = {{"space_loc", w.space_loc},
       {"space_freq", w.space_freq},
       {"time_loc", w.time_loc},
       {"time_freq", w.time_freq}};
}
inline void from_json(const nlohmann::json& j, UncertaintyWeights& w) {
  j.at("space_loc").get_to(w.space_loc);
  j.at("space_freq").get_to(w.space_freq);
  j.at("time_loc").get_to(w.time_loc);
  j.at("time_freq").get_to(w.time_freq);
}

inline void to_json(nlohmann::json& j, const GridSpec& g) {
  j = {{"t_min", g.t_min}, {"t_max", g.t_max}, {"s_min", g.s_min},
       {"s_max", g.s_max}, {"n_t", g.n_t},     {"n_s", g.n_s},
       {"spacing", "logarithmic"}};
}
inline void from_json(const nlohmann::json& j, GridSpec& g) {
  j.at("t_min").get_to(g.t_min);
  j.at("t_max").get_to(g.t_max);
  j.at("s_min").get_to(g.s_min);
  j.at("s_max").get_to(g.s_max);
  j.at("n_t").get_to(g.n_t);
  j.at("n_s").get_to(g.n_s);
}

inline void to_json(nlohmann::json& j, const SpeedPrior& p) {
  switch (p.kind) {
    case PriorKind::delta:
      j = {{"kind", "delta"}, {"v0", p.v0}};
      break;
    case PriorKind::log_normal:
      j = {{"kind", "log_normal"}, {"mu", p.mu}, {"sigma_log", p.sigma_log}};
      break;
    case PriorKind::histogram: {
      nlohmann::json bins = nlohmann::json::array();
      for (auto& [v, wgt] : p.bins) bins.push_back({{"v", v}, {"weight", wgt}});
      j = {{"kind", "histogram"}, {"bins", bins}};
      break;
    }
  }
}
inline void from_json(const nlohmann::json& j, SpeedPrior& p) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "delta") {
    p = SpeedPrior::delta(j.at("v0").get<double>());
  } else if (kind == "log_normal") {
    p = SpeedPrior::log_normal(j.at("mu").get<double>(), j.at("sigma_log").get<double>());
  } else if (kind == "histogram") {
    std::vector<std::pair<double, double>> bins;
    for (const auto& b : j.at("bins"))
      bins.emplace_back(b.at("v").get<double>(), b.at("weight").get<double>());
    p = SpeedPrior::histogram(std::move(bins));
  } else {
    throw std::domain_error("unknown prior kind: " + kind);
  }
}

inline void to_json(nlohmann::json& j, const BoundsBox& b) {
  j = {{"t_lo", b.t_lo}, {"t_hi", b.t_hi}, {"s_lo", b.s_lo}, {"s_hi", b.s_hi}};
}
inline void from_json(const nlohmann::json& j, BoundsBox& b) {
  j.at("t_lo").get_to(b.t_lo);
  j.at("t_hi").get_to(b.t_hi);
  j.at("s_lo").get_to(b.s_lo);
  j.at("s_hi").get_to(b.s_hi);
}

inline nlohmann::json curve_meta_json(const Curve& curve) {
  nlohmann::json j{{"kind", to_string(curve.kind)},
                   {"weights", curve.meta.weights},
                   {"points", curve.points.size()},
                   {"omitted", curve.meta.omitted},
                   {"residual_max", curve.meta.residual_max},
                   {"closed", curve.meta.closed},
                   {"empty", curve.meta.empty_flag}};
  if (curve.meta.v_e) j["v_e"] = *curve.meta.v_e;
  if (curve.meta.gamma) j["gamma"] = *curve.meta.gamma;
  if (curve.meta.level) j["level"] = *curve.meta.level;
  return j;
}

inline nlohmann::json field_manifest_json(const ScalarField& field) {
  return {{"grid", field.grid}, {"label", field.label}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto f = open_for_write(path);
  f << j.dump(2) << '\n';
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  nlohmann::json j;
  f >> j;
  return j;
}

}  // namespace motionopt
