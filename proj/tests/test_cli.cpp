// Integration tests driving the installed CLI binary end to end.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "motionopt/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kBinary = MOTIONOPT_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const auto out_file = fs::temp_directory_path() / "motionopt_cli_out.txt";
  const std::string command =
      std::string(kBinary) + " " + args + " > " + out_file.string() + " 2>&1";
  const int status = std::system(command.c_str());
  std::ifstream f(out_file);
  std::stringstream ss;
  ss << f.rdbuf();
  return {WEXITSTATUS(status), ss.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "motionopt_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli: minimum prints the closed form and exits 0") {
  const auto dir = fresh_dir("minimum");
  auto r = run_cli("minimum --lambda 1,1,1,1 --out " + dir.string());
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("T*=1 S*=1 U=4") != std::string::npos);
  REQUIRE(fs::exists(dir / "minimum.json"));
  REQUIRE(fs::exists(dir / "minimum_manifest.json"));
  auto j = motionopt::load_json(dir / "minimum.json");
  REQUIRE(j.at("u_min").get<double>() == 4.0);
}

TEST_CASE("cli: validation failures name the offending field and exit 2") {
  auto bad_lambda = run_cli("surface --lambda 1,1,-1,1");
  REQUIRE(bad_lambda.exit_code == 2);
  REQUIRE(bad_lambda.output.find("lambda") != std::string::npos);

  auto bad_grid = run_cli("surface --grid 5,1,0.01,100,32,32");
  REQUIRE(bad_grid.exit_code == 2);
  REQUIRE(bad_grid.output.find("grid") != std::string::npos);

  auto bad_prior = run_cli("sensitivity --prior junk:1");
  REQUIRE(bad_prior.exit_code == 2);
  REQUIRE(bad_prior.output.find("prior") != std::string::npos);

  auto missing_prior = run_cli("sensitivity");
  REQUIRE(missing_prior.exit_code == 2);
  REQUIRE(missing_prior.output.find("prior") != std::string::npos);

  auto unknown = run_cli("frobnicate");
  REQUIRE(unknown.exit_code == 2);

  auto bad_mode = run_cli("optimal-set --mode sideways");
  REQUIRE(bad_mode.exit_code == 2);
  REQUIRE(bad_mode.output.find("mode") != std::string::npos);

  auto bad_samples = run_cli("optimal-set --samples 1");
  REQUIRE(bad_samples.exit_code == 2);
  REQUIRE(bad_samples.output.find("samples") != std::string::npos);

  auto bad_gamma = run_cli("optimal-set --mode blend --ve 1 --gamma 1.5");
  REQUIRE(bad_gamma.exit_code == 2);
  REQUIRE(bad_gamma.output.find("gamma") != std::string::npos);
}

TEST_CASE("cli: unwritable output directory exits 3") {
  auto r = run_cli("minimum --out /proc/nowhere/sub");
  REQUIRE(r.exit_code == 3);
}

TEST_CASE("cli: adapt with identical priors writes the constant 100") {
  const auto dir = fresh_dir("adapt_eq");
  auto r = run_cli("adapt --prior-a delta:1.5 --prior-b delta:1.5 --grid "
                   "0.01,100,0.01,100,24,24 --out " +
                   dir.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream f(dir / "change_map.csv");
  std::string line;
  std::getline(f, line);
  REQUIRE(line == "T,S,value");
  int rows = 0;
  while (std::getline(f, line)) {
    const auto last = line.rfind(',');
    REQUIRE(std::abs(std::stod(line.substr(last + 1)) - 100.0) < 1e-9);
    ++rows;
  }
  REQUIRE(rows == 24 * 24);
}

TEST_CASE("cli: repeated runs with the same config are byte-identical") {
  const auto dir = fresh_dir("repeat");
  const std::string args = "surface --lambda 1.1,0.9,2,0.4 --grid "
                           "0.02,50,0.02,50,48,48 --formats csv,json,svg --out " +
                           dir.string();
  REQUIRE(run_cli(args).exit_code == 0);
  const auto csv1 = slurp(dir / "surface.csv");
  const auto svg1 = slurp(dir / "surface.svg");
  const auto manifest1 = slurp(dir / "surface_manifest.json");
  REQUIRE(run_cli(args).exit_code == 0);
  REQUIRE(slurp(dir / "surface.csv") == csv1);
  REQUIRE(slurp(dir / "surface.svg") == svg1);
  REQUIRE(slurp(dir / "surface_manifest.json") == manifest1);
}

TEST_CASE("cli: --config file with flag overrides and config round-trip") {
  const auto dir = fresh_dir("config");
  // Produce a manifest, then reuse its embedded config as --config input.
  REQUIRE(run_cli("optimal-set --mode integral --ve 2.5 --lambda 1,2,3,4 --out " +
                  dir.string())
              .exit_code == 0);
  auto manifest = motionopt::load_json(dir / "optimal-set_manifest.json");
  const json config = manifest.at("config");
  const auto config_path = dir / "config.json";
  motionopt::write_json(config_path, config);

  // Re-running from the config file reproduces the same curve.
  const auto csv1 = slurp(dir / "optimal_set.csv");
  const auto dir2 = fresh_dir("config2");
  REQUIRE(run_cli("optimal-set --config " + config_path.string() + " --out " +
                  dir2.string())
              .exit_code == 0);
  REQUIRE(slurp(dir2 / "optimal_set.csv") == csv1);

  // Explicit flags override config values.
  const auto dir3 = fresh_dir("config3");
  REQUIRE(run_cli("optimal-set --config " + config_path.string() +
                  " --mode local --out " + dir3.string())
              .exit_code == 0);
  auto manifest3 = motionopt::load_json(dir3 / "optimal-set_manifest.json");
  REQUIRE(manifest3.at("config").at("mode").get<std::string>() == "local");
  REQUIRE(slurp(dir3 / "optimal_set.csv") != csv1);

  // Saved config loads back equal to itself (lossless round-trip).
  auto reloaded = motionopt::load_json(config_path);
  REQUIRE(reloaded == config);
}

TEST_CASE("cli: contours flags empty below-minimum levels in the manifest") {
  const auto dir = fresh_dir("contours");
  auto r = run_cli("contours --levels 3.5,5 --grid 0.01,100,0.01,100,48,48 --out " +
                   dir.string());
  REQUIRE(r.exit_code == 0);
  auto manifest = motionopt::load_json(dir / "contours_manifest.json");
  const auto& curves = manifest.at("curves");
  REQUIRE(curves.size() >= 2);
  bool found_flagged = false, found_closed = false;
  for (const auto& c : curves) {
    if (c.at("empty").get<bool>() && c.at("level").get<double>() == 3.5)
      found_flagged = true;
    if (c.at("closed").get<bool>() && c.at("level").get<double>() == 5.0)
      found_closed = true;
  }
  REQUIRE(found_flagged);
  REQUIRE(found_closed);
}

TEST_CASE("cli: simulate writes summary stats and is threads-invariant") {
  const auto dir1 = fresh_dir("sim1");
  const auto dir2 = fresh_dir("sim2");
  const std::string common =
      "simulate --sensors 800 --epochs 50 --seed 9 --checkpoint-every 20 "
      "--density-grid 0.01,100,0.01,100,8,8";
  REQUIRE(run_cli(common + " --threads 1 --out " + dir1.string()).exit_code == 0);
  REQUIRE(run_cli(common + " --threads 2 --out " + dir2.string()).exit_code == 0);
  REQUIRE(slurp(dir1 / "density_final.csv") == slurp(dir2 / "density_final.csv"));
  REQUIRE(slurp(dir1 / "density_epoch_00020.csv") ==
          slurp(dir2 / "density_epoch_00020.csv"));
  auto j1 = motionopt::load_json(dir1 / "simulation.json");
  auto j2 = motionopt::load_json(dir2 / "simulation.json");
  REQUIRE(j1.at("epoch_stats") == j2.at("epoch_stats"));
  REQUIRE(j1.at("spearman_rho") == j2.at("spearman_rho"));
  REQUIRE(j1.at("epoch_stats").size() == 51);
}

TEST_CASE("cli: expand and emulate report their residuals") {
  const auto dir = fresh_dir("expansion");
  auto r1 = run_cli("expand --omega0 1 --sigma 1 --n-points 512 --half-range 8 --out " +
                    dir.string());
  REQUIRE(r1.exit_code == 0);
  auto m1 = motionopt::load_json(dir / "expand_manifest.json");
  REQUIRE(m1.at("achieved_residual").get<double>() < 1e-3);

  auto r2 = run_cli("emulate --target-sigma 0.5 --base-sigma 1 --harmonics 6 --out " +
                    dir.string());
  REQUIRE(r2.exit_code == 0);
  auto m2 = motionopt::load_json(dir / "emulate_manifest.json");
  REQUIRE(m2.at("sup_error").get<double>() < 0.02);

  // Spectrum hole: expansion at a dead frequency is a validation error.
  auto r3 = run_cli("expand --omega0 6.0 --sigma 1 --out " + dir.string());
  REQUIRE(r3.exit_code == 2);
  REQUIRE(r3.output.find("hole") != std::string::npos);
}

TEST_CASE("cli: entropy-check emits closed forms with quadrature agreement") {
  const auto dir = fresh_dir("entropy");
  auto r = run_cli("entropy-check --sigmas 0.5,1,2 --out " + dir.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream f(dir / "entropy_check.csv");
  std::string line;
  std::getline(f, line);
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  REQUIRE(rows == 3);
  auto manifest = motionopt::load_json(dir / "entropy-check_manifest.json");
  REQUIRE(manifest.at("gaussian_largest_everywhere").get<bool>());
  REQUIRE(manifest.at("independence_min_slack").get<double>() >= -1e-12);
}

TEST_CASE("cli: MOTIONOPT_OUT_DIR provides the default output directory") {
  const auto dir = fresh_dir("envdir");
  const std::string command = std::string("MOTIONOPT_OUT_DIR=") + dir.string() + " " +
                              kBinary + " minimum --lambda 1,1,1,1 > /dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
  REQUIRE(fs::exists(dir / "minimum.json"));
}
