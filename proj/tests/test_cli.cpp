#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "msde/cli/commands.hpp"

using namespace msde;
using namespace msde::cli;
namespace fs = std::filesystem;

namespace {

std::string minimal_config(const std::string& extra_sim = "", const std::string& kind = "sphere") {
  return R"({
    "model": {"kind": ")" + kind + R"(", "d": 2, "r": 0.9},
    "fields": {"a_field": {"name": "identity"}, "b_field": {"name": "zero"}},
    "sim": {"T": 0.1, "h": 0.001, "scheme": "strat_heun", "n_paths": 2)" + extra_sim + R"(},
    "seed": 42
  })";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing validates ranges and rejects unknown keys") {
  CHECK_NOTHROW(parse_config_json(minimal_config()));
  CHECK_THROWS_AS(parse_config_json("{"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"model": {"kind": "sphere", "d": 2}, "bogus": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"model": {"kind": "sphere", "d": 2, "radius": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"model": {"kind": "dodecahedron", "d": 2}})"),
                  ConfigError);
  // r outside (0,1) fails before any computation
  CHECK_THROWS_AS(parse_config_json(R"({"model": {"kind": "sphere", "d": 2, "r": 1.5}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"model": {"kind": "sphere", "d": 2, "K": 0.5}})"),
                  ConfigError);
  // sim validation
  CHECK_THROWS_AS(parse_config_json(minimal_config(R"(, "save_stride": 0)")), ConfigError);
  CHECK_THROWS_AS(parse_config_json(minimal_config(R"(, "h": 2.0)")), ConfigError);
  CHECK_THROWS_AS(parse_config_json(minimal_config(R"(, "scheme": "milstein")")), ConfigError);
  CHECK_THROWS_AS(
      parse_config_json(minimal_config(R"(, "switch": {"policy": "sometimes"})")), ConfigError);
  // init validation
  CHECK_THROWS_AS(parse_config_json(R"({
    "model": {"kind": "sphere", "d": 2},
    "init": {"xi": [2.0, 0.0]}
  })"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({
    "model": {"kind": "sphere", "d": 2},
    "init": {"xi": [0.1, 0.0, 0.3]}
  })"),
                  ConfigError);
}

TEST_CASE("model construction errors surface as ConfigError") {
  auto cfg = parse_config_json(R"({"model": {"kind": "hyperbolic", "d": 5}})");
  CHECK_THROWS_AS(build_model(cfg), ConfigError);
}

TEST_CASE("field specs build and validate") {
  auto cfg = parse_config_json(R"({
    "model": {"kind": "sphere", "d": 2},
    "fields": {"a_field": {"name": "scaled_identity", "c0": 1.0, "coeffs": [0, 0, 0.5]},
               "b_field": {"name": "rotation", "omega": 6.283185307179586}}
  })");
  auto model = build_model(cfg);
  CHECK(build_a_field(cfg, model)->name() == "scaled_identity(world_affine)");
  CHECK(build_b_field(cfg, model)->name() == "rotation");

  auto bad = parse_config_json(R"({
    "model": {"kind": "sphere", "d": 2},
    "fields": {"a_field": {"name": "mystery"}}
  })");
  auto bad_model = build_model(bad);
  CHECK_THROWS_AS(build_a_field(bad, bad_model), ConfigError);
}

TEST_CASE("simulate writes deterministic CSVs: same seed twice is byte-identical") {
  auto cfg = parse_config_json(minimal_config());
  TempDir d1("msde_cli_t1"), d2("msde_cli_t2");
  CHECK(cmd_simulate(cfg, d1.path.string()) == kOk);
  CHECK(cmd_simulate(cfg, d2.path.string()) == kOk);
  for (int i = 0; i < 2; ++i) {
    const std::string f = "traj_" + std::to_string(i) + ".csv";
    const std::string c1 = slurp(d1.path / f);
    CHECK(!c1.empty());
    CHECK(c1 == slurp(d2.path / f));
  }
  // thread count must not matter
  auto cfg_threads = parse_config_json(minimal_config(R"(, "threads": 2)"));
  TempDir d3("msde_cli_t3");
  CHECK(cmd_simulate(cfg_threads, d3.path.string()) == kOk);
  CHECK(slurp(d1.path / "traj_1.csv") == slurp(d3.path / "traj_1.csv"));
  // header layout
  std::istringstream csv(slurp(d1.path / "traj_0.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,chart,xi_0,xi_1,zeta_00,zeta_01,zeta_10,zeta_11,switched");
}

TEST_CASE("sphere brownian motion leaves its first chart within T = 5") {
  auto cfg = parse_config_json(R"({
    "model": {"kind": "sphere", "d": 2},
    "sim": {"T": 5.0, "h": 0.001, "n_paths": 1, "save_stride": 100},
    "seed": 7
  })");
  TempDir dir("msde_cli_switch");
  CHECK(cmd_simulate(cfg, dir.path.string()) == kOk);
  std::istringstream csv(slurp(dir.path / "traj_0.csv"));
  std::string line;
  std::getline(csv, line);  // header
  bool chart_changed = false;
  std::string first_chart;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const std::string chart = line.substr(c1 + 1, c2 - c1 - 1);
    if (first_chart.empty())
      first_chart = chart;
    else if (chart != first_chart)
      chart_changed = true;
  }
  CHECK(chart_changed);
}

TEST_CASE("geometry report runs and passes on the gallery defaults") {
  auto cfg = parse_config_json(R"({"model": {"kind": "sphere", "d": 2}, "seed": 1})");
  TempDir dir("msde_cli_geo");
  CHECK(cmd_geometry_report(cfg, dir.path.string()) == kOk);
  const std::string report = slurp(dir.path / "geometry_report.json");
  CHECK(report.find("\"all_pass\": true") != std::string::npos);

  auto cfg3 = parse_config_json(R"({"model": {"kind": "euclidean", "d": 3}, "seed": 1})");
  TempDir dir3("msde_cli_geo3");
  CHECK(cmd_geometry_report(cfg3, dir3.path.string()) == kOk);
}

TEST_CASE("verify suite selection and minimum path counts") {
  auto cfg = parse_config_json(minimal_config());
  TempDir dir("msde_cli_ver");
  CHECK_THROWS_AS(cmd_verify(cfg, "flow", dir.path.string()), ConfigError);  // needs >= 1000
  CHECK_THROWS_AS(cmd_verify(cfg, "everything", dir.path.string()), ConfigError);
  CHECK(cmd_verify(cfg, "laplacian", dir.path.string()) == kOk);
  const std::string report = slurp(dir.path / "verify_report.json");
  CHECK(report.find("laplacian.lower_bound_violation") != std::string::npos);
}

TEST_CASE("invariants suite passes with an exact-zero entry on flat identity runs") {
  auto cfg = parse_config_json(minimal_config("", "euclidean"));
  TempDir dir("msde_cli_inv");
  CHECK(cmd_verify(cfg, "invariants", dir.path.string()) == kOk);
  const std::string report = slurp(dir.path / "verify_report.json");
  CHECK(report.find("\"value\": 0.0") != std::string::npos);
}

#ifdef MSDE_CLI_PATH
TEST_CASE("binary round trip: exit codes and byte-identical outputs") {
  TempDir dir("msde_cli_bin");
  const fs::path cfg_path = dir.path / "run.json";
  {
    std::ofstream out(cfg_path);
    out << minimal_config();
  }
  const std::string base = std::string(MSDE_CLI_PATH);
  const std::string out1 = (dir.path / "o1").string();
  const std::string out2 = (dir.path / "o2").string();
  auto run = [&](const std::string& args) {
    const std::string cmd = base + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  CHECK(run("simulate --config " + cfg_path.string() + " --out " + out1) == 0);
  CHECK(run("simulate --config " + cfg_path.string() + " --out " + out2) == 0);
  CHECK(slurp(fs::path(out1) / "traj_0.csv") == slurp(fs::path(out2) / "traj_0.csv"));
  // seed override changes the trajectories
  const std::string out3 = (dir.path / "o3").string();
  CHECK(run("simulate --config " + cfg_path.string() + " --seed 9 --out " + out3) == 0);
  CHECK(slurp(fs::path(out1) / "traj_0.csv") != slurp(fs::path(out3) / "traj_0.csv"));
  // config errors exit with 2
  const fs::path bad_path = dir.path / "bad.json";
  {
    std::ofstream out(bad_path);
    out << R"({"model": {"kind": "sphere", "d": 2, "r": 1.5}})";
  }
  CHECK(run("simulate --config " + bad_path.string() + " --out " + out1) == 2);
  CHECK(run("simulate --config " + (dir.path / "missing.json").string()) == 2);
}
#endif
