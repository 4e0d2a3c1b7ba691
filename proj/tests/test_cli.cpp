#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fkpath/cli/config.hpp"
#include "fkpath/cli/experiments.hpp"
#include "fkpath/cli/report.hpp"

using namespace fkpath::cli;
namespace fs = std::filesystem;

namespace {

json base(const std::string& experiment) {
  return {{"experiment", experiment},
          {"seed", 7},
          {"n_paths", 512},
          {"grid", {{"t_end", 1.0}, {"n_steps", 32}}},
          {"workers", 1},
          {"params", json::object()}};
}

std::string csv_of(const RunReport& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fkpath_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_binary(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + FKPATH_CLI_BINARY + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("strict config parsing") {
  CHECK_NOTHROW(parse_config(base("trotter")));
  auto doc = base("trotter");
  doc["colour"] = "blue";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("trotter");
  doc["params"]["bogus"] = 1;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("trotter");
  doc["grid"]["dt"] = 0.1;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("trotter");
  doc.erase("seed");
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("no-such-experiment");
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("fk-matrix");
  doc["n_paths"] = 513;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("fk-matrix");
  doc["params"]["a"] = json::array({"sigma_q"});
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("fk-semigroup");
  doc["params"]["potential_params"] = {{"omgea", 1.0}};
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("fk-semigroup");
  doc["params"]["psi"] = {{"kind", "gaussian"}, {"widht", 1.0}};
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("wiener-stats");
  doc["params"]["times"] = json::array({2.0});
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("wiener-stats");
  doc["workers"] = 0;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = base("wiener-stats");
  doc["seed"] = -1;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("every experiment validates with defaults only") {
  for (const auto& name : experiment_names()) {
    CAPTURE(name);
    auto doc = base(name);
    if (name == "diamagnetic") doc["grid"]["t_end"] = 2.0;
    CHECK_NOTHROW(parse_config(doc));
  }
}

TEST_CASE("config echo re-parses to the same config") {
  auto doc = base("fk-kernel");
  doc["params"] = {{"potential", "harmonic"}, {"potential_params", {{"omega", 1.5}}}, {"q", {0.1}}};
  const auto c = parse_config(doc);
  CHECK(c.params.at("rel_tol") == 0.02);  // defaults are filled in and echoed
  const auto again = parse_config(to_json(c));
  CHECK(to_json(again) == to_json(c));
}

TEST_CASE("matrices: names, real rows and complex pairs") {
  const auto m = parse_matrix(json::array({json::array({1, json::array({0, -2})}), json::array({json::array({0, 2}), 3})}), "m");
  CHECK(m(0, 1) == std::complex<double>(0, -2));
  CHECK(m(1, 1) == 3.0);
  CHECK(parse_matrix("sigma_y", "m")(0, 1) == std::complex<double>(0, -1));
  CHECK_THROWS_AS(parse_matrix(json::array({json::array({1, 2})}), "m"), ConfigError);
}

TEST_CASE("sweep axes and overrides") {
  auto doc = base("trotter");
  doc["params"]["n_points"] = 16;
  const auto c = parse_config(doc);
  CHECK(with_axis_value(c, "n_steps", 64).n_steps == 64);
  CHECK(with_axis_value(c, "grid.t_end", 0.5).t_end == 0.5);
  CHECK(with_axis_value(c, "n", 8).params.at("n") == 8);
  CHECK(with_axis_value(c, "params.n_points", 32).params.at("n_points") == 32);
  auto well = base("khasminskii");
  well["params"] = {{"potential", "constant-well"}, {"potential_params", {{"depth", 1.0}}}};
  const auto w = with_axis_value(parse_config(well), "potential_params.depth", 0.3);
  CHECK(w.params.at("potential_params").at("depth") == 0.3);
  CHECK_THROWS_AS(with_axis_value(c, "nope", 1), ConfigError);
  CHECK_THROWS_AS(with_axis_value(c, "params.operator", 1), ConfigError);
  CHECK_THROWS_AS(with_axis_value(c, "n_steps", 1.5), ConfigError);

  auto o = c;
  apply_overrides(o, "99", "3");
  CHECK(o.seed == 99);
  CHECK(o.workers == 3);
  apply_overrides(o, nullptr, "");
  CHECK(o.seed == 99);
  CHECK_THROWS_AS(apply_overrides(o, "12x", nullptr), ConfigError);
  CHECK_THROWS_AS(apply_overrides(o, nullptr, "0"), ConfigError);
}

TEST_CASE("row rules") {
  fkpath::ScalarEstimate e;
  e.mean = 1.1;
  e.stderr_re = 0.05;
  CHECK(stat_row("x", "", e, 1.0, 3.0).pass);
  CHECK_FALSE(stat_row("x", "", e, 1.0, 1.0).pass);
  CHECK(stat_row("x", "", e, 1.0, 1.0, 0.2).pass);
  CHECK(tol_row("x", "", 1e-11, 0.0, 1e-10).pass);
  CHECK_FALSE(tol_row("x", "", 0.0, 1e-300, 0.0).pass);
  CHECK(one_sided_row("x", "", 0.5, 0.4, 0.05, 3.0).pass);
  CHECK_FALSE(one_sided_row("x", "", 0.6, 0.4, 0.05, 3.0).pass);
  CHECK(lower_bound_row("x", "", 0.1, 0.0, 0.0, 0.0).pass);
  CHECK_FALSE(lower_bound_row("x", "", -0.1, 0.0, 0.0, 0.0).pass);
  CHECK_FALSE(tol_row("x", "", std::nan(""), 0.0, 1.0).pass);
  CHECK(format_number(0.1) == "1.0000000000000001e-01");
}

TEST_CASE("csv layout") {
  auto doc = base("phasespace-roundtrip");
  doc["params"] = {{"n_points", 16}, {"length", 8.0}, {"alphas", {0.5}}};
  const auto r = run_experiment(parse_config(doc));
  CHECK(r.passed());
  std::istringstream is(csv_of(r));
  std::string line;
  std::getline(is, line);
  CHECK(line == kCsvHeader);
  std::getline(is, line);
  CHECK(line.rfind("phasespace-roundtrip,roundtrip,alpha=0.5,", 0) == 0);
  CHECK(std::count(line.begin(), line.end(), ',') == 9);
  CHECK(line.find("e-") != std::string::npos);
}

TEST_CASE("determinism across worker counts") {
  for (const std::string name : {"fk-matrix", "stochint-convergence", "gauge"}) {
    CAPTURE(name);
    auto doc = base(name);
    doc["n_paths"] = 1000;
    auto c = parse_config(doc);
    const auto one = csv_of(run_experiment(c));
    c.workers = 3;
    CHECK(csv_of(run_experiment(c)) == one);
    CHECK(csv_of(run_experiment(c)) == one);
  }
}

TEST_CASE("sweep") {
  auto doc = base("stochint-convergence");
  doc["n_paths"] = 4000;
  doc["params"]["alphas"] = {0.0};
  const auto c = parse_config(doc);
  const auto s = run_sweep(c, "n_steps", {32, 64, 128, 256});
  REQUIRE(s.slopes.size() == 1);
  CHECK(s.slopes[0].mean.real() == doctest::Approx(-1.0).epsilon(0.3));
  CHECK(s.passed());

  SUBCASE("single value equals run") {
    const auto one = run_sweep(c, "n_steps", {32});
    CHECK(one.slopes.empty());
    CHECK(csv_of(one.points[0].report) == csv_of(run_experiment(c)));
  }
}

TEST_CASE("binary: exit codes and files") {
  const auto dir = scratch("bin");
  const auto good = dir / "good.json";
  auto doc = base("trotter");
  doc["params"] = {{"n_points", 16}, {"length", 8.0}, {"n", {4, 8, 16, 32}}};
  std::ofstream(good) << doc.dump();
  CHECK(run_binary("run " + good.string() + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "good.csv"));
  CHECK(fs::exists(dir / "out" / "good.json"));

  const auto bad = dir / "bad.json";
  doc["params"]["typo"] = 1;
  std::ofstream(bad) << doc.dump();
  CHECK(run_binary("run " + bad.string() + " --out " + (dir / "bad_out").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "bad_out"));
  CHECK(run_binary("run " + (dir / "missing.json").string()) == 2);
  CHECK(run_binary("frobnicate") == 2);

  // assertion failure: a Trotter slope tolerance nobody can meet
  auto strict = base("trotter");
  strict["params"] = {{"n_points", 16}, {"length", 8.0}, {"n", {4, 8}}, {"slope_tol", 1e-9}};
  const auto fail = dir / "fail.json";
  std::ofstream(fail) << strict.dump();
  CHECK(run_binary("run " + fail.string() + " --out " + (dir / "fail_out").string()) == 1);

  auto ovf = base("fk-matrix");
  ovf["params"] = {{"b", {{-1000, 0}, {0, -1000}}}};
  const auto numeric = dir / "ovf.json";
  std::ofstream(numeric) << ovf.dump();
  CHECK(run_binary("run " + numeric.string() + " --out " + (dir / "ovf_out").string()) == 3);

  CHECK(run_binary("sweep " + good.string() + " --axis n --values 4,8,16 --out " + (dir / "sw").string()) == 0);
  CHECK(fs::exists(dir / "sw" / "good.sweep.csv"));

  // environment override shows up in the echoed config
  CHECK(run_binary("run " + good.string() + " --out " + (dir / "env").string(), "FKPATH_SEED=4242") == 0);
  std::ifstream echoed(dir / "env" / "good.json");
  const auto report = json::parse(echoed);
  CHECK(report.at("config").at("seed") == 4242);
  CHECK(run_binary("run " + good.string() + " --seed 5 --out " + (dir / "env").string(), "FKPATH_SEED=4242") == 0);
  std::ifstream echoed2(dir / "env" / "good.json");
  CHECK(json::parse(echoed2).at("config").at("seed") == 5);
  fs::remove_all(dir);
}
