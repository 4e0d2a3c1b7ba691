#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "fkpath/cli/config.hpp"
#include "fkpath/cli/experiments.hpp"
#include "fkpath/cli/report.hpp"
#include "fkpath/fkschrodinger.hpp"

namespace fs = std::filesystem;
using namespace fkpath::cli;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--seed", c.seed, "override the config seed");
  cmd->add_option("--workers", c.workers, "override the worker count")->check(CLI::Range(1, 1024));
  cmd->add_option("--out", c.out, "directory for the JSON report and CSV sidecar");
}

ExperimentConfig load(const Common& c) {
  auto cfg = load_config(c.config_path);
  apply_overrides(cfg, std::getenv("FKPATH_SEED"), std::getenv("FKPATH_WORKERS"));
  if (c.seed) cfg.seed = *c.seed;
  if (c.workers) cfg.workers = *c.workers;
  return cfg;
}

template <class Report>
void emit(const Report& r, const Common& c, const std::string& suffix) {
  const auto doc = to_json(r);
  std::cout << doc.dump(2) << '\n';
  fs::create_directories(c.out);
  const auto stem = fs::path(c.config_path).stem().string() + suffix;
  std::ofstream(fs::path(c.out) / (stem + ".json")) << doc.dump(2) << '\n';
  std::ofstream csv(fs::path(c.out) / (stem + ".csv"));
  write_csv(csv, r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo path-integral lab: Feynman-Kac estimators, stochastic integrals, orderings"};
  app.require_subcommand(1);
  Common run_opts, sweep_opts;
  auto* run = app.add_subcommand("run", "run one experiment");
  add_common(run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "run an experiment over values of one parameter");
  add_common(sweep, sweep_opts);
  std::string axis;
  std::vector<double> values;
  sweep->add_option("--axis", axis, "parameter to vary (n_steps, params.n, ...)")->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      const auto r = run_experiment(load(run_opts));
      emit(r, run_opts, "");
      return r.passed() ? kExitOk : kExitAssertion;
    }
    const auto s = run_sweep(load(sweep_opts), axis, values);
    emit(s, sweep_opts, ".sweep");
    return s.passed() ? kExitOk : kExitAssertion;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fkpath::fkschrodinger::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::overflow_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
