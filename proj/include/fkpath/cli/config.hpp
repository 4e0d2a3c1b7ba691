#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace fkpath::cli {

using json = nlohmann::ordered_json;

/// Anything wrong with the configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  double t_end = 0.0;
  std::size_t n_steps = 0;
  int workers = 1;
  json params = json::object();  ///< resolved: every default filled in after validation
};

/// Strict parse of the top-level document. Every top-level key is required;
/// unknown keys anywhere (including params) throw ConfigError. Params are
/// validated and resolved by the experiment's own reader.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Config echo; parse_config(to_json(c)) reproduces c.
json to_json(const ExperimentConfig& c);

/// Sets a numeric scalar addressed by a dotted path ("n_steps", "grid.n_steps",
/// "params.n", "params.potential_params.depth") and re-validates.
ExperimentConfig with_axis_value(const ExperimentConfig& c, const std::string& axis, double value);

/// FKPATH_SEED / FKPATH_WORKERS, then explicit command-line values.
void apply_overrides(ExperimentConfig& c, const char* env_seed, const char* env_workers);

/// Typed, consuming view of a params object. Reads record the resolved value
/// so the echo shows defaults; finish() rejects keys nobody asked for.
class ParamReader {
 public:
  ParamReader(std::string where, const json& obj);

  double number(const std::string& key, double fallback);
  double number(const std::string& key);
  std::size_t count(const std::string& key, std::size_t fallback);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback);
  /// Non-empty list of points, each with `dim` coordinates.
  std::vector<std::vector<double>> points(const std::string& key, std::size_t dim,
                                          std::vector<std::vector<double>> fallback);
  /// Scalar or array of positive integers.
  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback);
  /// Square complex matrix: a name (sigma_x, sigma_y, sigma_z, sigma_plus,
  /// sigma_minus, identity, zero) or nested rows of numbers / [re, im] pairs.
  Eigen::MatrixXcd matrix(const std::string& key, const json& fallback);
  std::vector<Eigen::MatrixXcd> matrices(const std::string& key, const json& fallback);
  /// Raw nested object, returned as-is (caller validates it with its own reader).
  json object(const std::string& key, const json& fallback);

  bool has(const std::string& key) const { return src_.contains(key); }
  /// Replace the echoed value of a nested object with its own resolved form.
  void record(const std::string& key, json v) { out_[key] = std::move(v); }
  void finish() const;
  const json& resolved() const { return out_; }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const;

 private:
  const json* lookup(const std::string& key);

  std::string where_;
  json src_;
  json out_ = json::object();
  std::vector<std::string> seen_;
};

Eigen::MatrixXcd parse_matrix(const json& v, const std::string& where);

}  // namespace fkpath::cli
