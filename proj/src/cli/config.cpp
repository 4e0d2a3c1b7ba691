#include "fkpath/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "fkpath/cli/experiments.hpp"
#include "fkpath/opalg.hpp"

namespace fkpath::cli {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "wiener-stats", "stochint-convergence", "fk-matrix",  "fk-product",
      "fk-semigroup", "fk-kernel",            "gauge",      "kato",
      "khasminskii",  "diamagnetic",          "phasespace-roundtrip", "trotter"};
  return names;
}

namespace {

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : obj.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw ConfigError(where + ": unknown key '" + k + "'");
}

const json& required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

std::uint64_t as_u64(const json& v, const std::string& what) {
  if (!v.is_number_unsigned()) {
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    throw ConfigError(what + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_double(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(what + ": expected a finite number");
  return x;
}

std::uint64_t parse_u64_text(const char* s, const std::string& what) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    if (str.empty() || str[0] == '-') throw std::invalid_argument(what);
    const auto v = std::stoull(str, &used, 10);
    if (used != str.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a non-negative integer, got '" + s + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  only_keys(doc, {"experiment", "seed", "n_paths", "grid", "workers", "params"}, "config");
  ExperimentConfig c;
  const auto& exp = required(doc, "experiment", "config");
  if (!exp.is_string()) throw ConfigError("experiment: expected a string");
  c.experiment = exp.get<std::string>();
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    throw ConfigError("experiment: unknown experiment '" + c.experiment + "'");
  c.seed = as_u64(required(doc, "seed", "config"), "seed");
  c.n_paths = as_u64(required(doc, "n_paths", "config"), "n_paths");
  if (c.n_paths < 2) throw ConfigError("n_paths: must be at least 2");
  const auto& grid = required(doc, "grid", "config");
  if (!grid.is_object()) throw ConfigError("grid: expected an object");
  only_keys(grid, {"t_end", "n_steps"}, "grid");
  c.t_end = as_double(required(grid, "t_end", "grid"), "grid.t_end");
  if (!(c.t_end > 0.0)) throw ConfigError("grid.t_end: must be positive");
  c.n_steps = as_u64(required(grid, "n_steps", "grid"), "grid.n_steps");
  if (c.n_steps == 0) throw ConfigError("grid.n_steps: must be positive");
  const auto w = as_u64(required(doc, "workers", "config"), "workers");
  if (w == 0 || w > 1024) throw ConfigError("workers: must lie in 1..1024");
  c.workers = static_cast<int>(w);
  const json params = doc.contains("params") ? doc.at("params") : json::object();
  if (!params.is_object()) throw ConfigError("params: expected an object");
  c.params = params;
  c.params = resolve_params(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["n_paths"] = c.n_paths;
  j["grid"] = {{"t_end", c.t_end}, {"n_steps", c.n_steps}};
  j["workers"] = c.workers;
  j["params"] = c.params;
  return j;
}

ExperimentConfig with_axis_value(const ExperimentConfig& c, const std::string& axis, double value) {
  json doc = to_json(c);
  std::string path = axis;
  const std::string head = path.substr(0, path.find('.'));
  if (!doc.contains(head)) {
    if (doc["grid"].contains(head))
      path = "grid." + path;
    else if (doc["params"].contains(head))
      path = "params." + path;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty() || !node->is_object() || !node->contains(key))
      throw ConfigError("sweep axis '" + axis + "' does not name a config entry");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (axis == "experiment" || axis == "workers")
    throw ConfigError("sweep axis '" + axis + "' is not a numeric parameter");
  if (node->is_array()) {
    // a list-valued entry (e.g. trotter n) collapses to the single swept value
    if (node->empty() || !(*node)[0].is_number())
      throw ConfigError("sweep axis '" + axis + "' is not numeric");
  } else if (!node->is_number()) {
    throw ConfigError("sweep axis '" + axis + "' is not numeric");
  }
  const bool integral = node->is_array() ? (*node)[0].is_number_integer() : node->is_number_integer();
  if (integral) {
    if (value < 0 || value != std::floor(value)) throw ConfigError("sweep axis '" + axis + "' needs integers");
    *node = static_cast<std::uint64_t>(value);
  } else {
    *node = value;
  }
  return parse_config(doc);
}

void apply_overrides(ExperimentConfig& c, const char* env_seed, const char* env_workers) {
  if (env_seed && *env_seed) c.seed = parse_u64_text(env_seed, "FKPATH_SEED");
  if (env_workers && *env_workers) {
    const auto w = parse_u64_text(env_workers, "FKPATH_WORKERS");
    if (w == 0 || w > 1024) throw ConfigError("FKPATH_WORKERS: must lie in 1..1024");
    c.workers = static_cast<int>(w);
  }
}

// ---- params ----

ParamReader::ParamReader(std::string where, const json& obj) : where_(std::move(where)), src_(obj) {
  if (!src_.is_object()) throw ConfigError(where_ + ": expected an object");
}

void ParamReader::fail(const std::string& key, const std::string& msg) const {
  throw ConfigError(where_ + "." + key + ": " + msg);
}

const json* ParamReader::lookup(const std::string& key) {
  seen_.push_back(key);
  return src_.contains(key) ? &src_.at(key) : nullptr;
}

double ParamReader::number(const std::string& key, double fallback) {
  const json* v = lookup(key);
  const double x = v ? as_double(*v, where_ + "." + key) : fallback;
  out_[key] = x;
  return x;
}

double ParamReader::number(const std::string& key) {
  if (!src_.contains(key)) fail(key, "required");
  return number(key, 0.0);
}

std::size_t ParamReader::count(const std::string& key, std::size_t fallback) {
  const json* v = lookup(key);
  const std::size_t x = v ? as_u64(*v, where_ + "." + key) : fallback;
  out_[key] = x;
  return x;
}

bool ParamReader::flag(const std::string& key, bool fallback) {
  const json* v = lookup(key);
  if (v && !v->is_boolean()) fail(key, "expected true or false");
  const bool x = v ? v->get<bool>() : fallback;
  out_[key] = x;
  return x;
}

std::string ParamReader::text(const std::string& key, const std::string& fallback) {
  const json* v = lookup(key);
  if (v && !v->is_string()) fail(key, "expected a string");
  const std::string x = v ? v->get<std::string>() : fallback;
  out_[key] = x;
  return x;
}

std::vector<double> ParamReader::numbers(const std::string& key, std::vector<double> fallback) {
  const json* v = lookup(key);
  std::vector<double> x = std::move(fallback);
  if (v) {
    if (!v->is_array()) fail(key, "expected an array of numbers");
    x.clear();
    for (const auto& e : *v) x.push_back(as_double(e, where_ + "." + key));
  }
  out_[key] = x;
  return x;
}

std::vector<std::vector<double>> ParamReader::points(const std::string& key, std::size_t dim,
                                                     std::vector<std::vector<double>> fallback) {
  const json* v = lookup(key);
  auto x = std::move(fallback);
  if (v) {
    if (!v->is_array()) fail(key, "expected a list of points");
    x.clear();
    for (const auto& pt : *v) {
      if (!pt.is_array()) fail(key, "each point is an array of numbers");
      std::vector<double> q;
      for (const auto& e : pt) q.push_back(as_double(e, where_ + "." + key));
      x.push_back(std::move(q));
    }
  }
  if (x.empty()) fail(key, "must not be empty");
  for (const auto& q : x)
    if (q.size() != dim) fail(key, "points need " + std::to_string(dim) + " coordinates");
  out_[key] = x;
  return x;
}

std::vector<std::size_t> ParamReader::counts(const std::string& key, std::vector<std::size_t> fallback) {
  const json* v = lookup(key);
  std::vector<std::size_t> x = std::move(fallback);
  if (v) {
    x.clear();
    if (v->is_array()) {
      for (const auto& e : *v) x.push_back(as_u64(e, where_ + "." + key));
    } else {
      x.push_back(as_u64(*v, where_ + "." + key));
    }
  }
  if (x.empty()) fail(key, "must not be empty");
  for (auto n : x)
    if (n == 0) fail(key, "entries must be positive");
  if (x.size() == 1 && v && !v->is_array())
    out_[key] = x[0];
  else
    out_[key] = x;
  return x;
}

Eigen::MatrixXcd parse_matrix(const json& v, const std::string& where) {
  using namespace opalg;
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    if (name == "sigma_x") return pauli::x();
    if (name == "sigma_y") return pauli::y();
    if (name == "sigma_z") return pauli::z();
    if (name == "sigma_plus") return pauli::raising();
    if (name == "sigma_minus") return pauli::lowering();
    if (name == "identity") return pauli::identity();
    if (name == "zero") return Eigen::MatrixXcd::Zero(2, 2);
    throw ConfigError(where + ": unknown matrix name '" + name + "'");
  }
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a matrix name or nested rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = v[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ConfigError(where + ": matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto& e = row[c];
      if (e.is_number()) {
        m(r, c) = as_double(e, where);
      } else if (e.is_array() && e.size() == 2) {
        m(r, c) = {as_double(e[0], where), as_double(e[1], where)};
      } else {
        throw ConfigError(where + ": entries are numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

Eigen::MatrixXcd ParamReader::matrix(const std::string& key, const json& fallback) {
  const json* v = lookup(key);
  const json& src = v ? *v : fallback;
  out_[key] = src;
  return parse_matrix(src, where_ + "." + key);
}

std::vector<Eigen::MatrixXcd> ParamReader::matrices(const std::string& key, const json& fallback) {
  const json* v = lookup(key);
  const json& src = v ? *v : fallback;
  if (!src.is_array() || src.empty()) fail(key, "expected a non-empty list of matrices");
  // a bare numeric matrix would also be an array; require a list of matrices
  std::vector<Eigen::MatrixXcd> out;
  for (std::size_t i = 0; i < src.size(); ++i)
    out.push_back(parse_matrix(src[i], where_ + "." + key + "[" + std::to_string(i) + "]"));
  for (const auto& m : out)
    if (m.rows() != out.front().rows()) fail(key, "matrices differ in dimension");
  out_[key] = src;
  return out;
}

json ParamReader::object(const std::string& key, const json& fallback) {
  const json* v = lookup(key);
  const json& src = v ? *v : fallback;
  if (!src.is_object()) fail(key, "expected an object");
  out_[key] = src;
  return src;
}

void ParamReader::finish() const {
  for (const auto& [k, v] : src_.items())
    if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
      throw ConfigError(where_ + ": unknown key '" + k + "'");
}

}  // namespace fkpath::cli
