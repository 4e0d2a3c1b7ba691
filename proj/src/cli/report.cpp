#include "fkpath/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "fkpath/numerics.hpp"

namespace fkpath::cli {

namespace {

const char* kind_name(Row::Kind k) {
  switch (k) {
    case Row::Kind::statistical: return "statistical";
    case Row::Kind::tolerance: return "tolerance";
    case Row::Kind::one_sided: return "one_sided";
    case Row::Kind::lower_bound: return "lower_bound";
    case Row::Kind::info: return "info";
  }
  return "info";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_row(std::ostream& os, const Row& r) {
  os << csv_field(r.experiment) << ',' << csv_field(r.quantity) << ',' << csv_field(r.component) << ','
     << format_number(r.mean.real()) << ',' << format_number(r.mean.imag()) << ','
     << format_number(r.stderr) << ',' << format_number(r.target.real()) << ','
     << format_number(r.target.imag()) << ',' << format_number(r.z) << ','
     << (r.pass ? "true" : "false") << '\n';
}

json row_json(const Row& r) {
  json j;
  j["quantity"] = r.quantity;
  j["component"] = r.component;
  j["mean"] = {r.mean.real(), r.mean.imag()};
  j["stderr"] = r.stderr;
  j["target"] = {r.target.real(), r.target.imag()};
  j["z"] = r.z;
  j["kind"] = kind_name(r.kind);
  if (r.kind == Row::Kind::statistical || r.kind == Row::Kind::one_sided ||
      r.kind == Row::Kind::lower_bound)
    j["z_max"] = r.z_max;
  if (r.kind == Row::Kind::statistical || r.kind == Row::Kind::tolerance) j["abs_tol"] = r.abs_tol;
  if (r.expected_slope) j["expected_slope"] = *r.expected_slope;
  j["pass"] = r.pass;
  return j;
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void Row::evaluate() {
  const double dev = std::abs(mean - target);
  switch (kind) {
    case Kind::statistical:
      z = z_score(dev, stderr);
      pass = z <= z_max || dev <= abs_tol;
      break;
    case Kind::tolerance:
      z = abs_tol > 0.0 ? dev / abs_tol : (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      pass = dev <= abs_tol;
      break;
    case Kind::one_sided:
      z = z_score(mean.real() - target.real(), stderr);
      pass = mean.real() <= target.real() + z_max * stderr;
      break;
    case Kind::lower_bound:
      z = z_score(target.real() - mean.real(), stderr);
      pass = mean.real() >= target.real() - z_max * stderr;
      break;
    case Kind::info:
      z = 0.0;
      pass = true;
      break;
  }
  // NaN never passes
  if (std::isnan(mean.real()) || std::isnan(mean.imag())) pass = kind == Kind::info;
}

Row stat_row(std::string quantity, std::string component, const ScalarEstimate& e, cplx target,
             double z_max, double abs_tol) {
  Row r;
  r.quantity = std::move(quantity);
  r.component = std::move(component);
  r.mean = e.mean;
  r.stderr = e.stderr();
  r.target = target;
  r.kind = Row::Kind::statistical;
  r.z_max = z_max;
  r.abs_tol = abs_tol;
  r.evaluate();
  return r;
}

Row tol_row(std::string quantity, std::string component, cplx value, cplx target, double abs_tol) {
  Row r;
  r.quantity = std::move(quantity);
  r.component = std::move(component);
  r.mean = value;
  r.target = target;
  r.kind = Row::Kind::tolerance;
  r.abs_tol = abs_tol;
  r.evaluate();
  return r;
}

Row one_sided_row(std::string quantity, std::string component, double value, double bound,
                  double stderr, double z_max) {
  Row r;
  r.quantity = std::move(quantity);
  r.component = std::move(component);
  r.mean = value;
  r.target = bound;
  r.stderr = stderr;
  r.kind = Row::Kind::one_sided;
  r.z_max = z_max;
  r.evaluate();
  return r;
}

Row lower_bound_row(std::string quantity, std::string component, double value, double bound,
                    double stderr, double z_max) {
  Row r = one_sided_row(std::move(quantity), std::move(component), value, bound, stderr, z_max);
  r.kind = Row::Kind::lower_bound;
  r.evaluate();
  return r;
}

Row info_row(std::string quantity, std::string component, cplx value, double stderr) {
  Row r;
  r.quantity = std::move(quantity);
  r.component = std::move(component);
  r.mean = value;
  r.stderr = stderr;
  r.evaluate();
  return r;
}

void add_matrix_rows(std::vector<Row>& rows, const std::string& quantity, const MCEstimate& est,
                     const Eigen::MatrixXcd& target, double z_max, double abs_tol) {
  for (Eigen::Index i = 0; i < est.mean.rows(); ++i)
    for (Eigen::Index j = 0; j < est.mean.cols(); ++j) {
      ScalarEstimate e;
      e.mean = est.mean(i, j);
      e.stderr_re = est.stderr_re(i, j);
      e.stderr_im = est.stderr_im(i, j);
      rows.push_back(stat_row(quantity, "[" + std::to_string(i) + "][" + std::to_string(j) + "]", e,
                              target(i, j), z_max, 0.0));
    }
  ScalarEstimate f;
  f.mean = (est.mean - target).norm();
  f.stderr_re = est.stderr_frobenius();
  rows.push_back(stat_row(quantity, "frobenius", f, 0.0, z_max, abs_tol));
}

bool RunReport::passed() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

bool SweepReport::passed() const {
  for (const auto& p : points)
    if (!p.report.passed()) return false;
  for (const auto& r : slopes)
    if (!r.pass) return false;
  return true;
}

SweepReport summarize_sweep(std::string axis, std::vector<SweepPoint> points) {
  SweepReport s;
  s.axis = std::move(axis);
  s.points = std::move(points);
  if (s.points.size() < 2) return s;
  // keyed on (quantity, component), in first-seen order
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::pair<const Row*, std::vector<double>>> series;
  for (const auto& p : s.points)
    for (const auto& r : p.report.rows) {
      if (!r.expected_slope) continue;
      const auto key = std::make_pair(r.quantity, r.component);
      auto [it, fresh] = series.try_emplace(key, &r, std::vector<double>{});
      if (fresh) order.push_back(key);
      it->second.second.push_back(r.mean.real());
    }
  std::vector<double> x;
  for (const auto& p : s.points) x.push_back(p.value);
  for (const auto& key : order) {
    const auto& [proto, y] = series.at(key);
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool usable = y.size() == x.size();
    for (double v : y) usable = usable && v > 0.0 && std::isfinite(v);
    for (double v : x) usable = usable && v > 0.0;
    if (usable) slope = loglog_slope(x, y);
    Row r = tol_row("slope:" + key.first, key.second, slope, *proto->expected_slope, proto->slope_tol);
    r.experiment = proto->experiment;
    s.slopes.push_back(std::move(r));
  }
  return s;
}

void write_csv(std::ostream& os, const RunReport& r) {
  os << kCsvHeader << '\n';
  for (const auto& row : r.rows) write_row(os, row);
}

void write_csv(std::ostream& os, const SweepReport& s) {
  os << "axis,value," << kCsvHeader << '\n';
  for (const auto& p : s.points)
    for (const auto& row : p.report.rows) {
      os << csv_field(s.axis) << ',' << format_number(p.value) << ',';
      write_row(os, row);
    }
  for (const auto& row : s.slopes) {
    os << csv_field(s.axis) << ",,";
    write_row(os, row);
  }
}

json to_json(const RunReport& r) {
  json j;
  j["config"] = to_json(r.config);
  j["rows"] = json::array();
  for (const auto& row : r.rows) j["rows"].push_back(row_json(row));
  j["passed"] = r.passed();
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

json to_json(const SweepReport& s) {
  json j;
  j["axis"] = s.axis;
  j["runs"] = json::array();
  for (const auto& p : s.points) {
    json run = to_json(p.report);
    run["value"] = p.value;
    j["runs"].push_back(std::move(run));
  }
  j["slopes"] = json::array();
  for (const auto& row : s.slopes) j["slopes"].push_back(row_json(row));
  j["passed"] = s.passed();
  j["wall_seconds"] = s.wall_seconds;
  return j;
}

}  // namespace fkpath::cli
