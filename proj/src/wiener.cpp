#include "fkpath/wiener.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "fkpath/numerics.hpp"
#include "fkpath/stochint.hpp"

namespace fkpath::wiener {

TimeGrid::TimeGrid(double t_end, std::size_t n_steps)
    : t_end_(t_end), n_steps_(n_steps), dt_(0.0) {
  if (n_steps == 0) throw std::invalid_argument("TimeGrid: n_steps must be at least 1");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("TimeGrid: t_end must be positive and finite");
  dt_ = t_end / static_cast<double>(n_steps);
}

WienerPath::WienerPath(TimeGrid grid, std::size_t d)
    : grid_(grid), d_(d), values_((grid.n_steps() + 1) * d, 0.0) {
  if (d == 0) throw std::invalid_argument("WienerPath: dimension must be at least 1");
}

double WienerPath::interpolate(double s, std::size_t j) const {
  if (s <= 0.0) return (*this)(0, j);
  if (s >= grid_.t_end()) return (*this)(grid_.n_steps(), j);
  const double u = s / grid_.dt();
  const auto k = std::min(static_cast<std::size_t>(u), grid_.n_steps() - 1);
  const double frac = u - static_cast<double>(k);
  return (1.0 - frac) * (*this)(k, j) + frac * (*this)(k + 1, j);
}

WienerPath WienerPath::reflected() const {
  WienerPath out = *this;
  for (double& v : out.values_) v = -v;
  return out;
}

void TestFunction::eval(double s, std::span<double> out) const {
  if (s > support_end) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  evaluator(s, out);
}

TestFunction TestFunction::zero(std::size_t d, double support_end) {
  return {d, support_end, [](double, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); }};
}

TestFunction TestFunction::indicator(std::vector<double> c, double end) {
  const std::size_t d = c.size();
  return {d, end, [c = std::move(c), end](double s, std::span<double> out) {
            for (std::size_t j = 0; j < c.size(); ++j) out[j] = (s >= 0.0 && s <= end) ? c[j] : 0.0;
          }};
}

void sample_path_into(WienerPath& path, RngStream& rng) {
  const std::size_t d = path.dim();
  const double sd = std::sqrt(path.grid().dt());
  auto v = path.values();
  std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
  for (std::size_t k = 1; k < path.n_nodes(); ++k)
    for (std::size_t j = 0; j < d; ++j) v[k * d + j] = v[(k - 1) * d + j] + sd * rng.normal();
}

WienerPath sample_path(const TimeGrid& grid, std::size_t d, RngStream& rng) {
  if (d == 0) throw std::invalid_argument("sample_path: dimension must be at least 1");
  WienerPath path(grid, d);
  sample_path_into(path, rng);
  return path;
}

void sample_bridge_into(WienerPath& path, std::span<const double> endpoint, RngStream& rng) {
  const std::size_t d = path.dim();
  if (endpoint.size() != d) throw std::invalid_argument("sample_bridge: endpoint dimension mismatch");
  sample_path_into(path, rng);
  const auto& grid = path.grid();
  const std::size_t n = grid.n_steps();
  std::vector<double> gap(d);
  for (std::size_t j = 0; j < d; ++j) gap[j] = path(n, j) - endpoint[j];
  for (std::size_t k = 1; k < n; ++k) {
    const double frac = grid.time(k) / grid.t_end();
    for (std::size_t j = 0; j < d; ++j) path(k, j) -= frac * gap[j];
  }
  for (std::size_t j = 0; j < d; ++j) path(n, j) = endpoint[j];
}

WienerPath sample_bridge(const TimeGrid& grid, std::size_t d, std::span<const double> endpoint,
                         RngStream& rng) {
  if (d == 0) throw std::invalid_argument("sample_bridge: dimension must be at least 1");
  WienerPath path(grid, d);
  sample_bridge_into(path, endpoint, rng);
  return path;
}

namespace {

// f sampled at the grid nodes, node-major.
std::vector<double> tabulate_nodes(const TimeGrid& grid, const TestFunction& f) {
  std::vector<double> tab((grid.n_steps() + 1) * f.dim);
  for (std::size_t k = 0; k <= grid.n_steps(); ++k)
    f.eval(grid.time(k), std::span<double>(tab.data() + k * f.dim, f.dim));
  return tab;
}

// f sampled at the step midpoints.
std::vector<double> tabulate_midpoints(const TimeGrid& grid, const TestFunction& f) {
  std::vector<double> tab(grid.n_steps() * f.dim);
  for (std::size_t k = 1; k <= grid.n_steps(); ++k)
    f.eval(0.5 * (grid.time(k) + grid.time(k - 1)),
           std::span<double>(tab.data() + (k - 1) * f.dim, f.dim));
  return tab;
}

void check_support(const TimeGrid& grid, const TestFunction& f, std::size_t d) {
  if (f.dim != d) throw std::invalid_argument("test function dimension does not match paths");
  if (f.support_end > grid.t_end())
    throw std::invalid_argument("test function support extends beyond the path horizon");
}

double pair_tabulated(const WienerPath& path, std::span<const double> tab) {
  const std::size_t d = path.dim();
  const std::size_t n = path.grid().n_steps();
  double sum = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += path(k, j) * tab[k * d + j];
    sum += (k == 0 || k == n) ? 0.5 * dot : dot;
  }
  return sum * path.grid().dt();
}

void write_phase(double angle, std::span<double> out) {
  out[0] = std::cos(angle);
  out[1] = -std::sin(angle);
}

}  // namespace

double pair_with_path(const WienerPath& path, const TestFunction& f) {
  check_support(path.grid(), f, path.dim());
  const auto tab = tabulate_nodes(path.grid(), f);
  return pair_tabulated(path, tab);
}

ScalarEstimate estimate_char_functional(std::span<const WienerPath> paths, const TestFunction& f) {
  if (paths.empty()) throw std::invalid_argument("estimate_char_functional: empty ensemble");
  const TimeGrid& grid = paths.front().grid();
  for (const auto& p : paths)
    if (!(p.grid() == grid) || p.dim() != paths.front().dim())
      throw std::invalid_argument("estimate_char_functional: paths do not share one grid");
  check_support(grid, f, paths.front().dim());
  const auto tab = tabulate_nodes(grid, f);
  MomentAccumulator acc(2);
  double buf[2];
  for (const auto& p : paths) {
    write_phase(pair_tabulated(p, tab), buf);
    acc.add(buf);
  }
  return to_scalar_estimate(acc);
}

ScalarEstimate estimate_char_functional(const Ensemble& ens, const TestFunction& f, const Exec& exec) {
  check_support(ens.grid, f, ens.dim);
  const auto tab = tabulate_nodes(ens.grid, f);
  const auto acc = reduce_samples(ens.n_paths, 2, exec, [&] {
    return [&, path = WienerPath(ens.grid, ens.dim)](std::size_t i, std::span<double> out) mutable {
      auto rng = ens.stream(i);
      sample_path_into(path, rng);
      write_phase(pair_tabulated(path, tab), out);
      return true;
    };
  });
  return to_scalar_estimate(acc);
}

double char_functional_target(const TestFunction& f, std::size_t panels) {
  // int int min(r,s) f(r).f(s) = 2 int_0^T ds f(s) . int_0^s dr r f(r)
  const double T = f.support_end;
  const std::size_t d = f.dim;
  const auto outer = composite_gauss_legendre(0.0, T, panels, 8);
  std::vector<double> fs(d), fr(d);
  double total = 0.0;
  for (std::size_t a = 0; a < outer.nodes.size(); ++a) {
    const double s = outer.nodes[a];
    f.eval(s, fs);
    const auto inner = composite_gauss_legendre(0.0, s, 4, 8);
    double inner_sum = 0.0;
    for (std::size_t b = 0; b < inner.nodes.size(); ++b) {
      f.eval(inner.nodes[b], fr);
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += fr[j] * fs[j];
      inner_sum += inner.weights[b] * inner.nodes[b] * dot;
    }
    total += outer.weights[a] * inner_sum;
  }
  return std::exp(-0.5 * 2.0 * total);
}

namespace {

double white_noise_sum(const WienerPath& path, std::span<const double> mid_tab) {
  const std::size_t d = path.dim();
  double sum = 0.0;
  for (std::size_t k = 1; k <= path.grid().n_steps(); ++k)
    for (std::size_t j = 0; j < d; ++j)
      sum += mid_tab[(k - 1) * d + j] * (path(k, j) - path(k - 1, j));
  return sum;
}

}  // namespace

ScalarEstimate estimate_white_noise_functional(std::span<const WienerPath> paths,
                                               const TestFunction& f) {
  if (paths.empty()) throw std::invalid_argument("estimate_white_noise_functional: empty ensemble");
  const TimeGrid& grid = paths.front().grid();
  for (const auto& p : paths)
    if (!(p.grid() == grid) || p.dim() != paths.front().dim())
      throw std::invalid_argument("estimate_white_noise_functional: paths do not share one grid");
  check_support(grid, f, paths.front().dim());
  // g(x, s) = f(s) does not depend on position, so the Stratonovich sum reduces
  // to f at the step midpoints paired with the increments.
  stochint::FieldWithDivergence g;
  g.dim = f.dim;
  g.g = [&f](std::span<const double>, double s, std::span<double> out) { f.eval(s, out); };
  g.div_g = [](std::span<const double>, double) { return 0.0; };
  MomentAccumulator acc(2);
  double buf[2];
  for (const auto& p : paths) {
    write_phase(stochint::alpha_integral(p, g, stochint::AlphaScheme::stratonovich()), buf);
    acc.add(buf);
  }
  return to_scalar_estimate(acc);
}

ScalarEstimate estimate_white_noise_functional(const Ensemble& ens, const TestFunction& f,
                                               const Exec& exec) {
  check_support(ens.grid, f, ens.dim);
  const auto mid = tabulate_midpoints(ens.grid, f);
  const auto acc = reduce_samples(ens.n_paths, 2, exec, [&] {
    return [&, path = WienerPath(ens.grid, ens.dim)](std::size_t i, std::span<double> out) mutable {
      auto rng = ens.stream(i);
      sample_path_into(path, rng);
      write_phase(white_noise_sum(path, mid), out);
      return true;
    };
  });
  return to_scalar_estimate(acc);
}

MomentTable estimate_moments(const Ensemble& ens, std::span<const double> times, const Exec& exec) {
  const std::size_t d = ens.dim;
  std::vector<std::size_t> nodes;
  for (double s : times) {
    if (s < 0.0 || s > ens.grid.t_end()) throw std::invalid_argument("estimate_moments: time outside grid");
    nodes.push_back(static_cast<std::size_t>(std::llround(s / ens.grid.dt())));
  }
  const std::size_t nt = nodes.size();
  // layout: nt*d means, then (nt*d)^2 products
  const std::size_t m = nt * d;
  const auto acc = reduce_samples(ens.n_paths, m + m * m, exec, [&] {
    return [&, path = WienerPath(ens.grid, ens.dim)](std::size_t i, std::span<double> out) mutable {
      auto rng = ens.stream(i);
      sample_path_into(path, rng);
      for (std::size_t a = 0; a < nt; ++a)
        for (std::size_t j = 0; j < d; ++j) out[a * d + j] = path(nodes[a], j);
      for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y) out[m + x * m + y] = out[x] * out[y];
      return true;
    };
  });
  const auto se = acc.stderr_of_mean();
  MomentTable table;
  for (std::size_t a = 0; a < nt; ++a)
    for (std::size_t j = 0; j < d; ++j)
      table.means.push_back({ens.grid.time(nodes[a]), j, acc.mean()[a * d + j], se[a * d + j]});
  for (std::size_t a = 0; a < nt; ++a)
    for (std::size_t b = 0; b < nt; ++b)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k) {
          const std::size_t idx = m + (a * d + j) * m + (b * d + k);
          const double r = ens.grid.time(nodes[a]);
          const double s = ens.grid.time(nodes[b]);
          table.covariances.push_back(
              {r, s, j, k, acc.mean()[idx], se[idx], j == k ? std::min(r, s) : 0.0});
        }
  return table;
}

}  // namespace fkpath::wiener
