#include "fkpath/stochint.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fkpath::stochint {

AlphaScheme::AlphaScheme(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("AlphaScheme: alpha must lie in [0, 1]");
}

double divergence_mismatch(const FieldWithDivergence& field,
                           std::span<const std::vector<double>> probes, double s, double step) {
  const std::size_t d = field.dim;
  std::vector<double> xp(d), xm(d), gp(d), gm(d);
  double worst = 0.0;
  for (const auto& x : probes) {
    if (x.size() != d) throw std::invalid_argument("divergence_mismatch: probe dimension");
    double fd = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      xp = x;
      xm = x;
      xp[j] += step;
      xm[j] -= step;
      field.g(xp, s, gp);
      field.g(xm, s, gm);
      fd += (gp[j] - gm[j]) / (2.0 * step);
    }
    worst = std::max(worst, std::abs(fd - field.div_g(x, s)));
  }
  return worst;
}

double alpha_integral(const wiener::WienerPath& path, const FieldWithDivergence& field,
                      const AlphaScheme& scheme) {
  const std::size_t d = path.dim();
  if (field.dim != d) throw std::invalid_argument("alpha_integral: field/path dimension mismatch");
  const double a = scheme.alpha();
  const double b = 1.0 - a;
  const auto& grid = path.grid();
  std::vector<double> x(d), gx(d);
  double sum = 0.0;
  for (std::size_t k = 1; k <= grid.n_steps(); ++k) {
    const auto prev = path.at(k - 1);
    const auto next = path.at(k);
    for (std::size_t j = 0; j < d; ++j) x[j] = a * next[j] + b * prev[j];
    const double s = a * grid.time(k) + b * grid.time(k - 1);
    field.g(x, s, gx);
    for (std::size_t j = 0; j < d; ++j) sum += gx[j] * (next[j] - prev[j]);
  }
  return sum;
}

double time_integral(const wiener::WienerPath& path,
                     const std::function<double(std::span<const double> x, double s)>& u) {
  const auto& grid = path.grid();
  const std::size_t n = grid.n_steps();
  double sum = 0.5 * (u(path.at(0), 0.0) + u(path.at(n), grid.t_end()));
  for (std::size_t k = 1; k < n; ++k) sum += u(path.at(k), grid.time(k));
  return sum * grid.dt();
}

double convert_check(const wiener::WienerPath& path, const FieldWithDivergence& field,
                     const AlphaScheme& scheme) {
  const double strat = alpha_integral(path, field, AlphaScheme::stratonovich());
  const double alpha_sum = alpha_integral(path, field, scheme);
  const double coeff = 0.5 - scheme.alpha();
  const double correction = coeff == 0.0 ? 0.0 : coeff * time_integral(path, field.div_g);
  return strat - (alpha_sum + correction);
}

ResidualStats convert_residual_stats(const wiener::Ensemble& ens, const FieldWithDivergence& field,
                                     const AlphaScheme& scheme, const Exec& exec) {
  const auto acc = reduce_samples(ens.n_paths, 1, exec, [&] {
    return [&, path = wiener::WienerPath(ens.grid, ens.dim)](std::size_t i,
                                                             std::span<double> out) mutable {
      auto rng = ens.stream(i);
      wiener::sample_path_into(path, rng);
      const double r = convert_check(path, field, scheme);
      out[0] = r * r;
      return true;
    };
  });
  ResidualStats st{};
  st.mean_square = acc.mean()[0];
  st.mean_square_stderr = acc.stderr_of_mean()[0];
  st.rms = std::sqrt(st.mean_square);
  st.n_paths = acc.count();
  return st;
}

FieldWithDivergence constant_field(std::vector<double> c) {
  FieldWithDivergence f;
  f.dim = c.size();
  f.g = [c](std::span<const double>, double, std::span<double> out) {
    std::copy(c.begin(), c.end(), out.begin());
  };
  f.div_g = [](std::span<const double>, double) { return 0.0; };
  return f;
}

FieldWithDivergence identity_field(std::size_t d) {
  FieldWithDivergence f;
  f.dim = d;
  f.g = [](std::span<const double> x, double, std::span<double> out) {
    std::copy(x.begin(), x.end(), out.begin());
  };
  f.div_g = [d](std::span<const double>, double) { return static_cast<double>(d); };
  return f;
}

FieldWithDivergence rotation_field_2d() {
  FieldWithDivergence f;
  f.dim = 2;
  f.g = [](std::span<const double> x, double, std::span<double> out) {
    out[0] = -x[1];
    out[1] = x[0];
  };
  f.div_g = [](std::span<const double>, double) { return 0.0; };
  return f;
}

}  // namespace fkpath::stochint
