#include "fkpath/fkschrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fkpath/numerics.hpp"
#include "fkpath/stochint.hpp"

namespace fkpath::fkschrodinger {

using wiener::TimeGrid;
using wiener::WienerPath;

WaveFunction WaveFunction::constant(std::size_t d, cplx c) {
  return {d, [c](std::span<const double>) { return c; }, std::nullopt};
}

WaveFunction WaveFunction::gaussian(std::vector<double> center, double width,
                                    std::vector<double> momentum) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian: width must be positive");
  const std::size_t d = center.size();
  if (momentum.empty()) momentum.assign(d, 0.0);
  if (momentum.size() != d) throw std::invalid_argument("gaussian: momentum dimension");
  const double norm = std::pow(std::numbers::pi * width * width, -0.25 * static_cast<double>(d));
  WaveFunction psi;
  psi.dim = d;
  psi.norm_hint = 1.0;
  psi.evaluator = [center = std::move(center), momentum = std::move(momentum), width,
                   norm](std::span<const double> q) {
    double e = 0.0, ph = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double x = (q[j] - center[j]) / width;
      e += x * x;
      ph += momentum[j] * q[j];
    }
    return norm * std::exp(-0.5 * e) * std::polar(1.0, ph);
  };
  return psi;
}

namespace {

// Field and scalar integrand built once per worker so the hot loop does not
// rebuild std::function wrappers per path.
struct WeightEvaluator {
  bool has_a;
  stochint::FieldWithDivergence field;
  std::function<double(std::span<const double>, double)> v;

  explicit WeightEvaluator(const PotentialConfig& pot)
      : has_a(pot.has_vector_potential()), field(pot.vector_field()) {
    if (pot.v) v = [f = pot.v](std::span<const double> x, double) { return f(x); };
  }

  std::optional<cplx> operator()(const WienerPath& y) const {
    const double phase = has_a ? stochint::alpha_integral(y, field, stochint::AlphaScheme::stratonovich())
                               : 0.0;
    const double damp = v ? stochint::time_integral(y, v) : 0.0;
    if (!std::isfinite(phase) || !std::isfinite(damp)) return std::nullopt;
    const cplx w = std::exp(-damp) * std::polar(1.0, -phase);
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return std::nullopt;
    return w;
  }
};

void check_point(std::size_t dim, std::span<const double> q, const char* what) {
  if (q.size() != dim) throw std::invalid_argument(std::string(what) + ": point dimension mismatch");
}

void check_sampling(double t, const PathSampling& s) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("t must be positive");
  if (s.n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  if (s.n_steps == 0) throw std::invalid_argument("n_steps must be positive");
}

void check_rejects(const MomentAccumulator& acc, std::size_t n_paths) {
  if (static_cast<double>(acc.rejected()) > kMaxRejectFraction * static_cast<double>(n_paths))
    throw NumericalFailure("rejected " + std::to_string(acc.rejected()) + " of " +
                           std::to_string(n_paths) + " paths with non-finite functionals");
}

// Runs fn(y, out) over shifted paths y = q + w, where w is a free path or a
// bridge pinned at `endpoint` (empty = free).
template <class MakeFn>
MomentAccumulator run_paths(std::size_t dim, std::span<const double> q,
                            std::span<const double> endpoint, double t,
                            const PathSampling& sampling, std::size_t width, MakeFn&& make_fn) {
  const TimeGrid grid(t, sampling.n_steps);
  const std::vector<double> origin(q.begin(), q.end());
  const std::vector<double> end(endpoint.begin(), endpoint.end());
  auto acc = reduce_samples(sampling.n_paths, width, sampling.exec, [&] {
    return [&, y = WienerPath(grid, dim), fn = make_fn()](std::size_t i,
                                                          std::span<double> out) mutable {
      RngStream rng(sampling.seed, sampling.first_stream + i);
      if (end.empty())
        wiener::sample_path_into(y, rng);
      else
        wiener::sample_bridge_into(y, end, rng);
      auto vals = y.values();
      for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += origin[k % dim];
      return fn(static_cast<const WienerPath&>(y), out);
    };
  });
  check_rejects(acc, sampling.n_paths);
  return acc;
}

ScalarEstimate scaled(ScalarEstimate e, double s) {
  e.mean *= s;
  e.stderr_re *= std::abs(s);
  e.stderr_im *= std::abs(s);
  return e;
}

ScalarEstimate slice(const MomentAccumulator& acc, std::size_t offset) {
  const auto se = acc.stderr_of_mean();
  ScalarEstimate e;
  e.mean = {acc.mean()[offset], acc.mean()[offset + 1]};
  e.stderr_re = se[offset];
  e.stderr_im = se[offset + 1];
  e.n_samples = acc.count();
  e.n_rejected = acc.rejected();
  return e;
}

}  // namespace

std::optional<cplx> path_weight(const PotentialConfig& pot, const WienerPath& y) {
  if (y.dim() != pot.dim) throw std::invalid_argument("path_weight: path dimension mismatch");
  return WeightEvaluator(pot)(y);
}

ScalarEstimate apply_semigroup(const PotentialConfig& pot, const WaveFunction& psi,
                               std::span<const double> q, double t, const PathSampling& sampling) {
  check_point(pot.dim, q, "apply_semigroup");
  if (psi.dim != pot.dim) throw std::invalid_argument("apply_semigroup: wave function dimension");
  check_sampling(t, sampling);
  const auto acc = run_paths(pot.dim, q, {}, t, sampling, 2, [&] {
    return [w = WeightEvaluator(pot), &psi](const WienerPath& y, std::span<double> out) {
      const auto weight = w(y);
      if (!weight) return false;
      const cplx val = *weight * psi(y.at(y.n_nodes() - 1));
      if (!std::isfinite(val.real()) || !std::isfinite(val.imag())) return false;
      out[0] = val.real();
      out[1] = val.imag();
      return true;
    };
  });
  return to_scalar_estimate(acc);
}

double free_kernel(std::span<const double> q, std::span<const double> qp, double t) {
  if (q.size() != qp.size()) throw std::invalid_argument("free_kernel: dimension mismatch");
  double r2 = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) r2 += (qp[j] - q[j]) * (qp[j] - q[j]);
  return std::pow(2.0 * std::numbers::pi * t, -0.5 * static_cast<double>(q.size())) *
         std::exp(-r2 / (2.0 * t));
}

namespace {

std::vector<double> displacement(std::span<const double> q, std::span<const double> qp) {
  std::vector<double> d(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) d[j] = qp[j] - q[j];
  return d;
}

}  // namespace

ScalarEstimate kernel(const PotentialConfig& pot, std::span<const double> q,
                      std::span<const double> qp, double t, const PathSampling& sampling) {
  check_point(pot.dim, q, "kernel");
  check_point(pot.dim, qp, "kernel");
  check_sampling(t, sampling);
  const auto end = displacement(q, qp);
  const auto acc = run_paths(pot.dim, q, end, t, sampling, 2, [&] {
    return [w = WeightEvaluator(pot)](const WienerPath& y, std::span<double> out) {
      const auto weight = w(y);
      if (!weight) return false;
      out[0] = weight->real();
      out[1] = weight->imag();
      return true;
    };
  });
  return scaled(to_scalar_estimate(acc), free_kernel(q, qp, t));
}

GaugeResult gauge_check(const PotentialConfig& pot, std::span<const double> q,
                        std::span<const double> qp, double t, const PathSampling& sampling) {
  if (!pot.has_gauge()) throw std::invalid_argument("gauge_check: potential has no gauge function");
  check_point(pot.dim, q, "gauge_check");
  check_point(pot.dim, qp, "gauge_check");
  check_sampling(t, sampling);
  const PotentialConfig moved = pot.gauge_transformed();
  const cplx rephase = std::polar(1.0, pot.chi(q) - pot.chi(qp));
  const auto end = displacement(q, qp);
  const auto acc = run_paths(pot.dim, q, end, t, sampling, 6, [&] {
    return [w1 = WeightEvaluator(moved), w0 = WeightEvaluator(pot), rephase](
               const WienerPath& y, std::span<double> out) {
      const auto a = w1(y), b = w0(y);
      if (!a || !b) return false;
      const cplx rb = rephase * *b, diff = *a - rb;
      out[0] = a->real();
      out[1] = a->imag();
      out[2] = rb.real();
      out[3] = rb.imag();
      out[4] = diff.real();
      out[5] = diff.imag();
      return true;
    };
  });
  const double pre = free_kernel(q, qp, t);
  GaugeResult r;
  r.transformed = scaled(slice(acc, 0), pre);
  r.rephased = scaled(slice(acc, 2), pre);
  r.residual = scaled(slice(acc, 4), pre);
  r.z = z_score(std::abs(r.residual.mean), r.residual.stderr());
  return r;
}

DiamagneticResult diamagnetic_check(const PotentialConfig& pot, const WaveFunction& psi,
                                    std::span<const double> q, double t,
                                    const PathSampling& sampling) {
  check_point(pot.dim, q, "diamagnetic_check");
  check_sampling(t, sampling);
  const PotentialConfig bare = pot.without_vector_potential();
  const auto acc = run_paths(pot.dim, q, {}, t, sampling, 4, [&] {
    return [wa = WeightEvaluator(pot), w0 = WeightEvaluator(bare), &psi](const WienerPath& y,
                                                                         std::span<double> out) {
      const auto a = wa(y), b = w0(y);
      if (!a || !b) return false;
      const cplx p = psi(y.at(y.n_nodes() - 1));
      const cplx xa = *a * p;
      const cplx x0 = *b * std::abs(p);
      out[0] = xa.real();
      out[1] = xa.imag();
      out[2] = x0.real();
      out[3] = x0.imag();
      return true;
    };
  });
  DiamagneticResult r;
  r.with_a = slice(acc, 0);
  r.without_a = slice(acc, 2);
  r.magnitude_with_a = std::abs(r.with_a.mean);
  r.combined_stderr = r.with_a.stderr() + r.without_a.stderr();
  const double gap = r.without_a.mean.real() - r.magnitude_with_a;
  r.holds = gap >= -3.0 * r.combined_stderr;
  r.strict = gap > 3.0 * r.combined_stderr;
  return r;
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// One axis of the spatial rule: nodes y and weights GL_weight * G_s(x - y)
// over the box slice that lies within 10 sqrt(s) of x.
void axis_rule(double x, double s, double lo, double hi, std::size_t order,
               std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  const double sd = std::sqrt(s);
  const double a = std::max(lo, x - 10.0 * sd), b = std::min(hi, x + 10.0 * sd);
  if (!(b > a)) return;
  const auto panels = static_cast<std::size_t>(std::ceil((b - a) / (2.0 * sd)));
  const auto rule = composite_gauss_legendre(a, b, std::max<std::size_t>(panels, 1), order);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sd);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = (x - rule.nodes[i]) / sd;
    nodes.push_back(rule.nodes[i]);
    weights.push_back(rule.weights[i] * norm * std::exp(-0.5 * z * z));
  }
}

// (G_s * u)(x) restricted to the box.
double heat_average(const ScalarFn& u, std::span<const double> x, double s, const KatoSpec& spec) {
  const std::size_t d = x.size();
  std::vector<std::vector<double>> nodes(d), weights(d);
  for (std::size_t j = 0; j < d; ++j) {
    axis_rule(x[j], s, spec.box_lo[j], spec.box_hi[j], spec.space_order, nodes[j], weights[j]);
    if (nodes[j].empty()) return 0.0;
  }
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> y(d);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      y[j] = nodes[j][idx[j]];
      w *= weights[j][idx[j]];
    }
    sum += w * u(y);
    std::size_t j = 0;
    while (j < d && ++idx[j] == nodes[j].size()) idx[j++] = 0;
    if (j == d) break;
  }
  return sum;
}

double mass_outside(std::span<const double> x, double s, const KatoSpec& spec) {
  const double sd = std::sqrt(s);
  double inside = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    inside *= normal_cdf((spec.box_hi[j] - x[j]) / sd) - normal_cdf((spec.box_lo[j] - x[j]) / sd);
  return 1.0 - inside;
}

void check_kato_spec(const KatoSpec& spec) {
  const std::size_t d = spec.box_lo.size();
  if (d == 0 || d > 3 || spec.box_hi.size() != d)
    throw std::invalid_argument("kato_kappa: box must have 1 to 3 matching components");
  for (std::size_t j = 0; j < d; ++j)
    if (!(spec.box_hi[j] > spec.box_lo[j])) throw std::invalid_argument("kato_kappa: empty box");
  if (spec.probes.empty()) throw std::invalid_argument("kato_kappa: no probe points");
  for (const auto& p : spec.probes)
    if (p.size() != d) throw std::invalid_argument("kato_kappa: probe dimension mismatch");
  if (spec.time_nodes == 0 || spec.space_order == 0)
    throw std::invalid_argument("kato_kappa: quadrature sizes must be positive");
}

}  // namespace

KatoResult kato_kappa(const ScalarFn& u, double t, const KatoSpec& spec) {
  check_kato_spec(spec);
  if (!(t > 0.0)) throw std::invalid_argument("kato_kappa: t must be positive");
  // s = t tau^2 absorbs the s^{-1/2}-type behaviour of the heat kernel near s = 0.
  const auto tau = gauss_legendre(spec.time_nodes, 0.0, 1.0);
  KatoResult best;
  best.value = -1.0;
  for (const auto& x : spec.probes) {
    double value = 0.0, lost = 0.0;
    for (std::size_t i = 0; i < tau.nodes.size(); ++i) {
      const double s = t * tau.nodes[i] * tau.nodes[i];
      const double ds = 2.0 * t * tau.nodes[i] * tau.weights[i];
      value += ds * heat_average(u, x, s, spec);
      lost += ds * mass_outside(x, s, spec);
    }
    if (value > best.value) {
      best.value = value;
      best.argmax = x;
      best.truncated_mass = lost / t;
    }
  }
  best.truncation_warning = best.truncated_mass > 1e-6;
  return best;
}

KatoSweep kato_decay(const ScalarFn& u, std::span<const double> ts, const KatoSpec& spec) {
  KatoSweep sw;
  for (double t : ts) {
    sw.t.push_back(t);
    sw.kappa.push_back(kato_kappa(u, t, spec).value);
  }
  if (sw.t.size() >= 2) sw.slope = loglog_slope(sw.t, sw.kappa);
  return sw;
}

ScalarEstimate occupation_time(const ScalarFn& u, std::size_t dim, std::span<const double> q,
                               double t, const PathSampling& sampling) {
  check_point(dim, q, "occupation_time");
  check_sampling(t, sampling);
  const auto acc = run_paths(dim, q, {}, t, sampling, 2, [&] {
    return [f = std::function<double(std::span<const double>, double)>(
                [&u](std::span<const double> x, double) { return u(x); })](const WienerPath& y,
                                                                         std::span<double> out) {
      out[0] = stochint::time_integral(y, f);
      out[1] = 0.0;
      return std::isfinite(out[0]);
    };
  });
  return to_scalar_estimate(acc);
}

KhasminskiiResult khasminskii_check(const PotentialConfig& pot, std::span<const double> q, double t,
                                    const PathSampling& sampling, const KatoSpec& kato) {
  check_point(pot.dim, q, "khasminskii_check");
  check_sampling(t, sampling);
  KhasminskiiResult r;
  if (!pot.v_minus) {
    r.lhs.mean = 1.0;
    r.lhs.n_samples = sampling.n_paths;
    r.bound = 1.0;
    return r;
  }
  r.kappa = kato_kappa(pot.v_minus, t, kato).value;
  r.bound = r.kappa < 1.0 ? 1.0 / (1.0 - r.kappa) : std::numeric_limits<double>::infinity();
  const auto acc = run_paths(pot.dim, q, {}, t, sampling, 2, [&] {
    return [f = std::function<double(std::span<const double>, double)>(
                [vm = pot.v_minus](std::span<const double> x, double) { return vm(x); })](
               const WienerPath& y, std::span<double> out) {
      out[0] = std::exp(stochint::time_integral(y, f));
      out[1] = 0.0;
      return std::isfinite(out[0]);
    };
  });
  r.lhs = to_scalar_estimate(acc);
  r.violated = r.lhs.mean.real() - 3.0 * r.lhs.stderr() > r.bound;
  return r;
}

}  // namespace fkpath::fkschrodinger
