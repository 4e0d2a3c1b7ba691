#include "fkpath/cli/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>

#include "fkpath/fkmatrix.hpp"
#include "fkpath/fkschrodinger.hpp"
#include "fkpath/numerics.hpp"
#include "fkpath/opalg.hpp"
#include "fkpath/phasespace.hpp"
#include "fkpath/potentials.hpp"
#include "fkpath/stochint.hpp"
#include "fkpath/wiener.hpp"

namespace fkpath::cli {

namespace {

using Eigen::MatrixXcd;
using fkschrodinger::PotentialConfig;
using fkschrodinger::WaveFunction;
constexpr double kPi = std::numbers::pi;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string fmt_point(std::span<const double> q) {
  std::string s = "(";
  for (std::size_t i = 0; i < q.size(); ++i) s += (i ? " " : "") + fmt(q[i]);
  return s + ")";
}

Exec exec_of(const ExperimentConfig& c) { return Exec::with_workers(c.workers); }

void need_even_paths(const ExperimentConfig& c) {
  if (c.n_paths % 2 != 0) throw ConfigError("n_paths: matrix experiments pair antithetic paths, need an even count");
}

ScalarEstimate as_estimate(double mean, double stderr) {
  ScalarEstimate e;
  e.mean = mean;
  e.stderr_re = stderr;
  return e;
}

// ---- shared readers ----

struct Potential {
  std::string name;
  fkschrodinger::PresetParams params;
  PotentialConfig config;

  double param(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

Potential read_potential(ParamReader& rd, const std::string& fallback) {
  Potential p;
  p.name = rd.text("potential", fallback);
  const json raw = rd.object("potential_params", json::object());
  for (const auto& [k, v] : raw.items()) {
    if (!v.is_number()) rd.fail("potential_params." + k, "expected a number");
    p.params[k] = v.get<double>();
  }
  try {
    p.config = fkschrodinger::make_preset(p.name, p.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
  return p;
}

std::vector<double> read_point(ParamReader& rd, const std::string& key, std::size_t dim,
                               std::vector<double> fallback = {}) {
  if (fallback.empty()) fallback.assign(dim, 0.0);
  auto q = rd.numbers(key, fallback);
  if (q.size() != dim) rd.fail(key, "expected " + std::to_string(dim) + " coordinates");
  return q;
}

struct PsiSpec {
  std::string kind;
  std::vector<double> center, momentum;
  double width = 1.0;
  double value = 1.0;
  std::size_t dim = 1;

  WaveFunction make() const {
    if (kind == "constant") return WaveFunction::constant(dim, value);
    return WaveFunction::gaussian(center, width, momentum);
  }
};

PsiSpec read_psi(ParamReader& rd, std::size_t dim) {
  ParamReader sub("psi", rd.object("psi", json{{"kind", "gaussian"}}));
  PsiSpec s;
  s.dim = dim;
  s.kind = sub.text("kind", "gaussian");
  if (s.kind == "gaussian") {
    s.center = read_point(sub, "center", dim);
    s.width = sub.number("width", 1.0);
    if (!(s.width > 0.0)) sub.fail("width", "must be positive");
    s.momentum = read_point(sub, "momentum", dim);
  } else if (s.kind == "constant") {
    s.value = sub.number("value", 1.0);
  } else {
    sub.fail("kind", "expected 'gaussian' or 'constant'");
  }
  sub.finish();
  rd.record("psi", sub.resolved());
  return s;
}

double levy_area_kernel(double b, double t) {
  const double x = 0.5 * b * t;
  return (x == 0.0 ? 1.0 : x / std::sinh(x)) / (2.0 * kPi * t);
}

double mehler(std::span<const double> q, std::span<const double> qp, double omega, double t) {
  double k = 1.0;
  const double s = std::sinh(omega * t), ch = std::cosh(omega * t);
  for (std::size_t j = 0; j < q.size(); ++j)
    k *= std::sqrt(omega / (2.0 * kPi * s)) *
         std::exp(-omega * ((q[j] * q[j] + qp[j] * qp[j]) * ch - 2.0 * q[j] * qp[j]) / (2.0 * s));
  return k;
}

// ---- experiments ----

struct WienerStats {
  std::size_t d;
  std::vector<double> times;
  double c_amp, support_end;

  static WienerStats read(ParamReader& rd, const ExperimentConfig& c) {
    WienerStats p;
    p.d = rd.count("d", 2);
    if (p.d == 0) rd.fail("d", "must be positive");
    p.times = rd.numbers("times", {0.25, 0.5, 1.0});
    for (double t : p.times)
      if (!(t > 0.0 && t <= c.t_end)) rd.fail("times", "entries must lie in (0, t_end]");
    p.c_amp = rd.number("c", 1.0);
    p.support_end = rd.number("support_end", std::min(1.0, c.t_end));
    if (!(p.support_end > 0.0 && p.support_end <= c.t_end)) rd.fail("support_end", "must lie in (0, t_end]");
    return p;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const wiener::TimeGrid grid(c.t_end, c.n_steps);
    const Exec exec = exec_of(c);
    const wiener::Ensemble ens{grid, d, c.seed, c.n_paths, 0};
    const auto tab = wiener::estimate_moments(ens, times, exec);
    for (const auto& m : tab.means)
      rows.push_back(stat_row("mean", "s=" + fmt(m.s) + " j=" + std::to_string(m.j),
                              as_estimate(m.mean, m.stderr), 0.0, 4.0));
    for (const auto& v : tab.covariances)
      rows.push_back(stat_row("covariance",
                              "r=" + fmt(v.r) + " s=" + fmt(v.s) + " j=" + std::to_string(v.j) +
                                  " k=" + std::to_string(v.k),
                              as_estimate(v.mean, v.stderr), v.target, 4.0));
    const auto f = wiener::TestFunction::indicator({c_amp}, support_end);
    const wiener::Ensemble e1{grid, 1, c.seed, c.n_paths, c.n_paths};
    rows.push_back(stat_row("char_functional", "", wiener::estimate_char_functional(e1, f, exec),
                            wiener::char_functional_target(f), 3.0));
    const wiener::Ensemble e2{grid, 1, c.seed, c.n_paths, 2 * c.n_paths};
    rows.push_back(stat_row("white_noise", "", wiener::estimate_white_noise_functional(e2, f, exec),
                            std::exp(-0.5 * c_amp * c_amp * support_end), 3.0));
  }
};

struct StochintConvergence {
  std::string field;
  std::size_t d;
  std::vector<double> alphas;

  static StochintConvergence read(ParamReader& rd, const ExperimentConfig&) {
    StochintConvergence p;
    p.field = rd.text("field", "identity");
    if (p.field != "identity" && p.field != "rotation" && p.field != "constant")
      rd.fail("field", "expected identity, rotation or constant");
    p.d = rd.count("d", p.field == "rotation" ? 2 : 1);
    if (p.d == 0) rd.fail("d", "must be positive");
    if (p.field == "rotation" && p.d != 2) rd.fail("d", "the rotation field lives in d = 2");
    p.alphas = rd.numbers("alphas", {0.0, 0.5, 1.0});
    for (double a : p.alphas)
      if (!(a >= 0.0 && a <= 1.0)) rd.fail("alphas", "entries must lie in [0, 1]");
    return p;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const auto f = field == "identity"   ? stochint::identity_field(d)
                   : field == "rotation" ? stochint::rotation_field_2d()
                                         : stochint::constant_field(std::vector<double>(d, 1.0));
    const wiener::Ensemble ens{wiener::TimeGrid(c.t_end, c.n_steps), d, c.seed, c.n_paths, 0};
    for (double a : alphas) {
      const auto st = stochint::convert_residual_stats(ens, f, stochint::AlphaScheme(a), exec_of(c));
      const std::string comp = "alpha=" + fmt(a);
      if (a == 0.5 || field == "constant") {
        // the formula degenerates: both sides are the same floating-point sum
        rows.push_back(tol_row("mean_square_residual", comp, st.mean_square, 0.0, 0.0));
      } else if (field == "rotation") {
        // alpha sums differ by dw^T J dw = 0, only rounding is left
        rows.push_back(tol_row("mean_square_residual", comp, st.mean_square, 0.0, 1e-24));
      } else {
        Row r = info_row("mean_square_residual", comp, st.mean_square, st.mean_square_stderr);
        r.expected_slope = -1.0;
        rows.push_back(r);
      }
      rows.push_back(info_row("rms_residual", comp, st.rms));
    }
  }
};

struct FkMatrix {
  std::vector<MatrixXcd> a;
  MatrixXcd b;
  bool nov, duhamel;
  std::size_t n_quad;
  double z_max, abs_tol;

  static FkMatrix read(ParamReader& rd, const ExperimentConfig& c) {
    need_even_paths(c);
    FkMatrix p;
    p.a = rd.matrices("a", json::array({"sigma_x"}));
    p.b = rd.matrix("b", "zero");
    if (p.b.rows() != p.a.front().rows()) rd.fail("b", "dimension differs from a");
    p.nov = rd.flag("nov", false);
    if (p.nov && p.b.norm() != 0.0) rd.fail("nov", "the Nov identity needs b = 0");
    p.duhamel = rd.flag("duhamel", false);
    p.n_quad = rd.count("n_quad", 16);
    if (p.n_quad == 0) rd.fail("n_quad", "must be positive");
    p.z_max = rd.number("z_max", 3.0);
    p.abs_tol = rd.number("abs_tol", 1e-2);
    return p;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const fkmatrix::FKProblem prob(opalg::OperatorTuple(a), b, c.t_end, c.n_steps);
    const fkmatrix::Sampling s{c.n_paths, c.seed, 0, exec_of(c)};
    add_matrix_rows(rows, "fk", fkmatrix::estimate_generalized_fk(prob, s), fkmatrix::rhs_generator(prob),
                    z_max, abs_tol);
    const MatrixXcd zero = MatrixXcd::Zero(b.rows(), b.cols());
    if (nov) {
      const auto res = fkmatrix::check_nov_identity(prob, {c.n_paths, c.seed, c.n_paths, exec_of(c)});
      for (std::size_t j = 0; j < res.size(); ++j)
        add_matrix_rows(rows, "nov[" + std::to_string(j) + "]", res[j], zero, 4.0, 0.0);
    }
    if (duhamel)
      add_matrix_rows(rows, "duhamel",
                      fkmatrix::check_duhamel(prob, n_quad, {c.n_paths, c.seed, 2 * c.n_paths, exec_of(c)}),
                      zero, 4.0, 0.0);
  }
};

struct FkProduct {
  MatrixXcd a_plus, a_minus, b;
  double z_max, abs_tol;

  static FkProduct read(ParamReader& rd, const ExperimentConfig& c) {
    need_even_paths(c);
    FkProduct p;
    p.a_plus = rd.matrix("a_plus", "sigma_plus");
    p.a_minus = rd.matrix("a_minus", "sigma_minus");
    p.b = rd.matrix("b", "zero");
    if (p.a_minus.rows() != p.a_plus.rows() || p.b.rows() != p.a_plus.rows())
      rd.fail("b", "a_plus, a_minus and b must share a dimension");
    p.z_max = rd.number("z_max", 3.0);
    p.abs_tol = rd.number("abs_tol", 1e-2);
    return p;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const auto est = fkmatrix::estimate_product_formula(a_plus, a_minus, b, c.t_end, c.n_steps,
                                                        {c.n_paths, c.seed, 0, exec_of(c)});
    add_matrix_rows(rows, "product", est, fkmatrix::product_formula_target(a_plus, a_minus, b, c.t_end),
                    z_max, abs_tol);
  }
};

std::optional<cplx> read_target(ParamReader& rd) {
  if (!rd.has("target")) return std::nullopt;
  const auto v = rd.numbers("target", {});
  if (v.size() != 2) rd.fail("target", "expected [re, im]");
  return cplx(v[0], v[1]);
}

struct FkSemigroup {
  Potential pot;
  PsiSpec psi;
  std::vector<double> q;
  std::optional<cplx> target;
  double z_max;

  static FkSemigroup read(ParamReader& rd, const ExperimentConfig&) {
    FkSemigroup p;
    p.pot = read_potential(rd, "harmonic");
    p.psi = read_psi(rd, p.pot.config.dim);
    p.q = read_point(rd, "q", p.pot.config.dim);
    p.target = read_target(rd);
    p.z_max = rd.number("z_max", 3.0);
    return p;
  }

  // closed forms for the cases that have one
  std::optional<cplx> builtin_target(double t) const {
    if (pot.name == "free" && psi.kind == "constant") return psi.value;
    if (pot.name == "free" && psi.kind == "gaussian") {
      const double s2 = psi.width * psi.width;
      const auto wf = psi.make();
      cplx val = std::abs(wf(psi.center));
      for (std::size_t j = 0; j < q.size(); ++j) {
        const double k = psi.momentum[j], c = psi.center[j];
        const cplx shift = q[j] - c - cplx(0.0, k * s2);
        val *= std::sqrt(s2 / (s2 + t)) *
               std::exp(-shift * shift / (2.0 * (s2 + t)) + cplx(0.0, k * c) - 0.5 * k * k * s2);
      }
      return val;
    }
    if (pot.name == "harmonic" && psi.kind == "gaussian") {
      const double omega = pot.param("omega", 1.0);
      bool ground = std::abs(psi.width * std::sqrt(omega) - 1.0) < 1e-12;
      for (std::size_t j = 0; j < q.size(); ++j) ground = ground && psi.center[j] == 0.0 && psi.momentum[j] == 0.0;
      if (ground) return std::exp(-0.5 * omega * t * static_cast<double>(q.size())) * psi.make()(q);
    }
    return std::nullopt;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const auto est = fkschrodinger::apply_semigroup(pot.config, psi.make(), q, c.t_end,
                                                    {c.n_paths, c.n_steps, c.seed, 0, exec_of(c)});
    const auto tgt = target ? target : builtin_target(c.t_end);
    rows.push_back(tgt ? stat_row("semigroup", fmt_point(q), est, *tgt, z_max)
                       : info_row("semigroup", fmt_point(q), est.mean, est.stderr()));
    rows.push_back(info_row("rejected_paths", "", static_cast<double>(est.n_rejected)));
  }
};

struct FkKernel {
  Potential pot;
  std::vector<double> q, qp;
  std::optional<cplx> target;
  double z_max, rel_tol;
  bool ck;
  double ck_half_width;
  std::size_t ck_panels, ck_order, ck_paths;

  static FkKernel read(ParamReader& rd, const ExperimentConfig& c) {
    FkKernel p;
    p.pot = read_potential(rd, "harmonic");
    const auto d = p.pot.config.dim;
    p.q = read_point(rd, "q", d);
    p.qp = read_point(rd, "q_prime", d);
    p.target = read_target(rd);
    p.z_max = rd.number("z_max", 3.0);
    p.rel_tol = rd.number("rel_tol", 0.02);
    p.ck = rd.flag("chapman_kolmogorov", false);
    if (p.ck && d != 1) rd.fail("chapman_kolmogorov", "only available in one dimension");
    p.ck_half_width = rd.number("ck_half_width", 6.0);
    p.ck_panels = rd.count("ck_panels", 8);
    p.ck_order = rd.count("ck_order", 6);
    p.ck_paths = rd.count("ck_paths", std::max<std::size_t>(2, c.n_paths / 10));
    if (p.ck_panels == 0 || p.ck_order == 0 || p.ck_paths == 0) rd.fail("ck_paths", "ck sizes must be positive");
    return p;
  }

  std::optional<cplx> builtin_target(double t) const {
    if (pot.name == "free") return fkschrodinger::free_kernel(q, qp, t);
    if (pot.name == "harmonic") return mehler(q, qp, pot.param("omega", 1.0), t);
    if (pot.name == "constant-magnetic-2d" && pot.param("omega", 0.0) == 0.0 && q == qp)
      return levy_area_kernel(pot.param("b", 1.0), t);
    return std::nullopt;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const auto exec = exec_of(c);
    const auto est = fkschrodinger::kernel(pot.config, q, qp, c.t_end, {c.n_paths, c.n_steps, c.seed, 0, exec});
    const auto tgt = target ? target : builtin_target(c.t_end);
    const std::string comp = fmt_point(q) + "->" + fmt_point(qp);
    rows.push_back(tgt ? stat_row("kernel", comp, est, *tgt, z_max, rel_tol * std::abs(*tgt))
                       : info_row("kernel", comp, est.mean, est.stderr()));
    if (pot.name == "free") rows.push_back(tol_row("kernel_stderr", comp, est.stderr(), 0.0, 0.0));
    if (!ck) return;
    const double mid = 0.5 * (q[0] + qp[0]);
    const auto rule = composite_gauss_legendre(mid - ck_half_width, mid + ck_half_width, ck_panels, ck_order);
    double sum = 0.0, var = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const std::vector<double> m{rule.nodes[i]};
      const std::uint64_t base = c.n_paths + 2 * i * ck_paths;
      const auto a = fkschrodinger::kernel(pot.config, q, m, 0.5 * c.t_end, {ck_paths, c.n_steps / 2 + 1, c.seed, base, exec});
      const auto b = fkschrodinger::kernel(pot.config, m, qp, 0.5 * c.t_end,
                                           {ck_paths, c.n_steps / 2 + 1, c.seed, base + ck_paths, exec});
      const double w = rule.weights[i];
      sum += w * a.mean.real() * b.mean.real();
      var += w * w * (std::pow(b.mean.real() * a.stderr(), 2) + std::pow(a.mean.real() * b.stderr(), 2));
    }
    rows.push_back(stat_row("chapman_kolmogorov", comp,
                            as_estimate(sum, std::sqrt(var + est.stderr() * est.stderr())), est.mean.real(),
                            z_max, rel_tol * std::abs(est.mean.real())));
  }
};

struct Gauge {
  Potential pot;
  std::vector<double> q, qp;
  double z_max;

  static Gauge read(ParamReader& rd, const ExperimentConfig&) {
    Gauge p;
    p.pot = read_potential(rd, "gauge-linear");
    if (!p.pot.config.has_gauge()) rd.fail("potential", "preset has no gauge function");
    const auto d = p.pot.config.dim;
    p.q = read_point(rd, "q", d);
    p.qp = read_point(rd, "q_prime", d, std::vector<double>(d, 0.5));
    p.z_max = rd.number("z_max", 4.0);
    return p;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const auto r = fkschrodinger::gauge_check(pot.config, q, qp, c.t_end, {c.n_paths, c.n_steps, c.seed, 0, exec_of(c)});
    const std::string comp = fmt_point(q) + "->" + fmt_point(qp);
    rows.push_back(info_row("transformed", comp, r.transformed.mean, r.transformed.stderr()));
    rows.push_back(info_row("rephased", comp, r.rephased.mean, r.rephased.stderr()));
    rows.push_back(stat_row("residual", comp, r.residual, 0.0, z_max));
  }
};

struct KatoSetup {
  fkschrodinger::KatoSpec spec;

  static KatoSetup read(ParamReader& rd, std::size_t d, double half_width) {
    KatoSetup s;
    s.spec.box_lo = read_point(rd, "box_lo", d, std::vector<double>(d, -half_width));
    s.spec.box_hi = read_point(rd, "box_hi", d, std::vector<double>(d, half_width));
    for (std::size_t j = 0; j < d; ++j)
      if (!(s.spec.box_lo[j] < s.spec.box_hi[j])) rd.fail("box_hi", "must exceed box_lo");
    s.spec.probes = rd.points("probes", d, {std::vector<double>(d, 0.0)});
    s.spec.time_nodes = rd.count("time_nodes", 24);
    s.spec.space_order = rd.count("space_order", 6);
    if (s.spec.time_nodes == 0 || s.spec.space_order == 0) rd.fail("time_nodes", "quadrature sizes must be positive");
    return s;
  }
};

struct Kato {
  std::size_t d;
  std::string kind;
  double value, radius;
  PotentialConfig pot;
  KatoSetup setup;
  std::vector<double> times;

  static Kato read(ParamReader& rd, const ExperimentConfig& c) {
    Kato p;
    ParamReader u("u", rd.object("u", json{{"kind", "constant"}}));
    p.kind = u.text("kind", "constant");
    p.radius = 1.0;
    p.value = 1.0;
    if (p.kind == "constant") {
      p.value = u.number("value", 1.0);
      p.d = u.count("d", 1);
    } else if (p.kind == "indicator") {
      p.value = u.number("value", 1.0);
      p.radius = u.number("radius", 1.0);
      if (!(p.radius > 0.0)) u.fail("radius", "must be positive");
      p.d = u.count("d", 1);
    } else if (p.kind == "negative-part") {
      const auto pot = read_potential(u, "constant-well");
      if (!pot.config.v_minus) u.fail("potential", "preset has no negative part");
      p.pot = pot.config;
      p.d = pot.config.dim;
    } else {
      u.fail("kind", "expected constant, indicator or negative-part");
    }
    if (p.d == 0) u.fail("d", "must be positive");
    u.finish();
    rd.record("u", u.resolved());
    p.setup = KatoSetup::read(rd, p.d, p.kind == "indicator" ? p.radius : 10.0);
    p.times = rd.numbers("times", {c.t_end});
    if (p.times.empty()) rd.fail("times", "must not be empty");
    for (double t : p.times)
      if (!(t > 0.0)) rd.fail("times", "entries must be positive");
    return p;
  }

  fkschrodinger::ScalarFn fn() const {
    if (kind == "negative-part") return pot.v_minus;
    if (kind == "indicator")
      return [v = value, r = radius](std::span<const double> x) {
        for (double xi : x)
          if (std::abs(xi) > r) return 0.0;
        return v;
      };
    return [v = value](std::span<const double>) { return v; };
  }

  void run(const ExperimentConfig&, std::vector<Row>& rows) const {
    const auto u = fn();
    for (double t : times) {
      const auto r = fkschrodinger::kato_kappa(u, t, setup.spec);
      const std::string comp = "t=" + fmt(t);
      rows.push_back(kind == "constant" ? tol_row("kappa", comp, r.value, value * t, 1e-4)
                                        : info_row("kappa", comp, r.value));
      rows.push_back(info_row("truncated_mass", comp, r.truncated_mass));
    }
    if (times.size() >= 2) {
      const auto sw = fkschrodinger::kato_decay(u, times, setup.spec);
      rows.push_back(lower_bound_row("decay_slope", "", sw.slope, 0.0, 0.0, 0.0));
    }
  }
};

struct Khasminskii {
  Potential pot;
  std::vector<double> q;
  KatoSetup setup;
  double z_max;

  static Khasminskii read(ParamReader& rd, const ExperimentConfig&) {
    Khasminskii p;
    p.pot = read_potential(rd, "constant-well");
    if (!p.pot.config.v_minus) rd.fail("potential", "preset has no negative part");
    const auto d = p.pot.config.dim;
    p.q = read_point(rd, "q", d);
    p.setup = KatoSetup::read(rd, d, 2.0);
    p.z_max = rd.number("z_max", 3.0);
    return p;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const auto r = fkschrodinger::khasminskii_check(pot.config, q, c.t_end,
                                                    {c.n_paths, c.n_steps, c.seed, 0, exec_of(c)}, setup.spec);
    rows.push_back(info_row("kappa", "", r.kappa));
    rows.push_back(info_row("lhs", fmt_point(q), r.lhs.mean, r.lhs.stderr()));
    rows.push_back(one_sided_row("khasminskii_bound", fmt_point(q), r.lhs.mean.real(), r.bound,
                                 r.lhs.stderr(), z_max));
  }
};

struct Diamagnetic {
  Potential pot;
  PsiSpec psi;
  std::size_t n_probes;
  double probe_radius, t_min, z_max;

  static Diamagnetic read(ParamReader& rd, const ExperimentConfig& c) {
    Diamagnetic p;
    p.pot = read_potential(rd, "constant-magnetic-2d");
    p.psi = read_psi(rd, p.pot.config.dim);
    p.n_probes = rd.count("n_probes", 20);
    if (p.n_probes == 0) rd.fail("n_probes", "must be positive");
    p.probe_radius = rd.number("probe_radius", 1.0);
    p.t_min = rd.number("t_min", std::min(0.2, c.t_end));
    if (!(p.t_min > 0.0 && p.t_min <= c.t_end)) rd.fail("t_min", "must lie in (0, t_end]");
    p.z_max = rd.number("z_max", 3.0);
    return p;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    // probe points come from a stream no path ever uses
    RngStream probe_rng(c.seed, ~std::uint64_t{0});
    const auto wf = psi.make();
    std::size_t strict = 0;
    for (std::size_t i = 0; i < n_probes; ++i) {
      std::vector<double> q(pot.config.dim);
      for (auto& x : q) x = probe_radius * (2.0 * probe_rng.uniform() - 1.0);
      const double t = t_min + (c.t_end - t_min) * probe_rng.uniform();
      const auto r = fkschrodinger::diamagnetic_check(pot.config, wf, q, t,
                                                      {c.n_paths, c.n_steps, c.seed, i * c.n_paths, exec_of(c)});
      rows.push_back(one_sided_row("diamagnetic", "q=" + fmt_point(q) + " t=" + fmt(t), r.magnitude_with_a,
                                   r.without_a.mean.real(), r.combined_stderr, z_max));
      strict += r.strict;
    }
    rows.push_back(info_row("strict_fraction", "", static_cast<double>(strict) / static_cast<double>(n_probes)));
  }
};

struct Lattice {
  std::size_t n_points;
  double length;
  std::string op;
  double a_amp, v_amp;

  static Lattice read(ParamReader& rd, const std::string& fallback_op) {
    Lattice l;
    l.n_points = rd.count("n_points", 64);
    if (l.n_points < 2) rd.fail("n_points", "must be at least 2");
    l.length = rd.number("length", 16.0);
    if (!(l.length > 0.0)) rd.fail("length", "must be positive");
    l.op = rd.text("operator", fallback_op);
    if (l.op != "standard" && l.op != "oscillator" && l.op != "random-hermitian")
      rd.fail("operator", "expected standard, oscillator or random-hermitian");
    l.a_amp = rd.number("a_amp", 0.7);
    l.v_amp = rd.number("v_amp", 0.3);
    return l;
  }

  std::function<double(double)> a() const {
    return [amp = a_amp, l = length](double q) { return amp * std::sin(2.0 * kPi * q / l); };
  }
  std::function<double(double)> da() const {
    return [amp = a_amp, l = length](double q) { return amp * 2.0 * kPi / l * std::cos(2.0 * kPi * q / l); };
  }
  std::function<double(double)> v() const {
    return [amp = v_amp, l = length](double q) { return amp * std::cos(2.0 * kPi * q / l); };
  }

  MatrixXcd build(const phasespace::PeriodicGrid& g, std::uint64_t seed) const {
    if (op == "standard") return phasespace::standard_hamiltonian(g, a(), v());
    if (op == "oscillator")
      return 0.5 * phasespace::momentum_squared(g) +
             phasespace::multiplication_operator(g, [](double q) { return 0.5 * q * q; });
    RngStream rng(seed, 0);
    MatrixXcd m(n_points, n_points);
    for (std::size_t r = 0; r < n_points; ++r)
      for (std::size_t c = 0; c < n_points; ++c) m(r, c) = {rng.normal(), rng.normal()};
    return 0.5 * (m + m.adjoint());
  }
};

struct PhasespaceRoundtrip {
  Lattice lat;
  std::vector<double> alphas;
  double tol, p_window;

  static PhasespaceRoundtrip read(ParamReader& rd, const ExperimentConfig&) {
    PhasespaceRoundtrip p;
    p.lat = Lattice::read(rd, "standard");
    p.alphas = rd.numbers("alphas", {0.0, 0.25, 0.5, 0.75, 1.0});
    for (double a : p.alphas)
      if (!(a >= 0.0 && a <= 1.0)) rd.fail("alphas", "entries must lie in [0, 1]");
    p.tol = rd.number("tol", 1e-10);
    p.p_window = rd.number("p_window", 2.0);
    return p;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const phasespace::PeriodicGrid g(lat.n_points, lat.length);
    const MatrixXcd h = lat.build(g, c.seed);
    for (double a : alphas) {
      const std::string comp = "alpha=" + fmt(a);
      const auto sym = phasespace::alpha_symbol(h, g, a);
      rows.push_back(tol_row("roundtrip", comp, (phasespace::alpha_quantize(sym) - h).norm(), 0.0, tol));
      if (a == 0.5) rows.push_back(tol_row("reality", comp, sym.values.imag().cwiseAbs().maxCoeff(), 0.0, tol));
      if (lat.op == "standard") {
        const auto want = phasespace::standard_symbol(g, a, lat.a(), lat.da(), lat.v());
        double e = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
          if (std::abs(g.p(i)) <= p_window)
            for (std::size_t j = 0; j < g.size(); ++j) e = std::max(e, std::abs(sym.values(i, j) - want.values(i, j)));
        Row r = info_row("standard_symbol_error", comp, e);
        r.expected_slope = -2.0;
        rows.push_back(r);
      }
    }
    rows.push_back(info_row("wraparound_leak", "", phasespace::wraparound_leak(h)));
  }
};

struct Trotter {
  Lattice lat;
  std::vector<double> alphas;
  std::vector<std::size_t> n;
  double slope_tol;

  static Trotter read(ParamReader& rd, const ExperimentConfig&) {
    Trotter p;
    p.lat = Lattice::read(rd, "oscillator");
    p.alphas = rd.numbers("alphas", {0.0, 0.5, 1.0});
    for (double a : p.alphas)
      if (!(a >= 0.0 && a <= 1.0)) rd.fail("alphas", "entries must lie in [0, 1]");
    p.n = rd.counts("n", {4, 8, 16, 32, 64, 128, 256});
    p.slope_tol = rd.number("slope_tol", 0.3);
    return p;
  }

  void run(const ExperimentConfig& c, std::vector<Row>& rows) const {
    const phasespace::PeriodicGrid g(lat.n_points, lat.length);
    const MatrixXcd h = lat.build(g, c.seed);
    const MatrixXcd exact = opalg::expm(-c.t_end * h);
    std::vector<std::vector<MatrixXcd>> products;
    for (double a : alphas) {
      const auto family = phasespace::short_time_family(h, g, a);
      std::vector<double> err;
      products.emplace_back();
      for (std::size_t k : n) {
        products.back().push_back(opalg::trotter_product(family, c.t_end, k));
        err.push_back((products.back().back() - exact).norm());
        // a single n is a sweep point: keep the component stable across the sweep
        const std::string at = n.size() == 1 ? "" : " n=" + std::to_string(k);
        Row r = info_row("error", "alpha=" + fmt(a) + at, err.back());
        if (n.size() == 1) r.expected_slope = -1.0, r.slope_tol = slope_tol;
        rows.push_back(r);
      }
      if (n.size() >= 2) {
        const std::vector<double> x(n.begin(), n.end());
        rows.push_back(tol_row("slope", "alpha=" + fmt(a), loglog_slope(x, err), -1.0, slope_tol));
        std::size_t bad = 0;
        for (std::size_t i = 1; i < err.size(); ++i) bad += !(err[i] < err[i - 1]);
        rows.push_back(tol_row("nonmonotone_steps", "alpha=" + fmt(a), static_cast<double>(bad), 0.0, 0.0));
      }
    }
    if (alphas.size() >= 2) {
      // first and last ordering approach the same limit
      std::vector<double> gap;
      const std::string tag = "alpha=" + fmt(alphas.front()) + " vs " + fmt(alphas.back());
      for (std::size_t i = 0; i < n.size(); ++i) {
        gap.push_back((products.front()[i] - products.back()[i]).norm());
        rows.push_back(info_row("ordering_gap", n.size() == 1 ? tag : tag + " n=" + std::to_string(n[i]), gap.back()));
      }
      if (n.size() >= 2) {
        std::size_t bad = 0;
        for (std::size_t i = 1; i < gap.size(); ++i) bad += !(gap[i] < gap[i - 1]);
        rows.push_back(tol_row("ordering_gap_nonmonotone", tag, static_cast<double>(bad), 0.0, 0.0));
      }
    }
  }
};

// ---- registry ----

struct Entry {
  std::function<json(const ExperimentConfig&)> resolve;
  std::function<void(const ExperimentConfig&, std::vector<Row>&)> run;
};

template <class P>
Entry entry() {
  return {[](const ExperimentConfig& c) {
            ParamReader rd("params", c.params);
            P::read(rd, c);
            rd.finish();
            return rd.resolved();
          },
          [](const ExperimentConfig& c, std::vector<Row>& rows) {
            ParamReader rd("params", c.params);
            const P p = P::read(rd, c);
            rd.finish();
            p.run(c, rows);
          }};
}

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> r{
      {"wiener-stats", entry<WienerStats>()},
      {"stochint-convergence", entry<StochintConvergence>()},
      {"fk-matrix", entry<FkMatrix>()},
      {"fk-product", entry<FkProduct>()},
      {"fk-semigroup", entry<FkSemigroup>()},
      {"fk-kernel", entry<FkKernel>()},
      {"gauge", entry<Gauge>()},
      {"kato", entry<Kato>()},
      {"khasminskii", entry<Khasminskii>()},
      {"diamagnetic", entry<Diamagnetic>()},
      {"phasespace-roundtrip", entry<PhasespaceRoundtrip>()},
      {"trotter", entry<Trotter>()},
  };
  return r;
}

const Entry& lookup(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw ConfigError("experiment: unknown experiment '" + name + "'");
  return it->second;
}

}  // namespace

json resolve_params(const ExperimentConfig& c) { return lookup(c.experiment).resolve(c); }

RunReport run_experiment(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = c;
  lookup(c.experiment).run(c, report.rows);
  for (auto& r : report.rows) r.experiment = c.experiment;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SweepReport run_sweep(const ExperimentConfig& c, const std::string& axis, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  const auto start = std::chrono::steady_clock::now();
  // validate every point before running any of them
  std::vector<ExperimentConfig> configs;
  for (double v : values) configs.push_back(with_axis_value(c, axis, v));
  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < values.size(); ++i) points.push_back({values[i], run_experiment(configs[i])});
  auto s = summarize_sweep(axis, std::move(points));
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace fkpath::cli
