#include "fkpath/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace fkpath::fkschrodinger {

stochint::FieldWithDivergence PotentialConfig::vector_field() const {
  stochint::FieldWithDivergence f;
  f.dim = dim;
  if (!a) {
    f.g = [](std::span<const double>, double, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
    };
    f.div_g = [](std::span<const double>, double) { return 0.0; };
    return f;
  }
  f.g = [a = a](std::span<const double> x, double, std::span<double> out) { a(x, out); };
  f.div_g = [d = div_a](std::span<const double> x, double) { return d ? d(x) : 0.0; };
  return f;
}

PotentialConfig PotentialConfig::gauge_transformed() const {
  if (!has_gauge()) throw std::invalid_argument("gauge_transformed: no gauge function");
  PotentialConfig out = *this;
  out.a = [a = a, g = grad_chi, d = dim](std::span<const double> q, std::span<double> res) {
    std::vector<double> tmp(d, 0.0);
    g(q, tmp);
    if (a) {
      a(q, res);
      for (std::size_t j = 0; j < d; ++j) res[j] += tmp[j];
    } else {
      std::copy(tmp.begin(), tmp.end(), res.begin());
    }
  };
  // div(a + grad chi) needs the Laplacian of chi, which presets do not carry;
  // the Stratonovich phase never uses it.
  out.div_a = {};
  return out;
}

PotentialConfig PotentialConfig::without_vector_potential() const {
  PotentialConfig out = *this;
  out.a = {};
  out.div_a = {};
  return out;
}

PotentialConfig PotentialConfig::scaled(double s) const {
  if (!(s >= 0.0)) throw std::invalid_argument("scaled: factor must be >= 0");
  PotentialConfig out = *this;
  auto scale = [s](const ScalarFn& f) -> ScalarFn {
    if (!f) return {};
    return [f, s](std::span<const double> q) { return s * f(q); };
  };
  out.v = scale(v);
  out.v_plus = scale(v_plus);
  out.v_minus = scale(v_minus);
  out.div_a = scale(div_a);
  if (a)
    out.a = [a = a, s](std::span<const double> q, std::span<double> res) {
      a(q, res);
      for (double& r : res) r *= s;
    };
  return out;
}

double potential_consistency(const PotentialConfig& pot,
                             std::span<const std::vector<double>> probes, double step) {
  double worst = 0.0;
  std::vector<double> x(pot.dim), ap(pot.dim), am(pot.dim);
  for (const auto& q : probes) {
    if (q.size() != pot.dim) throw std::invalid_argument("potential_consistency: probe dimension");
    const double vp = pot.v_plus ? pot.v_plus(q) : 0.0;
    const double vm = pot.v_minus ? pot.v_minus(q) : 0.0;
    const double v = pot.v ? pot.v(q) : 0.0;
    worst = std::max({worst, std::abs(v - (vp - vm)), -vp, -vm});
    if (pot.a && pot.div_a) {
      double fd = 0.0;
      for (std::size_t j = 0; j < pot.dim; ++j) {
        x = q;
        x[j] = q[j] + step;
        pot.a(x, ap);
        x[j] = q[j] - step;
        pot.a(x, am);
        fd += (ap[j] - am[j]) / (2.0 * step);
      }
      worst = std::max(worst, std::abs(fd - pot.div_a(q)));
    }
  }
  return worst;
}

MagneticField magnetic_field(const PotentialConfig& pot, double step) {
  const std::size_t d = pot.dim;
  MagneticField mf;
  mf.dim = d;
  if (!pot.a) {
    mf.b = [d](std::span<const double>) { return Eigen::MatrixXd::Zero(d, d).eval(); };
    return mf;
  }
  mf.b = [a = pot.a, d, step](std::span<const double> q) {
    // jac(j, k) = d a_j / d q_k
    Eigen::MatrixXd jac(d, d);
    std::vector<double> x(q.begin(), q.end()), ap(d), am(d);
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = q[k] + step;
      a(x, ap);
      x[k] = q[k] - step;
      a(x, am);
      x[k] = q[k];
      for (std::size_t j = 0; j < d; ++j) jac(j, k) = (ap[j] - am[j]) / (2.0 * step);
    }
    return (jac - jac.transpose()).eval();
  };
  return mf;
}

namespace {

struct ParamReader {
  const std::string& preset;
  const PresetParams& params;
  std::set<std::string> allowed;

  double get(const std::string& key, double fallback) {
    allowed.insert(key);
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
  std::size_t dim(double fallback) {
    const double d = get("d", fallback);
    if (d < 1 || d > 3 || d != std::floor(d))
      throw std::invalid_argument(preset + ": d must be 1, 2 or 3");
    return static_cast<std::size_t>(d);
  }
  void finish() const {
    for (const auto& [k, v] : params)
      if (!allowed.count(k)) throw std::invalid_argument(preset + ": unknown parameter '" + k + "'");
  }
};

double norm2(std::span<const double> q) {
  double s = 0.0;
  for (double x : q) s += x * x;
  return s;
}

ScalarFn zero_fn() {
  return [](std::span<const double>) { return 0.0; };
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"free",     "constant-well",        "harmonic",
                                              "coulomb-3d", "constant-magnetic-2d", "gauge-linear"};
  return names;
}

PotentialConfig make_preset(const std::string& name, const PresetParams& params) {
  ParamReader rd{name, params, {}};
  PotentialConfig pot;

  if (name == "free") {
    pot.dim = rd.dim(1);
    pot.v = pot.v_plus = pot.v_minus = zero_fn();
  } else if (name == "constant-well") {
    pot.dim = rd.dim(1);
    const double depth = rd.get("depth", 0.3), radius = rd.get("radius", 1.0);
    if (depth < 0 || radius <= 0) throw std::invalid_argument("constant-well: need depth >= 0, radius > 0");
    pot.v_minus = [depth, radius](std::span<const double> q) {
      for (double x : q)
        if (std::abs(x) > radius) return 0.0;
      return depth;
    };
    pot.v = [vm = pot.v_minus](std::span<const double> q) { return -vm(q); };
    pot.v_plus = zero_fn();
  } else if (name == "harmonic") {
    pot.dim = rd.dim(1);
    const double omega = rd.get("omega", 1.0);
    pot.v = [w2 = omega * omega](std::span<const double> q) { return 0.5 * w2 * norm2(q); };
    pot.v_plus = pot.v;
    pot.v_minus = zero_fn();
  } else if (name == "coulomb-3d") {
    pot.dim = 3;
    const double charge = rd.get("charge", 1.0);
    if (charge < 0) throw std::invalid_argument("coulomb-3d: charge must be >= 0");
    pot.v_minus = [charge](std::span<const double> q) { return charge / std::sqrt(norm2(q)); };
    pot.v = [charge](std::span<const double> q) { return -charge / std::sqrt(norm2(q)); };
    pot.v_plus = zero_fn();
  } else if (name == "constant-magnetic-2d") {
    pot.dim = 2;
    const double b = rd.get("b", 1.0), omega = rd.get("omega", 0.0);
    pot.a = [b](std::span<const double> q, std::span<double> out) {
      out[0] = -0.5 * b * q[1];
      out[1] = 0.5 * b * q[0];
    };
    pot.div_a = zero_fn();
    pot.v = [w2 = omega * omega](std::span<const double> q) { return 0.5 * w2 * norm2(q); };
    pot.v_plus = pot.v;
    pot.v_minus = zero_fn();
  } else if (name == "gauge-linear") {
    pot.dim = rd.dim(1);
    const double c = rd.get("c", 1.0);
    pot.v = pot.v_plus = pot.v_minus = zero_fn();
    pot.chi = [c](std::span<const double> q) { return c * q[0]; };
    pot.grad_chi = [c](std::span<const double>, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      out[0] = c;
    };
  } else {
    throw std::invalid_argument("unknown potential preset '" + name + "'");
  }
  rd.finish();
  return pot;
}

}  // namespace fkpath::fkschrodinger
