#include "fkpath/phasespace.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fkpath/numerics.hpp"

namespace fkpath::phasespace {

using cplx = std::complex<double>;

PeriodicGrid::PeriodicGrid(std::size_t n_points, double length)
    : n_(n_points), length_(length), k_min_(-static_cast<long>(n_points / 2)) {
  if (n_points < 2) throw std::invalid_argument("PeriodicGrid: need at least 2 points");
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("PeriodicGrid: length must be positive");
}

double PeriodicGrid::p(std::size_t i) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k(i)) / length_;
}

Symbol Symbol::sample(const PeriodicGrid& grid, double alpha,
                      const std::function<cplx(double, double)>& h) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Symbol s{grid, Eigen::MatrixXcd(n, n), alpha};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      s.values(i, j) = h(grid.p(static_cast<std::size_t>(i)), grid.q(static_cast<std::size_t>(j)));
  return s;
}

namespace {

std::size_t wrap(long i, std::size_t n) {
  const long r = i % static_cast<long>(n);
  return static_cast<std::size_t>(r < 0 ? r + static_cast<long>(n) : r);
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
}

// Fourier tables shared by the forward and inverse transforms. Exponents are
// reduced mod N before evaluation so the entries are exact roots of unity.
struct Tables {
  std::size_t n;
  long k_min;
  std::vector<cplx> roots;  // e^{2 pi i r / N}
  Eigen::MatrixXcd f;       // f(i, l) = e^{2 pi i k_i m_l / N}; k and m share the signed range

  explicit Tables(const PeriodicGrid& g) : n(g.size()), k_min(g.k_min()), roots(n) {
    for (std::size_t r = 0; r < n; ++r)
      roots[r] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n));
    const auto ni = static_cast<Eigen::Index>(n);
    f.resize(ni, ni);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) f(i, l) = root(signed_index(i) * signed_index(l));
  }

  long signed_index(std::size_t i) const { return k_min + static_cast<long>(i); }
  cplx root(long e) const { return roots[wrap(e, n)]; }

  // out(j) = row(j + s), periodic; band-limited interpolation when s is not an integer.
  void shift(const Eigen::RowVectorXcd& row, double s, Eigen::RowVectorXcd& out) const {
    if (std::floor(s) == s) {
      const long si = static_cast<long>(s);
      for (std::size_t j = 0; j < n; ++j) out(j) = row(wrap(static_cast<long>(j) + si, n));
      return;
    }
    Eigen::RowVectorXcd spec(static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a) {
      const long kappa = signed_index(a);
      cplx acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += row(c) * root(-kappa * static_cast<long>(c));
      const double turns = std::fmod(static_cast<double>(kappa) * s, static_cast<double>(n));
      spec(a) = acc * std::polar(1.0, 2.0 * std::numbers::pi * turns / static_cast<double>(n));
    }
    for (std::size_t j = 0; j < n; ++j) {
      cplx acc = 0.0;
      for (std::size_t a = 0; a < n; ++a) acc += spec(a) * root(signed_index(a) * static_cast<long>(j));
      out(j) = acc / static_cast<double>(n);
    }
  }
};

}  // namespace

Symbol alpha_symbol(const Operator& h, const PeriodicGrid& grid, double alpha) {
  check_alpha(alpha);
  opalg::validate_operator(h, "alpha_symbol");
  const std::size_t n = grid.size();
  if (static_cast<std::size_t>(h.rows()) != n)
    throw std::invalid_argument("alpha_symbol: operator and grid sizes differ");
  const Tables tb(grid);
  const auto ni = static_cast<Eigen::Index>(n);

  // s(l, j) = <q_j - (1-alpha) m dq| H |q_j + alpha m dq>, m = m_l
  Eigen::MatrixXcd s(ni, ni);
  Eigen::RowVectorXcd diag(ni), shifted(ni);
  for (std::size_t l = 0; l < n; ++l) {
    const long m = tb.signed_index(l);
    for (std::size_t c = 0; c < n; ++c) diag(c) = h(wrap(static_cast<long>(c) - m, n), c);
    tb.shift(diag, alpha * static_cast<double>(m), shifted);
    s.row(l) = shifted;
  }
  return Symbol{grid, tb.f * s, alpha};
}

Operator alpha_quantize(const Symbol& sym) {
  check_alpha(sym.alpha);
  const PeriodicGrid& grid = sym.grid;
  const std::size_t n = grid.size();
  const auto ni = static_cast<Eigen::Index>(n);
  if (sym.values.rows() != ni || sym.values.cols() != ni)
    throw std::invalid_argument("alpha_quantize: symbol shape does not match its grid");
  const Tables tb(grid);
  const Eigen::MatrixXcd s = tb.f.adjoint() * sym.values / static_cast<double>(n);

  Operator h = Operator::Zero(ni, ni);
  Eigen::RowVectorXcd shifted(ni);
  for (std::size_t l = 0; l < n; ++l) {
    const long m = tb.signed_index(l);
    tb.shift(s.row(l), -sym.alpha * static_cast<double>(m), shifted);
    for (std::size_t c = 0; c < n; ++c) h(wrap(static_cast<long>(c) - m, n), c) = shifted(c);
  }
  return h;
}

Operator short_time_R(const Operator& h, const PeriodicGrid& grid, double alpha, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("short_time_R: t must be >= 0");
  return short_time_family(h, grid, alpha)(t);
}

opalg::ApproximantFamily short_time_family(const Operator& h, const PeriodicGrid& grid,
                                           double alpha) {
  auto sym = alpha_symbol(h, grid, alpha);
  // Also evaluated at small negative t by generator_probe; the pointwise
  // exponential is smooth there.
  return opalg::make_family(h.rows(), [sym = std::move(sym)](double t) {
    Symbol e = sym;
    e.values = (-t * sym.values).array().exp().matrix();
    return alpha_quantize(e);
  });
}

TrotterTable trotter_reconstruct(const Operator& h, const PeriodicGrid& grid, double alpha,
                                 double t, std::span<const std::size_t> n_list) {
  const auto family = short_time_family(h, grid, alpha);
  const Operator exact = opalg::expm(-t * h);
  TrotterTable tab;
  tab.alpha = alpha;
  tab.t = t;
  for (std::size_t n : n_list) {
    tab.n.push_back(n);
    tab.error.push_back((opalg::trotter_product(family, t, n) - exact).norm());
  }
  if (tab.n.size() >= 2) {
    std::vector<double> x(tab.n.begin(), tab.n.end());
    tab.slope = loglog_slope(x, tab.error);
  }
  return tab;
}

Operator ordering_mismatch_demo(const std::function<cplx(double, double)>& classical,
                                const PeriodicGrid& grid, double alpha_sym, double alpha_quant) {
  check_alpha(alpha_sym);
  check_alpha(alpha_quant);
  return alpha_quantize(Symbol::sample(grid, alpha_quant, classical)) -
         alpha_quantize(Symbol::sample(grid, alpha_sym, classical));
}

double wraparound_leak(const Operator& h) {
  const double top = h.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0.0;
  const Eigen::Index n = h.rows();
  double leak = 0.0;
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      if (2 * std::abs(r - c) >= n) leak = std::max(leak, std::abs(h(r, c)));
  return leak / top;
}

Operator position_operator(const PeriodicGrid& grid) {
  return multiplication_operator(grid, [](double q) { return q; });
}

Operator multiplication_operator(const PeriodicGrid& grid, const std::function<double(double)>& v) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Operator m = Operator::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m(j, j) = v(grid.q(static_cast<std::size_t>(j)));
  return m;
}

namespace {

Operator spectral(const PeriodicGrid& grid, const std::function<double(double)>& f) {
  const Tables tb(grid);
  const std::size_t n = grid.size();
  const auto ni = static_cast<Eigen::Index>(n);
  Operator m(ni, ni);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        acc += f(grid.p(i)) * tb.root(grid.k(i) * (static_cast<long>(r) - static_cast<long>(c)));
      m(r, c) = acc / static_cast<double>(n);
    }
  return m;
}

}  // namespace

Operator momentum_operator(const PeriodicGrid& grid) {
  return spectral(grid, [](double p) { return p; });
}

Operator momentum_squared(const PeriodicGrid& grid) {
  return spectral(grid, [](double p) { return p * p; });
}

Operator standard_hamiltonian(const PeriodicGrid& grid, const std::function<double(double)>& a,
                              const std::function<double(double)>& v) {
  const std::size_t n = grid.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const double dq = grid.dq();
  Operator kin = Operator::Zero(ni, ni), p = Operator::Zero(ni, ni);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t up = (j + 1) % n, dn = (j + n - 1) % n;
    kin(j, j) += 1.0 / (dq * dq);
    kin(j, up) += -0.5 / (dq * dq);
    kin(j, dn) += -0.5 / (dq * dq);
    p(j, up) += cplx(0.0, -0.5 / dq);
    p(j, dn) += cplx(0.0, 0.5 / dq);
  }
  const Operator av = multiplication_operator(grid, a);
  const Operator vv = multiplication_operator(grid, v);
  return kin - 0.5 * (p * av + av * p) + 0.5 * av * av + vv;
}

Symbol standard_symbol(const PeriodicGrid& grid, double alpha, const std::function<double(double)>& a,
                       const std::function<double(double)>& da,
                       const std::function<double(double)>& v) {
  return Symbol::sample(grid, alpha, [&](double p, double q) {
    const double k = p - a(q);
    return cplx(0.5 * k * k + v(q), (alpha - 0.5) * da(q));
  });
}

void write_csv(std::ostream& os, const Eigen::MatrixXcd& m, const PeriodicGrid& grid, double alpha) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "N=%zu,L=%.17g,alpha=%.17g", grid.size(), grid.length(), alpha);
  os << buf << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%s%.16e,%.16e", c ? "," : "", m(r, c).real(), m(r, c).imag());
      os << buf;
    }
    os << '\n';
  }
}

void write_csv(std::ostream& os, const Symbol& sym) { write_csv(os, sym.values, sym.grid, sym.alpha); }

}  // namespace fkpath::phasespace
