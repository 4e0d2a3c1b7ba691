#include "fkpath/opalg.hpp"

#include "fkpath/detail/product_integral.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace fkpath::opalg {

using cplx = std::complex<double>;

void validate_operator(const Operator& op, const char* what) {
  if (op.rows() == 0 || op.rows() != op.cols())
    throw std::invalid_argument(std::string(what) + ": must be a non-empty square matrix");
  if (!op.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

OperatorTuple::OperatorTuple(std::vector<Operator> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("OperatorTuple: needs at least one component");
  const Eigen::Index m = components_.front().rows();
  for (const auto& c : components_) {
    validate_operator(c, "OperatorTuple component");
    if (c.rows() != m) throw std::invalid_argument("OperatorTuple: components differ in dimension");
  }
}

OperatorTuple OperatorTuple::zeros(std::size_t d, Eigen::Index m) {
  return OperatorTuple(std::vector<Operator>(d, Operator::Zero(m, m)));
}

Operator OperatorTuple::square_sum() const {
  Operator s = Operator::Zero(dim(), dim());
  for (const auto& c : components_) s += c * c;
  return s;
}

ApproximantFamily make_family(Eigen::Index dim, std::function<Operator(double)> evaluator) {
  ApproximantFamily fam{dim, std::move(evaluator)};
  const Operator f0 = fam(0.0);
  if (f0.rows() != dim || f0.cols() != dim)
    throw std::invalid_argument("ApproximantFamily: evaluator returns wrong dimension");
  if ((f0 - Operator::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("ApproximantFamily: F(0) is not the identity");
  return fam;
}

namespace {

// Pade-13 coefficients and the theta_m thresholds of Higham (2005).
constexpr std::array<double, 14> kB13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr std::array<double, 4> kB3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kB5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kB7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                       25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kB9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                        30270240.0,    2162160.0,    110880.0,     3960.0,
                                        90.0,          1.0};
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
Operator pade_low(const Operator& a, const std::array<double, N>& b) {
  const Eigen::Index m = a.rows();
  const Operator id = Operator::Identity(m, m);
  const Operator a2 = a * a;
  Operator u_inner = b[1] * id;
  Operator v = b[0] * id;
  Operator power = id;
  for (std::size_t k = 2; k < N; k += 2) {
    power = power * a2;
    v += b[k] * power;
    if (k + 1 < N) u_inner += b[k + 1] * power;
  }
  const Operator u = a * u_inner;
  return (v - u).partialPivLu().solve(v + u);
}

Operator pade13(const Operator& a) {
  const Eigen::Index m = a.rows();
  const Operator id = Operator::Identity(m, m);
  const Operator a2 = a * a;
  const Operator a4 = a2 * a2;
  const Operator a6 = a4 * a2;
  const auto& b = kB13;
  const Operator u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const Operator v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                     b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Operator expm(const Operator& x) {
  validate_operator(x, "expm");
  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  Operator result;
  if (norm <= kTheta3) {
    result = pade_low(x, kB3);
  } else if (norm <= kTheta5) {
    result = pade_low(x, kB5);
  } else if (norm <= kTheta7) {
    result = pade_low(x, kB7);
  } else if (norm <= kTheta9) {
    result = pade_low(x, kB9);
  } else {
    const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    result = pade13(x / std::ldexp(1.0, s));
    for (int i = 0; i < s; ++i) result = result * result;
  }
  if (!result.allFinite()) throw std::overflow_error("expm: result overflows double precision");
  return result;
}

Eigen::Matrix2cd expm2(const Eigen::Matrix2cd& m) {
  // exp(M) = e^mu [cosh(delta) I + sinh(delta)/delta (M - mu I)],
  // mu = tr/2, delta^2 = ((m00 - m11)/2)^2 + m01 m10. Both factors are even in delta.
  const cplx mu = 0.5 * (m(0, 0) + m(1, 1));
  const cplx half_diff = 0.5 * (m(0, 0) - m(1, 1));
  const cplx delta2 = half_diff * half_diff + m(0, 1) * m(1, 0);
  cplx ch, shc;
  if (std::abs(delta2) < 0.0625) {
    // path steps live here; the tail after delta^12 is below 1e-16 relative
    const cplx z = delta2;
    ch = 1.0 + z * (1.0 / 2 + z * (1.0 / 24 + z * (1.0 / 720 + z * (1.0 / 40320 +
         z * (1.0 / 3628800 + z * (1.0 / 479001600))))));
    shc = 1.0 + z * (1.0 / 6 + z * (1.0 / 120 + z * (1.0 / 5040 + z * (1.0 / 362880 +
          z * (1.0 / 39916800 + z * (1.0 / 6227020800.0))))));
  } else {
    const cplx delta = std::sqrt(delta2);
    ch = std::cosh(delta);
    shc = std::sinh(delta) / delta;
  }
  const cplx scale = mu == 0.0 ? cplx(1.0) : std::exp(mu);
  Eigen::Matrix2cd out;
  out(0, 0) = scale * (ch + shc * half_diff);
  out(1, 1) = scale * (ch - shc * half_diff);
  out(0, 1) = scale * shc * m(0, 1);
  out(1, 0) = scale * shc * m(1, 0);
  if (!out.allFinite()) throw std::overflow_error("expm2: result overflows double precision");
  return out;
}

namespace {

void check_sde_inputs(const wiener::WienerPath& path, const OperatorTuple& a, const Operator& b) {
  validate_operator(b, "ordered_exp_sde B");
  if (a.size() != path.dim())
    throw std::invalid_argument("ordered_exp_sde: path dimension does not match A");
  if (a.dim() != b.rows()) throw std::invalid_argument("ordered_exp_sde: A and B dimensions differ");
}

}  // namespace

void ordered_exp_sde_trajectory(const wiener::WienerPath& path, const OperatorTuple& a,
                                const Operator& b,
                                const std::function<void(std::size_t, const Operator&)>& visit) {
  check_sde_inputs(path, a, b);
  detail::dispatch_dim(b.rows(), [&]<class Mat>(std::type_identity<Mat>) {
    const std::vector<Mat> comps(a.components().begin(), a.components().end());
    const Mat minus_dt_b = -path.grid().dt() * b;
    Operator scratch(b.rows(), b.cols());
    detail::product_integral<Mat>(
        b.rows(), path.grid().n_steps(),
        [&](std::size_t k, Mat& gen) {
          gen = minus_dt_b;
          for (std::size_t j = 0; j < comps.size(); ++j)
            gen += cplx(0.0, -(path(k, j) - path(k - 1, j))) * comps[j];
        },
        [&](std::size_t k, const Mat& t) {
          scratch = t;
          visit(k, scratch);
        });
  });
}

Operator ordered_exp_sde(const wiener::WienerPath& path, const OperatorTuple& a, const Operator& b) {
  Operator out;
  ordered_exp_sde_trajectory(path, a, b, [&](std::size_t k, const Operator& t) {
    if (k == path.grid().n_steps()) out = t;
  });
  return out;
}

Operator dyson_series(const wiener::WienerPath& path, const OperatorTuple& a, const Operator& b,
                      int order) {
  if (order < 0 || order > kMaxDysonOrder)
    throw std::invalid_argument("dyson_series: order must lie in [0, 6]");
  check_sde_inputs(path, a, b);
  const Eigen::Index m = b.rows();
  const std::size_t d = path.dim();
  const double dt = path.grid().dt();
  const auto K = static_cast<std::size_t>(order);

  // degree[k] holds the degree-k part of the product of step exponentials so far.
  std::vector<Operator> degree(K + 1, Operator::Zero(m, m));
  degree[0] = Operator::Identity(m, m);
  std::vector<Operator> powers(K + 1);
  std::vector<Operator> next(K + 1);
  for (std::size_t step = 1; step <= path.grid().n_steps(); ++step) {
    Operator gen = -dt * b;
    for (std::size_t j = 0; j < d; ++j)
      gen += cplx(0.0, -(path(step, j) - path(step - 1, j))) * a[j];
    powers[0] = Operator::Identity(m, m);
    for (std::size_t k = 1; k <= K; ++k) powers[k] = gen * powers[k - 1] / static_cast<double>(k);
    for (std::size_t k = 0; k <= K; ++k) {
      next[k] = degree[k];
      for (std::size_t j = 1; j <= k; ++j) next[k] += powers[j] * degree[k - j];
    }
    std::swap(degree, next);
  }
  Operator sum = Operator::Zero(m, m);
  for (const auto& term : degree) sum += term;
  return sum;
}

Operator trotter_product(const ApproximantFamily& family, double t, std::size_t n) {
  if (n == 0) throw std::invalid_argument("trotter_product: n must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("trotter_product: t must be non-negative");
  const Operator step = family(t / static_cast<double>(n));
  Operator result = step;
  for (std::size_t k = 1; k < n; ++k) result = step * result;
  return result;
}

Operator generator_probe(const ApproximantFamily& family) {
  constexpr double h = 0x1.0p-17;
  return -(family(h) - family(-h)) / (2.0 * h);
}

namespace pauli {
Operator identity() { return Operator::Identity(2, 2); }
Operator x() {
  Operator m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
Operator y() {
  Operator m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}
Operator z() {
  Operator m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
Operator raising() {
  Operator m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  return m;
}
Operator lowering() {
  Operator m(2, 2);
  m << 0.0, 0.0, 1.0, 0.0;
  return m;
}
}  // namespace pauli

}  // namespace fkpath::opalg
