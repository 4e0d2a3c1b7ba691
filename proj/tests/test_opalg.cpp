#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "fkpath/numerics.hpp"
#include "fkpath/opalg.hpp"
#include "oracles.hpp"

using namespace fkpath;
using namespace fkpath::opalg;
using wiener::TimeGrid;
using wiener::WienerPath;

namespace {

const cplx I(0.0, 1.0);

Operator random_matrix(Eigen::Index n, double norm, std::uint64_t seed) {
  RngStream r(seed, 0);
  Operator m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = {r.normal(), r.normal()};
  return m * (norm / m.norm());
}

Operator random_hermitian(Eigen::Index n, std::uint64_t seed) {
  const Operator m = random_matrix(n, 1.0, seed);
  return 0.5 * (m + m.adjoint());
}

double rel(const Operator& a, const Operator& b) { return (a - b).norm() / b.norm(); }

// Unit path u on grid(1, n) with values rescaled to t u on grid(t, n).
WienerPath scaled_path(const WienerPath& unit, double t) {
  WienerPath p(TimeGrid(t, unit.grid().n_steps()), unit.dim());
  for (std::size_t i = 0; i < p.values().size(); ++i) p.values()[i] = t * unit.values()[i];
  return p;
}

}  // namespace

TEST_CASE("operator validation") {
  CHECK_THROWS(validate_operator(Operator(2, 3)));
  Operator bad = Operator::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(validate_operator(bad));
  CHECK_THROWS(OperatorTuple({pauli::x(), Operator::Identity(3, 3)}));
  CHECK(OperatorTuple({pauli::x(), pauli::y()}).square_sum().isApprox(2.0 * pauli::identity()));
}

TEST_CASE("expm against closed forms and the extended-precision Taylor oracle") {
  CHECK(expm(Operator::Zero(3, 3)) == Operator::Identity(3, 3));
  Operator d = Operator::Zero(2, 2);
  d(0, 0) = -1.0;
  d(1, 1) = -2.0;
  const Operator ed = expm(d);
  CHECK(ed(0, 0).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(ed(1, 1).real() == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(std::abs(ed(0, 1)) == 0.0);

  const Operator x = -0.5 * (0.5 * pauli::identity() + pauli::z());
  CHECK(rel(expm(x), oracle::expm_taylor(x)) <= 1e-10);

  for (double norm : {1e-3, 0.1, 1.0, 5.0, 20.0, 50.0})
    for (Eigen::Index n : {2, 3, 6}) {
      const Operator m = random_matrix(n, norm, 100 + n);
      INFO("norm=" << norm << " n=" << n);
      CHECK(rel(expm(m), oracle::expm_taylor(m)) <= 1e-10);
    }
}

TEST_CASE("expm inverse pair and overflow") {
  for (double norm : {0.5, 3.0, 10.0}) {
    const Operator m = random_matrix(4, norm, 7);
    CHECK((expm(m) * expm(-m) - Operator::Identity(4, 4)).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(expm(Operator::Identity(2, 2) * 1000.0), std::overflow_error);
}

TEST_CASE("closed-form 2x2 exponential matches the Pade path") {
  for (double norm : {1e-9, 1e-4, 0.3, 4.0, 30.0}) {
    const Operator m = random_matrix(2, norm, 31);
    const Eigen::Matrix2cd m2 = m;
    CHECK(rel(Operator(expm2(m2)), expm(m)) <= 1e-12);
  }
  // repeated eigenvalue, non-diagonalisable
  Eigen::Matrix2cd j;
  j << 0.3, 1.0, 0.0, 0.3;
  CHECK(rel(Operator(expm2(j)), expm(Operator(j))) <= 1e-14);
}

TEST_CASE("ordered exponential") {
  RngStream r(3, 0);
  const auto p1 = wiener::sample_path(TimeGrid(1.0, 200), 1, r);
  SUBCASE("zero generators give the identity exactly") {
    CHECK(ordered_exp_sde(p1, OperatorTuple::zeros(1, 3), Operator::Zero(3, 3)) ==
          Operator::Identity(3, 3));
  }
  SUBCASE("commuting steps collapse to exp(-i w(t) A)") {
    const Operator a = random_hermitian(3, 4);
    const Operator t = ordered_exp_sde(p1, OperatorTuple({a}), Operator::Zero(3, 3));
    CHECK(rel(t, expm(-I * p1(200, 0) * a)) <= 1e-10);
  }
  SUBCASE("later steps multiply on the left") {
    WienerPath p(TimeGrid(2.0, 2), 1);
    p(1, 0) = 0.7;
    p(2, 0) = -0.4;
    const Operator t = ordered_exp_sde(p, OperatorTuple({pauli::x()}), pauli::z());
    const Operator g1 = -I * 0.7 * pauli::x() - pauli::z();
    const Operator g2 = -I * (-1.1) * pauli::x() - pauli::z();
    CHECK(rel(t, expm(g2) * expm(g1)) <= 1e-14);
    CHECK(rel(t, expm(g1) * expm(g2)) > 1e-3);
  }
  SUBCASE("unitary for Hermitian A and B = 0") {
    RngStream r2(4, 1);
    const auto p2 = wiener::sample_path(TimeGrid(1.0, 512), 2, r2);
    const Operator t = ordered_exp_sde(p2, OperatorTuple({random_hermitian(4, 1), random_hermitian(4, 2)}),
                                       Operator::Zero(4, 4));
    CHECK((t.adjoint() * t - Operator::Identity(4, 4)).norm() <= 512 * 1e-13);
  }
  SUBCASE("cocycle over a split of the same partition") {
    RngStream r2(5, 1);
    const auto p = wiener::sample_path(TimeGrid(1.0, 64), 2, r2);
    const OperatorTuple a({pauli::x(), pauli::y()});
    const Operator b = 0.3 * pauli::z();
    const std::size_t ks = 24;
    WienerPath head(TimeGrid(p.grid().time(ks), ks), 2), tail(TimeGrid(1.0 - p.grid().time(ks), 64 - ks), 2);
    for (std::size_t k = 0; k <= ks; ++k)
      for (std::size_t j = 0; j < 2; ++j) head(k, j) = p(k, j);
    for (std::size_t k = ks; k <= 64; ++k)
      for (std::size_t j = 0; j < 2; ++j) tail(k - ks, j) = p(k, j) - p(ks, j);
    // the tail grid's dt differs from the full grid's in the last bit, so agreement is to rounding
    CHECK(rel(ordered_exp_sde(tail, a, b) * ordered_exp_sde(head, a, b), ordered_exp_sde(p, a, b)) <= 1e-13);
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS(ordered_exp_sde(p1, OperatorTuple({pauli::x(), pauli::y()}), Operator::Zero(2, 2)));
    CHECK_THROWS(ordered_exp_sde(p1, OperatorTuple({pauli::x()}), Operator::Zero(3, 3)));
  }
}

TEST_CASE("Dyson series") {
  RngStream r(6, 0);
  const auto unit = wiener::sample_path(TimeGrid(1.0, 64), 2, r);
  const OperatorTuple a({pauli::x(), pauli::y()});
  const OperatorTuple a0 = OperatorTuple::zeros(2, 2);
  const Operator b = pauli::z();
  SUBCASE("low orders") {
    CHECK(dyson_series(unit, a, b, 0) == Operator::Identity(2, 2));
    const auto p = scaled_path(unit, 0.7);
    CHECK(rel(dyson_series(p, a0, b, 1), Operator::Identity(2, 2) - 0.7 * b) <= 1e-14);
    CHECK_THROWS(dyson_series(p, a, b, kMaxDysonOrder + 1));
    CHECK_THROWS(dyson_series(p, a, b, -1));
  }
  SUBCASE("degree-4 remainder is O(t^5) on a rescaled path") {
    std::vector<double> ts{0.1, 0.05, 0.025}, gaps;
    const Operator zero = Operator::Zero(2, 2);
    for (double t : ts) {
      const auto p = scaled_path(unit, t);
      gaps.push_back((dyson_series(p, a, zero, 4) - ordered_exp_sde(p, a, zero)).norm());
    }
    CHECK(loglog_slope(ts, gaps) == doctest::Approx(5.0).epsilon(0.1));
    CHECK(gaps[0] < 1e-3);
  }
  SUBCASE("high order matches the product integral") {
    const auto p = scaled_path(unit, 0.05);
    CHECK(rel(dyson_series(p, a, b, 6), ordered_exp_sde(p, a, b)) <= 1e-9);
  }
}

TEST_CASE("Trotter products") {
  const Operator h = random_hermitian(3, 9);
  const auto exact = make_family(3, [h](double s) { return expm(-s * h); });
  for (std::size_t n : {1, 7, 64}) {
    CHECK((trotter_product(exact, 1.0, n) - expm(-h)).norm() <= n * 1e-14 * expm(-h).norm() + 1e-15);
    CHECK((trotter_product(exact, 1.0, 2 * n) - trotter_product(exact, 1.0, n)).norm() <= 2 * n * 1e-14);
  }

  const Operator a = random_hermitian(2, 10), bb = random_hermitian(2, 11);
  REQUIRE((a * bb - bb * a).norm() > 1e-3);
  const auto lie = make_family(2, [a, bb](double s) { return Operator(expm(-s * a) * expm(-s * bb)); });
  std::vector<double> ns, err;
  for (std::size_t n = 2; n <= 256; n *= 2) {
    ns.push_back(static_cast<double>(n));
    err.push_back((trotter_product(lie, 1.0, n) - expm(-(a + bb))).norm());
  }
  CHECK(loglog_slope(ns, err) == doctest::Approx(-1.0).epsilon(0.2));
  CHECK_THROWS(make_family(2, [](double) { return Operator(2.0 * pauli::identity()); }));
}

TEST_CASE("generator probe") {
  const Operator h = random_hermitian(3, 12);
  CHECK(rel(generator_probe(make_family(3, [h](double s) { return expm(-s * h); })), h) <= 1e-8);
  // linear family: exact for dyadic entries, otherwise limited by eps / step cancellation
  auto linear = [](const Operator& g) {
    return make_family(g.rows(), [g](double s) { return Operator(Operator::Identity(g.rows(), g.rows()) - s * g); });
  };
  Operator dy(2, 2);
  dy << 0.5, cplx(0.25, -1.0), cplx(0.25, 1.0), -3.0;
  CHECK(rel(generator_probe(linear(dy)), dy) <= 1e-15);
  CHECK(rel(generator_probe(linear(h)), h) <= 1e-10);
  const Operator a = random_hermitian(3, 13), b = random_hermitian(3, 14);
  CHECK(rel(generator_probe(make_family(3, [a, b](double s) { return Operator(expm(-s * a) * expm(-s * b)); })),
            a + b) <= 1e-8);
}
