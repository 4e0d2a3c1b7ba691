#pragma once

#include <type_traits>

#include <Eigen/Dense>

#include "fkpath/opalg.hpp"

namespace fkpath::opalg::detail {

inline Eigen::Matrix2cd exp_step(const Eigen::Matrix2cd& m) { return expm2(m); }
inline Operator exp_step(const Operator& m) { return expm(m); }

/// Left-multiplied product of step exponentials. `generator(k, out)` writes
/// the step-k generator (k = 1..n_steps) into out; `visit(k, T_k)` sees every
/// partial product, T_0 = identity included.
template <class Mat, class Generator, class Visit>
void product_integral(Eigen::Index dim, std::size_t n_steps, Generator&& generator, Visit&& visit) {
  Mat t = Mat::Identity(dim, dim);
  Mat gen(dim, dim);
  visit(std::size_t{0}, t);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    generator(k, gen);
    t = exp_step(gen) * t;
    visit(k, t);
  }
}

/// Calls fn(std::type_identity<Mat>{}) with Mat = Matrix2cd for m == 2 and
/// MatrixXcd otherwise, so hot loops use fixed-size storage where possible.
template <class Fn>
decltype(auto) dispatch_dim(Eigen::Index m, Fn&& fn) {
  if (m == 2) return fn(std::type_identity<Eigen::Matrix2cd>{});
  return fn(std::type_identity<Operator>{});
}

}  // namespace fkpath::opalg::detail
