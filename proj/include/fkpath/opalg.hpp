#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fkpath/wiener.hpp"

namespace fkpath::opalg {

/// Dense complex square matrix standing in for a Hilbert-space operator.
using Operator = Eigen::MatrixXcd;

/// Throws std::invalid_argument unless `op` is square, non-empty and finite.
void validate_operator(const Operator& op, const char* what = "operator");

/// d-component operator A = (A_1, ..., A_d) with a common dimension.
class OperatorTuple {
 public:
  OperatorTuple() = default;
  explicit OperatorTuple(std::vector<Operator> components);
  /// All-zero tuple with d components of dimension m.
  static OperatorTuple zeros(std::size_t d, Eigen::Index m);

  std::size_t size() const { return components_.size(); }
  Eigen::Index dim() const { return components_.empty() ? 0 : components_.front().rows(); }
  const Operator& operator[](std::size_t j) const { return components_[j]; }
  const std::vector<Operator>& components() const { return components_; }

  /// sum_j A_j^2
  Operator square_sum() const;

 private:
  std::vector<Operator> components_;
};

/// Short-time approximant F(t) with F(0) = identity.
struct ApproximantFamily {
  Eigen::Index dim = 0;
  std::function<Operator(double t)> evaluator;

  Operator operator()(double t) const { return evaluator(t); }
};

/// Wraps an evaluator, checking F(0) against the identity to 1e-12 entrywise.
ApproximantFamily make_family(Eigen::Index dim, std::function<Operator(double)> evaluator);

/// Matrix exponential: scaling and squaring with a Pade-13 core (Higham 2005).
/// Throws std::overflow_error when the result is not representable.
Operator expm(const Operator& x);

/// Closed-form exponential of a 2x2 matrix; used by the path solvers.
Eigen::Matrix2cd expm2(const Eigen::Matrix2cd& m);

/// Product integral prod_nu expm(-i dw_nu . A - dt B), later steps on the left.
Operator ordered_exp_sde(const wiener::WienerPath& path, const OperatorTuple& a, const Operator& b);

/// Same solver, reporting T at every grid node: visit(k, T_k) for k = 0..n.
void ordered_exp_sde_trajectory(const wiener::WienerPath& path, const OperatorTuple& a,
                                const Operator& b,
                                const std::function<void(std::size_t, const Operator&)>& visit);

/// Truncated Dyson series of total degree <= order in the step generators
/// G_nu = -i dw_nu . A - dt B. Coincident indices carry the 1/k! weights of
/// the midpoint convention, so the untruncated series is ordered_exp_sde.
Operator dyson_series(const wiener::WienerPath& path, const OperatorTuple& a, const Operator& b,
                      int order);

inline constexpr int kMaxDysonOrder = 6;

/// [F(t/n)]^n by repeated multiplication.
Operator trotter_product(const ApproximantFamily& family, double t, std::size_t n);

/// -dF/dt at 0 by central difference; the step 2^-17 (about 7.6e-6) is exact in binary.
Operator generator_probe(const ApproximantFamily& family);

/// Standard 2x2 matrices.
namespace pauli {
Operator identity();
Operator x();
Operator y();
Operator z();
Operator raising();   ///< sigma_+ = [[0,1],[0,0]]
Operator lowering();  ///< sigma_- = [[0,0],[1,0]]
}  // namespace pauli

}  // namespace fkpath::opalg
