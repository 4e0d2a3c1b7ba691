#pragma once

#include <cstdint>
#include <vector>

#include "fkpath/estimate.hpp"
#include "fkpath/opalg.hpp"
#include "fkpath/parallel.hpp"

namespace fkpath::fkmatrix {

using opalg::Operator;
using opalg::OperatorTuple;

/// Data of the generalized Feynman-Kac identity <T_t(w)> = exp{-t (A^2/2 + B)}.
struct FKProblem {
  OperatorTuple a;
  Operator b;
  double t = 0.0;
  std::size_t n_steps = 1;

  FKProblem(OperatorTuple a, Operator b, double t, std::size_t n_steps);

  std::size_t noise_dim() const { return a.size(); }
  Eigen::Index dim() const { return b.rows(); }
  /// Path grid on [0, t]; only valid for t > 0.
  wiener::TimeGrid grid() const { return wiener::TimeGrid(t, n_steps); }
};

/// Where the Monte Carlo paths come from: pair/path i uses
/// RngStream(seed, first_stream + i).
struct Sampling {
  std::size_t n_paths = 2;
  std::uint64_t seed = 0;
  std::uint64_t first_stream = 0;
  Exec exec{};
};

/// exp{-t (1/2 sum_j A_j^2 + B)}
Operator rhs_generator(const FKProblem& problem);

/// Antithetic Monte Carlo mean of the ordered exponential T_t(w).
/// n_paths counts paths (must be even): pairs (w, -w) are averaged first and
/// the standard error is taken over the n_paths/2 pair means.
MCEstimate estimate_generalized_fk(const FKProblem& problem, const Sampling& sampling);

/// Per-component residual of <int dw_j T_s> + (i/2) A_j <int ds T_s>, using the
/// endpoint-average (Stratonovich) rule for both sums. Requires B = 0.
std::vector<MCEstimate> check_nov_identity(const FKProblem& problem, const Sampling& sampling);

/// Residual <T_t> - exp(-t A^2/2) + int_0^t ds exp(-(t-s) A^2/2) B <T_s>, with
/// the s-integral by n_quad-point Gauss-Legendre, nodes snapped to grid times
/// and <T_s> read off the same paths' prefixes.
MCEstimate check_duhamel(const FKProblem& problem, std::size_t n_quad, const Sampling& sampling);

/// Ordered exponential driven by (dw1 + i dw2) A+ + (dw1 - i dw2) A- - i B dt,
/// averaged over antithetic pairs of 2-component paths.
MCEstimate estimate_product_formula(const Operator& a_plus, const Operator& a_minus,
                                    const Operator& b, double t, std::size_t n_steps,
                                    const Sampling& sampling);

/// exp{-t (A+ A- + A- A+ + B)}
Operator product_formula_target(const Operator& a_plus, const Operator& a_minus, const Operator& b,
                                double t);

/// The tuple (A+ + A-, i (A+ - A-)) whose generalized FK generator equals the
/// product-formula generator.
OperatorTuple product_formula_tuple(const Operator& a_plus, const Operator& a_minus);

/// Frobenius norm of (estimate - target).
double frobenius_distance(const MCEstimate& est, const Operator& target);

/// Largest entrywise |z| of (estimate - target), real and imaginary parts separately.
double max_abs_z(const MCEstimate& est, const Operator& target);

}  // namespace fkpath::fkmatrix
