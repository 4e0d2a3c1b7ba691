#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fkpath {

using cplx = std::complex<double>;

/// Running mean and centred second moment for a fixed-width real vector,
/// combined across chunks with the Chan et al. pairwise update.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;
  explicit MomentAccumulator(std::size_t width) : mean_(width, 0.0), m2_(width, 0.0) {}

  std::size_t width() const { return mean_.size(); }
  std::size_t count() const { return n_; }
  std::size_t rejected() const { return rejected_; }

  void add(std::span<const double> x);
  void reject() { ++rejected_; }
  void merge(const MomentAccumulator& other);

  const std::vector<double>& mean() const { return mean_; }
  /// Standard error of the mean per entry; zero when fewer than two samples.
  std::vector<double> stderr_of_mean() const;

 private:
  std::size_t n_ = 0;
  std::size_t rejected_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

/// Monte Carlo estimate of a complex scalar.
struct ScalarEstimate {
  cplx mean{0.0, 0.0};
  double stderr_re = 0.0;
  double stderr_im = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_rejected = 0;

  double stderr() const { return std::hypot(stderr_re, stderr_im); }
};

/// Monte Carlo estimate of an operator: entrywise mean with separate standard
/// errors for the real and imaginary parts.
struct MCEstimate {
  Eigen::MatrixXcd mean;
  Eigen::MatrixXd stderr_re;
  Eigen::MatrixXd stderr_im;
  std::size_t n_samples = 0;

  /// Entrywise sqrt(se_re^2 + se_im^2).
  Eigen::MatrixXd stderr() const;
  double stderr_frobenius() const { return stderr().norm(); }
};

/// Scalar estimate from a width-2 accumulator laid out as (re, im).
ScalarEstimate to_scalar_estimate(const MomentAccumulator& acc, std::size_t samples_per_entry = 1);

/// Operator estimate from an accumulator laid out as column-major
/// (re, im) pairs of a rows x cols matrix.
MCEstimate to_operator_estimate(const MomentAccumulator& acc, Eigen::Index rows,
                                Eigen::Index cols, std::size_t samples_per_entry = 1);

/// Flatten a complex matrix into interleaved (re, im) pairs, column-major.
void flatten_into(const Eigen::MatrixXcd& m, std::span<double> out);

/// Deviation in units of standard error. Deviations at or below the rounding
/// floor count as zero so that exactly reproduced deterministic entries with
/// a zero standard error do not produce spurious infinities.
double z_score(double deviation, double stderr, double floor = 1e-12);

}  // namespace fkpath
