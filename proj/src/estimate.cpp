#include "fkpath/estimate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fkpath {

void MomentAccumulator::add(std::span<const double> x) {
  if (x.size() != mean_.size()) throw std::invalid_argument("MomentAccumulator: width mismatch");
  ++n_;
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double delta = x[i] - mean_[i];
    mean_[i] += delta * inv_n;
    m2_[i] += delta * (x[i] - mean_[i]);
  }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  rejected_ += other.rejected_;
  if (other.n_ == 0) return;
  if (other.width() != width()) throw std::invalid_argument("MomentAccumulator: width mismatch");
  if (n_ == 0) {
    n_ = other.n_;
    mean_ = other.mean_;
    m2_ = other.m2_;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double delta = other.mean_[i] - mean_[i];
    mean_[i] += delta * (nb / n);
    m2_[i] += other.m2_[i] + delta * delta * (na * nb / n);
  }
  n_ += other.n_;
}

std::vector<double> MomentAccumulator::stderr_of_mean() const {
  std::vector<double> se(mean_.size(), 0.0);
  if (n_ < 2) return se;
  const double n = static_cast<double>(n_);
  for (std::size_t i = 0; i < se.size(); ++i)
    se[i] = std::sqrt(std::max(m2_[i], 0.0) / (n - 1.0) / n);
  return se;
}

Eigen::MatrixXd MCEstimate::stderr() const {
  return (stderr_re.array().square() + stderr_im.array().square()).sqrt().matrix();
}

ScalarEstimate to_scalar_estimate(const MomentAccumulator& acc, std::size_t samples_per_entry) {
  if (acc.width() != 2) throw std::invalid_argument("to_scalar_estimate: width must be 2");
  const auto se = acc.stderr_of_mean();
  ScalarEstimate est;
  est.mean = {acc.mean()[0], acc.mean()[1]};
  est.stderr_re = se[0];
  est.stderr_im = se[1];
  est.n_samples = acc.count() * samples_per_entry;
  est.n_rejected = acc.rejected();
  return est;
}

MCEstimate to_operator_estimate(const MomentAccumulator& acc, Eigen::Index rows, Eigen::Index cols,
                                std::size_t samples_per_entry) {
  if (acc.width() != static_cast<std::size_t>(2 * rows * cols))
    throw std::invalid_argument("to_operator_estimate: width mismatch");
  const auto se = acc.stderr_of_mean();
  MCEstimate est;
  est.mean.resize(rows, cols);
  est.stderr_re.resize(rows, cols);
  est.stderr_im.resize(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      est.mean(r, c) = {acc.mean()[k], acc.mean()[k + 1]};
      est.stderr_re(r, c) = se[k];
      est.stderr_im(r, c) = se[k + 1];
      k += 2;
    }
  est.n_samples = acc.count() * samples_per_entry;
  return est;
}

void flatten_into(const Eigen::MatrixXcd& m, std::span<double> out) {
  std::size_t k = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      out[k++] = m(r, c).real();
      out[k++] = m(r, c).imag();
    }
}

double z_score(double deviation, double stderr, double floor) {
  if (std::abs(deviation) <= floor) return 0.0;
  if (stderr <= 0.0) return std::copysign(std::numeric_limits<double>::infinity(), deviation);
  return deviation / stderr;
}

}  // namespace fkpath
