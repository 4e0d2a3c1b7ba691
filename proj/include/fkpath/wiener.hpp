#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fkpath/estimate.hpp"
#include "fkpath/parallel.hpp"
#include "fkpath/rng.hpp"

namespace fkpath::wiener {

/// Uniform time grid s_k = k * dt, k = 0..n_steps, on [0, t_end].
class TimeGrid {
 public:
  TimeGrid(double t_end, std::size_t n_steps);

  double t_end() const { return t_end_; }
  std::size_t n_steps() const { return n_steps_; }
  double dt() const { return dt_; }
  double time(std::size_t k) const { return k == n_steps_ ? t_end_ : static_cast<double>(k) * dt_; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t_end_;
  std::size_t n_steps_;
  double dt_;
};

/// A d-component path sampled at the grid nodes, stored node-major.
class WienerPath {
 public:
  WienerPath(TimeGrid grid, std::size_t d);

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return d_; }
  std::size_t n_nodes() const { return grid_.n_steps() + 1; }

  std::span<const double> at(std::size_t k) const { return {values_.data() + k * d_, d_}; }
  std::span<double> at(std::size_t k) { return {values_.data() + k * d_, d_}; }
  double operator()(std::size_t k, std::size_t j) const { return values_[k * d_ + j]; }
  double& operator()(std::size_t k, std::size_t j) { return values_[k * d_ + j]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Linear interpolation between nodes, component j.
  double interpolate(double s, std::size_t j) const;

  /// Path with every value negated (the reflection w -> -w).
  WienerPath reflected() const;

 private:
  TimeGrid grid_;
  std::size_t d_;
  std::vector<double> values_;
};

/// Compactly supported test function f: [0, inf) -> R^d.
struct TestFunction {
  std::size_t dim = 1;
  double support_end = 0.0;
  /// Writes f(s) into out (length dim). Must vanish for s > support_end.
  std::function<void(double s, std::span<double> out)> evaluator;

  void eval(double s, std::span<double> out) const;

  static TestFunction zero(std::size_t d, double support_end = 1.0);
  /// f(s) = c * 1[0, end](s) componentwise.
  static TestFunction indicator(std::vector<double> c, double end);
};

/// Recipe for a streamed ensemble: path i is drawn from RngStream(seed, first_stream + i).
struct Ensemble {
  TimeGrid grid;
  std::size_t dim;
  std::uint64_t seed;
  std::size_t n_paths;
  std::uint64_t first_stream = 0;

  RngStream stream(std::size_t i) const { return RngStream(seed, first_stream + i); }
};

WienerPath sample_path(const TimeGrid& grid, std::size_t d, RngStream& rng);
/// In-place variant reusing the path's storage.
void sample_path_into(WienerPath& path, RngStream& rng);

/// Brownian bridge pinned at `endpoint` at t_end, built as
/// w(s) - (s/t) (w(t) - endpoint) from a free path.
WienerPath sample_bridge(const TimeGrid& grid, std::size_t d, std::span<const double> endpoint,
                         RngStream& rng);
void sample_bridge_into(WienerPath& path, std::span<const double> endpoint, RngStream& rng);

/// Trapezoidal value of the pathwise pairing  int_0^t ds w(s) . f(s).
double pair_with_path(const WienerPath& path, const TestFunction& f);

/// Monte Carlo mean of exp(-i int ds w(s).f(s)) over explicit paths.
ScalarEstimate estimate_char_functional(std::span<const WienerPath> paths, const TestFunction& f);
ScalarEstimate estimate_char_functional(const Ensemble& ens, const TestFunction& f,
                                        const Exec& exec = {});

/// Analytic right-hand side exp(-1/2 int int min(r,s) f(r).f(s)), by
/// tensor Gauss-Legendre quadrature on [0, support_end]^2.
double char_functional_target(const TestFunction& f, std::size_t panels = 64);

/// Monte Carlo mean of exp(-i int dw(s).f(s)) with the midpoint (Stratonovich) sum.
ScalarEstimate estimate_white_noise_functional(std::span<const WienerPath> paths,
                                               const TestFunction& f);
ScalarEstimate estimate_white_noise_functional(const Ensemble& ens, const TestFunction& f,
                                               const Exec& exec = {});

/// Moment table entry for E[w_j(r) w_k(s)].
struct CovarianceEntry {
  double r, s;
  std::size_t j, k;
  double mean, stderr, target;
};
struct MeanEntry {
  double s;
  std::size_t j;
  double mean, stderr;
};
struct MomentTable {
  std::vector<MeanEntry> means;
  std::vector<CovarianceEntry> covariances;
};

/// First and second moments at the given grid times (nearest node), with
/// targets 0 and delta_jk min(r, s).
MomentTable estimate_moments(const Ensemble& ens, std::span<const double> times,
                             const Exec& exec = {});

}  // namespace fkpath::wiener
