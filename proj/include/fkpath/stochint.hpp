#pragma once

#include <functional>
#include <span>

#include "fkpath/wiener.hpp"

namespace fkpath::stochint {

/// Evaluation-point parameter of the alpha-stochastic integral:
/// 0 = Ito, 1/2 = Stratonovich.
class AlphaScheme {
 public:
  explicit AlphaScheme(double alpha);
  double alpha() const { return alpha_; }

  static AlphaScheme ito() { return AlphaScheme(0.0); }
  static AlphaScheme stratonovich() { return AlphaScheme(0.5); }

 private:
  double alpha_;
};

/// Pointwise vector field g(x, s) on R^d with its divergence in x.
struct FieldWithDivergence {
  std::size_t dim = 1;
  std::function<void(std::span<const double> x, double s, std::span<double> out)> g;
  std::function<double(std::span<const double> x, double s)> div_g;
};

/// Largest |div_g - central-difference divergence| over the probe points.
double divergence_mismatch(const FieldWithDivergence& field,
                           std::span<const std::vector<double>> probes, double s = 0.0,
                           double step = 1e-5);

/// Sum_nu g(x_alpha, s_alpha) . (w(s_nu) - w(s_{nu-1})), with the alpha-point
/// x_alpha = alpha w(s_nu) + (1 - alpha) w(s_{nu-1}) (weight alpha on the later node).
double alpha_integral(const wiener::WienerPath& path, const FieldWithDivergence& field,
                      const AlphaScheme& scheme);

/// Trapezoidal int_0^t u(w(s), s) ds. Non-finite evaluations propagate.
double time_integral(const wiener::WienerPath& path,
                     const std::function<double(std::span<const double> x, double s)>& u);

/// Stratonovich sum minus [alpha sum + (1/2 - alpha) int_0^t div g ds].
double convert_check(const wiener::WienerPath& path, const FieldWithDivergence& field,
                     const AlphaScheme& scheme);

/// Mean-square and RMS of convert_check over an ensemble.
struct ResidualStats {
  double mean_square;
  double mean_square_stderr;
  double rms;
  std::size_t n_paths;
};
ResidualStats convert_residual_stats(const wiener::Ensemble& ens, const FieldWithDivergence& field,
                                     const AlphaScheme& scheme, const Exec& exec = {});

/// Fields used throughout the tests and the CLI.
FieldWithDivergence constant_field(std::vector<double> c);
FieldWithDivergence identity_field(std::size_t d);  ///< g(x) = x, div = d
FieldWithDivergence rotation_field_2d();            ///< g(x) = (-x2, x1), div = 0

}  // namespace fkpath::stochint
