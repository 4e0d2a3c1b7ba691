#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fkpath/estimate.hpp"
#include "fkpath/parallel.hpp"
#include "fkpath/potentials.hpp"
#include "fkpath/wiener.hpp"

namespace fkpath::fkschrodinger {

/// Raised when too many paths hit a non-finite potential value.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest tolerated fraction of rejected paths.
inline constexpr double kMaxRejectFraction = 1e-3;

struct WaveFunction {
  std::size_t dim = 1;
  std::function<cplx(std::span<const double> q)> evaluator;
  std::optional<double> norm_hint;

  cplx operator()(std::span<const double> q) const { return evaluator(q); }

  static WaveFunction constant(std::size_t d, cplx c = 1.0);
  /// prod_j pi^{-1/4} exp(-(q_j - center_j)^2 / (2 width^2)) / sqrt(width), times exp(i k.q)
  static WaveFunction gaussian(std::vector<double> center, double width = 1.0,
                               std::vector<double> momentum = {});
};

/// Path count, time slicing and RNG stream range for the path estimators.
/// Path i uses RngStream(seed, first_stream + i).
struct PathSampling {
  std::size_t n_paths = 1;
  std::size_t n_steps = 1;
  std::uint64_t seed = 0;
  std::uint64_t first_stream = 0;
  Exec exec{};
};

/// Weight of one shifted path y(s) = q + w(s):
/// exp(-i Strat int dw.a(y)) exp(-int ds v(y)). NaN-free paths only; returns
/// std::nullopt when either functional is not finite.
std::optional<cplx> path_weight(const PotentialConfig& pot, const wiener::WienerPath& y);

/// <exp(-i Strat int dw.a(q+w)) exp(-int v(q+w)) psi(q+w(t))>.
/// Throws NumericalFailure when rejected paths exceed kMaxRejectFraction.
ScalarEstimate apply_semigroup(const PotentialConfig& pot, const WaveFunction& psi,
                               std::span<const double> q, double t, const PathSampling& sampling);

/// (2 pi t)^{-d/2} exp(-|q'-q|^2 / 2t), the a = 0, v = 0 kernel.
double free_kernel(std::span<const double> q, std::span<const double> qp, double t);

/// Euclidean propagator K(q, q'; t): free kernel times the bridge average of
/// the path weight along s -> q + bridge(s), bridge pinned at q' - q.
ScalarEstimate kernel(const PotentialConfig& pot, std::span<const double> q,
                      std::span<const double> qp, double t, const PathSampling& sampling);

struct GaugeResult {
  ScalarEstimate transformed;  ///< kernel with a + grad chi
  ScalarEstimate rephased;     ///< e^{i(chi(q) - chi(q'))} kernel with a
  ScalarEstimate residual;     ///< per-path difference of the two
  double z = 0.0;              ///< |residual| / stderr (floored)
};

/// Gauge covariance on common bridges. Requires pot.has_gauge().
GaugeResult gauge_check(const PotentialConfig& pot, std::span<const double> q,
                        std::span<const double> qp, double t, const PathSampling& sampling);

struct DiamagneticResult {
  ScalarEstimate with_a;     ///< semigroup with a acting on psi
  ScalarEstimate without_a;  ///< semigroup with a = 0 acting on |psi|
  double magnitude_with_a = 0.0;
  double combined_stderr = 0.0;  ///< stderr(|with_a|) + stderr(without_a)
  bool holds = false;            ///< |with_a| <= without_a + 3 combined
  bool strict = false;           ///< without_a - |with_a| > 3 combined
};

/// Diamagnetic comparison on common paths.
DiamagneticResult diamagnetic_check(const PotentialConfig& pot, const WaveFunction& psi,
                                    std::span<const double> q, double t,
                                    const PathSampling& sampling);

/// Where kato_kappa integrates: u is assumed negligible outside [box_lo, box_hi]
/// (componentwise), and the maximum is taken over `probes`.
struct KatoSpec {
  std::vector<double> box_lo;
  std::vector<double> box_hi;
  std::vector<std::vector<double>> probes;
  std::size_t time_nodes = 24;   ///< Gauss-Legendre nodes in tau, s = t tau^2
  std::size_t space_order = 6;   ///< Gauss-Legendre points per spatial panel
};

struct KatoResult {
  double value = 0.0;
  std::vector<double> argmax;
  /// Time-averaged Gaussian mass falling outside the box at the argmax.
  double truncated_mass = 0.0;
  bool truncation_warning = false;  ///< truncated_mass > 1e-6
};

/// max over probes of int_0^t ds (G_s * u)(x), deterministic quadrature.
KatoResult kato_kappa(const ScalarFn& u, double t, const KatoSpec& spec);

struct KatoSweep {
  std::vector<double> t;
  std::vector<double> kappa;
  double slope = 0.0;  ///< log-log slope of kappa against t
};
KatoSweep kato_decay(const ScalarFn& u, std::span<const double> ts, const KatoSpec& spec);

/// Monte Carlo <int_0^t u(q + w(s)) ds>, the occupation-time cross-check for kato_kappa.
ScalarEstimate occupation_time(const ScalarFn& u, std::size_t dim, std::span<const double> q,
                               double t, const PathSampling& sampling);

struct KhasminskiiResult {
  ScalarEstimate lhs;    ///< <exp(+int_0^t v_minus(q + w))>
  double kappa = 0.0;    ///< kappa_t(v_minus)
  double bound = 0.0;    ///< 1 / (1 - kappa), +inf when kappa >= 1
  bool violated = false; ///< lhs - 3 stderr > bound
};

/// Khas'minskii's lemma for the negative part of the potential. The Kato spec
/// describes where v_minus lives; see kato_kappa.
KhasminskiiResult khasminskii_check(const PotentialConfig& pot, std::span<const double> q, double t,
                                    const PathSampling& sampling, const KatoSpec& kato);

}  // namespace fkpath::fkschrodinger
