#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fkpath/stochint.hpp"

namespace fkpath::fkschrodinger {

using ScalarFn = std::function<double(std::span<const double> q)>;
using VectorFn = std::function<void(std::span<const double> q, std::span<double> out)>;

/// Scalar potential v = v_plus - v_minus and vector potential a on R^d.
/// Empty `a` means a = 0. `chi` (with `grad_chi`) is an optional gauge function.
struct PotentialConfig {
  std::size_t dim = 1;
  ScalarFn v;
  ScalarFn v_plus;
  ScalarFn v_minus;
  VectorFn a;
  ScalarFn div_a;
  ScalarFn chi;
  VectorFn grad_chi;

  bool has_vector_potential() const { return static_cast<bool>(a); }
  bool has_gauge() const { return chi && grad_chi; }

  /// a as a time-independent stochint field (zero field when a is empty).
  stochint::FieldWithDivergence vector_field() const;

  /// Same v, with a replaced by a + grad chi. Requires has_gauge().
  PotentialConfig gauge_transformed() const;
  /// Same v and chi, a = 0.
  PotentialConfig without_vector_potential() const;
  /// Every field multiplied by s >= 0 (v, v_plus, v_minus and a, div_a).
  PotentialConfig scaled(double s) const;
};

/// Largest violation over the probes of: v = v_plus - v_minus, v_plus >= 0,
/// v_minus >= 0, and div_a against central differences. Zero for a clean config.
double potential_consistency(const PotentialConfig& pot,
                             std::span<const std::vector<double>> probes, double step = 1e-5);

/// Antisymmetric field b_jk = d a_j / d q_k - d a_k / d q_j.
struct MagneticField {
  std::size_t dim = 1;
  std::function<Eigen::MatrixXd(std::span<const double> q)> b;
};

/// Central differences of a with the given step; antisymmetric by construction.
MagneticField magnetic_field(const PotentialConfig& pot, double step = 1e-5);

using PresetParams = std::map<std::string, double>;

/// Named presets for the CLI: "free", "constant-well", "harmonic", "coulomb-3d",
/// "constant-magnetic-2d", "gauge-linear". Unknown names or parameters throw
/// std::invalid_argument. Parameters (defaults):
///   free                  d (1)
///   constant-well         d (1), depth (0.3), radius (1)   v = -depth on |q|_inf <= radius
///   harmonic              d (1), omega (1)                 v = omega^2 |q|^2 / 2
///   coulomb-3d            charge (1)                        v = -charge / |q|
///   constant-magnetic-2d  b (1), omega (0)                  a = b/2 (-q2, q1), v harmonic
///   gauge-linear          d (1), c (1)                      a = 0, chi = c q_1
PotentialConfig make_preset(const std::string& name, const PresetParams& params = {});

const std::vector<std::string>& preset_names();

}  // namespace fkpath::fkschrodinger
