#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fkpath/opalg.hpp"

namespace fkpath::phasespace {

using opalg::Operator;

/// Periodic position lattice q_j = -L/2 + j dq, j = 0..N-1, with momenta
/// p_k = 2 pi k / L. k runs over -N/2..N/2-1 for even N and -(N-1)/2..(N-1)/2
/// for odd N. Odd N has no Nyquist mode, which makes the alpha = 1/2 reality
/// statement hold for every Hermitian operator.
class PeriodicGrid {
 public:
  PeriodicGrid(std::size_t n_points, double length);

  std::size_t size() const { return n_; }
  double length() const { return length_; }
  double dq() const { return length_ / static_cast<double>(n_); }
  double q(std::size_t j) const { return -0.5 * length_ + static_cast<double>(j) * dq(); }
  /// Signed wavenumber index of momentum row i.
  long k(std::size_t i) const { return k_min_ + static_cast<long>(i); }
  double p(std::size_t i) const;
  long k_min() const { return k_min_; }

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  std::size_t n_;
  double length_;
  long k_min_;
};

/// H_alpha(p_k, q_j): rows are momenta, columns are positions.
struct Symbol {
  PeriodicGrid grid;
  Eigen::MatrixXcd values;
  double alpha = 0.5;

  /// Fill from a classical function h(p, q).
  static Symbol sample(const PeriodicGrid& grid, double alpha,
                       const std::function<std::complex<double>(double p, double q)>& h);
};

/// H_alpha(p_k, q_j) = sum_m e^{i p_k m dq} <q_j - (1-alpha) m dq| H |q_j + alpha m dq>,
/// m over the same signed range as k, indices periodic. Non-integer offsets
/// alpha m use the band-limited (Fourier) shift along the diagonal.
Symbol alpha_symbol(const Operator& h, const PeriodicGrid& grid, double alpha);

/// Exact inverse of alpha_symbol for the same grid and alpha.
Operator alpha_quantize(const Symbol& sym);

/// Quantization of the pointwise exponential exp(-t H_alpha).
Operator short_time_R(const Operator& h, const PeriodicGrid& grid, double alpha, double t);

/// t -> short_time_R(h, grid, alpha, t) with the symbol computed once.
opalg::ApproximantFamily short_time_family(const Operator& h, const PeriodicGrid& grid,
                                           double alpha);

struct TrotterTable {
  double alpha = 0.5;
  double t = 1.0;
  std::vector<std::size_t> n;
  std::vector<double> error;  ///< || R(t/n)^n - expm(-t H) ||_F
  double slope = 0.0;         ///< log-log slope of error against n
};

TrotterTable trotter_reconstruct(const Operator& h, const PeriodicGrid& grid, double alpha,
                                 double t, std::span<const std::size_t> n_list);

/// quantize_{alpha_quant}(sym) - quantize_{alpha_sym}(sym): how the operator
/// changes when a classical symbol is quantized with a different ordering.
/// For h = p g(q) this is i (alpha_quant - alpha_sym) g'(q) up to lattice error.
Operator ordering_mismatch_demo(const std::function<std::complex<double>(double, double)>& classical,
                                const PeriodicGrid& grid, double alpha_sym, double alpha_quant);

/// Largest |H[r, c]| with |r - c| >= N/2 relative to the largest entry: how much
/// the operator relies on the periodic wraparound.
double wraparound_leak(const Operator& h);

/// Lattice operators.
Operator position_operator(const PeriodicGrid& grid);
Operator multiplication_operator(const PeriodicGrid& grid, const std::function<double(double)>& v);
/// Spectral p and p^2 (diagonal in the discrete Fourier basis).
Operator momentum_operator(const PeriodicGrid& grid);
Operator momentum_squared(const PeriodicGrid& grid);

/// 1/2 (-Laplacian, 3 point) - 1/2 (P a + a P) + a^2/2 + v, with P the central
/// difference -i d/dq. Its alpha-symbol approximates
/// (p - a)^2 / 2 + i (alpha - 1/2) a' + v to O(dq^2) for smooth periodic a.
Operator standard_hamiltonian(const PeriodicGrid& grid, const std::function<double(double)>& a,
                              const std::function<double(double)>& v);

/// (p - a)^2 / 2 + i (alpha - 1/2) a' + v sampled on the lattice.
Symbol standard_symbol(const PeriodicGrid& grid, double alpha, const std::function<double(double)>& a,
                       const std::function<double(double)>& da,
                       const std::function<double(double)>& v);

/// CSV: header "N=..,L=..,alpha=..", then one line per row with re,im pairs.
void write_csv(std::ostream& os, const Eigen::MatrixXcd& m, const PeriodicGrid& grid, double alpha);
void write_csv(std::ostream& os, const Symbol& sym);

}  // namespace fkpath::phasespace
