#include "fkpath/fkmatrix.hpp"

#include <cmath>
#include <stdexcept>

#include "fkpath/detail/product_integral.hpp"
#include "fkpath/numerics.hpp"
#include "fkpath/wiener.hpp"

namespace fkpath::fkmatrix {

using opalg::detail::dispatch_dim;
using opalg::detail::product_integral;

FKProblem::FKProblem(OperatorTuple a_, Operator b_, double t_, std::size_t n_steps_)
    : a(std::move(a_)), b(std::move(b_)), t(t_), n_steps(n_steps_) {
  opalg::validate_operator(b, "FKProblem B");
  if (a.size() == 0) throw std::invalid_argument("FKProblem: A needs at least one component");
  if (a.dim() != b.rows()) throw std::invalid_argument("FKProblem: A and B dimensions differ");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("FKProblem: t must be >= 0");
  if (n_steps == 0) throw std::invalid_argument("FKProblem: n_steps must be positive");
}

Operator rhs_generator(const FKProblem& problem) {
  return opalg::expm(-problem.t * (0.5 * problem.a.square_sum() + problem.b));
}

namespace {

void check_sampling(const Sampling& s) {
  if (s.n_paths < 2 || s.n_paths % 2 != 0)
    throw std::invalid_argument("n_paths must be an even number >= 2 (antithetic pairs)");
}

template <class Mat>
void add_flat(const Mat& m, double scale, std::span<double> out) {
  std::size_t k = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      out[k++] += scale * m(r, c).real();
      out[k++] += scale * m(r, c).imag();
    }
}

// Step generators -i sign dw . A - dt B along a stored path.
template <class Mat>
struct DrivenSolver {
  std::vector<Mat> a;
  Mat minus_dt_b;
  Eigen::Index dim;

  DrivenSolver(const OperatorTuple& a_, const Operator& b, double dt)
      : a(a_.components().begin(), a_.components().end()), minus_dt_b(-dt * b), dim(b.rows()) {}

  template <class Visit>
  void solve(const wiener::WienerPath& path, double sign, Visit&& visit) const {
    product_integral<Mat>(
        dim, path.grid().n_steps(),
        [&](std::size_t k, Mat& gen) {
          gen = minus_dt_b;
          for (std::size_t j = 0; j < a.size(); ++j)
            gen += cplx(0.0, -sign * (path(k, j) - path(k - 1, j))) * a[j];
        },
        visit);
  }
};

MCEstimate deterministic_estimate(const Operator& value, std::size_t n_samples) {
  MCEstimate est;
  est.mean = value;
  est.stderr_re = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  est.stderr_im = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  est.n_samples = n_samples;
  return est;
}

}  // namespace

MCEstimate estimate_generalized_fk(const FKProblem& problem, const Sampling& sampling) {
  check_sampling(sampling);
  const Eigen::Index m = problem.dim();
  if (problem.t == 0.0) return deterministic_estimate(Operator::Identity(m, m), sampling.n_paths);
  const auto grid = problem.grid();
  const wiener::Ensemble ens{grid, problem.noise_dim(), sampling.seed, sampling.n_paths / 2,
                             sampling.first_stream};
  const std::size_t width = static_cast<std::size_t>(2 * m * m);

  return dispatch_dim(m, [&]<class Mat>(std::type_identity<Mat>) {
    const DrivenSolver<Mat> solver(problem.a, problem.b, grid.dt());
    const auto acc = reduce_samples(ens.n_paths, width, sampling.exec, [&] {
      return [&, path = wiener::WienerPath(grid, ens.dim)](std::size_t i,
                                                          std::span<double> out) mutable {
        auto rng = ens.stream(i);
        wiener::sample_path_into(path, rng);
        std::fill(out.begin(), out.end(), 0.0);
        const std::size_t n = grid.n_steps();
        for (double sign : {1.0, -1.0})
          solver.solve(path, sign, [&](std::size_t k, const Mat& t) {
            if (k == n) add_flat(t, 0.5, out);
          });
        return true;
      };
    });
    return to_operator_estimate(acc, m, m, 2);
  });
}

std::vector<MCEstimate> check_nov_identity(const FKProblem& problem, const Sampling& sampling) {
  check_sampling(sampling);
  if (problem.b.cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("check_nov_identity: requires B = 0");
  const Eigen::Index m = problem.dim();
  const std::size_t d = problem.noise_dim();
  if (problem.t == 0.0) {
    return std::vector<MCEstimate>(d, deterministic_estimate(Operator::Zero(m, m), sampling.n_paths));
  }
  const auto grid = problem.grid();
  const wiener::Ensemble ens{grid, d, sampling.seed, sampling.n_paths / 2, sampling.first_stream};
  const std::size_t block = static_cast<std::size_t>(2 * m * m);

  return dispatch_dim(m, [&]<class Mat>(std::type_identity<Mat>) {
    const DrivenSolver<Mat> solver(problem.a, problem.b, grid.dt());
    const std::vector<Mat> half_i_a = [&] {
      std::vector<Mat> v;
      for (const auto& c : problem.a.components()) v.push_back(cplx(0.0, 0.5) * c);
      return v;
    }();
    const auto acc = reduce_samples(ens.n_paths, d * block, sampling.exec, [&] {
      return [&, path = wiener::WienerPath(grid, d), prev = Mat(m, m), stoch = std::vector<Mat>(d),
              lebesgue = Mat(m, m), res = Mat(m, m)](std::size_t i, std::span<double> out) mutable {
        auto rng = ens.stream(i);
        wiener::sample_path_into(path, rng);
        std::fill(out.begin(), out.end(), 0.0);
        const double dt = grid.dt();
        for (double sign : {1.0, -1.0}) {
          for (auto& s : stoch) s = Mat::Zero(m, m);
          lebesgue = Mat::Zero(m, m);
          solver.solve(path, sign, [&](std::size_t k, const Mat& t) {
            if (k > 0) {
              const Mat avg = 0.5 * (prev + t);
              for (std::size_t j = 0; j < d; ++j) stoch[j] += (sign * (path(k, j) - path(k - 1, j))) * avg;
              lebesgue += dt * avg;
            }
            prev = t;
          });
          for (std::size_t j = 0; j < d; ++j) {
            res = stoch[j] + half_i_a[j] * lebesgue;
            add_flat(res, 0.5, out.subspan(j * block, block));
          }
        }
        return true;
      };
    });
    // split the stacked accumulator into per-component estimates
    std::vector<MCEstimate> out;
    const auto mean = acc.mean();
    const auto se = acc.stderr_of_mean();
    for (std::size_t j = 0; j < d; ++j) {
      MCEstimate est;
      est.mean.resize(m, m);
      est.stderr_re.resize(m, m);
      est.stderr_im.resize(m, m);
      std::size_t k = j * block;
      for (Eigen::Index c = 0; c < m; ++c)
        for (Eigen::Index r = 0; r < m; ++r) {
          est.mean(r, c) = {mean[k], mean[k + 1]};
          est.stderr_re(r, c) = se[k];
          est.stderr_im(r, c) = se[k + 1];
          k += 2;
        }
      est.n_samples = acc.count() * 2;
      out.push_back(std::move(est));
    }
    return out;
  });
}

MCEstimate check_duhamel(const FKProblem& problem, std::size_t n_quad, const Sampling& sampling) {
  check_sampling(sampling);
  if (n_quad == 0) throw std::invalid_argument("check_duhamel: n_quad must be positive");
  const Eigen::Index m = problem.dim();
  if (problem.t == 0.0) return deterministic_estimate(Operator::Zero(m, m), sampling.n_paths);
  const auto grid = problem.grid();
  const Operator a2 = problem.a.square_sum();
  const Operator free_t = opalg::expm(-0.5 * problem.t * a2);

  // Gauss-Legendre nodes snapped to grid nodes; kernel exp(-(t - s) A^2 / 2) B at the snapped time.
  const auto rule = gauss_legendre(n_quad, 0.0, problem.t);
  std::vector<std::size_t> node_of_step(grid.n_steps() + 1, 0);
  std::vector<Operator> weighted_kernel;
  std::vector<std::size_t> snapped;
  for (std::size_t q = 0; q < n_quad; ++q) {
    const auto k = static_cast<std::size_t>(std::llround(rule.nodes[q] / grid.dt()));
    snapped.push_back(std::min(k, grid.n_steps()));
    const double s = grid.time(snapped.back());
    weighted_kernel.push_back(rule.weights[q] * opalg::expm(-0.5 * (problem.t - s) * a2) * problem.b);
  }

  const wiener::Ensemble ens{grid, problem.noise_dim(), sampling.seed, sampling.n_paths / 2,
                             sampling.first_stream};
  return dispatch_dim(m, [&]<class Mat>(std::type_identity<Mat>) {
    const DrivenSolver<Mat> solver(problem.a, problem.b, grid.dt());
    const std::vector<Mat> kernels(weighted_kernel.begin(), weighted_kernel.end());
    const Mat minus_free = -free_t;
    const auto acc = reduce_samples(ens.n_paths, static_cast<std::size_t>(2 * m * m), sampling.exec, [&] {
      return [&, path = wiener::WienerPath(grid, ens.dim), res = Mat(m, m)](
                 std::size_t i, std::span<double> out) mutable {
        auto rng = ens.stream(i);
        wiener::sample_path_into(path, rng);
        std::fill(out.begin(), out.end(), 0.0);
        for (double sign : {1.0, -1.0}) {
          res = minus_free;
          solver.solve(path, sign, [&](std::size_t k, const Mat& t) {
            for (std::size_t q = 0; q < snapped.size(); ++q)
              if (snapped[q] == k) res += kernels[q] * t;
            if (k == grid.n_steps()) res += t;
          });
          add_flat(res, 0.5, out);
        }
        return true;
      };
    });
    return to_operator_estimate(acc, m, m, 2);
  });
}

OperatorTuple product_formula_tuple(const Operator& a_plus, const Operator& a_minus) {
  return OperatorTuple({a_plus + a_minus, cplx(0.0, 1.0) * (a_plus - a_minus)});
}

Operator product_formula_target(const Operator& a_plus, const Operator& a_minus, const Operator& b,
                                double t) {
  return opalg::expm(-t * (a_plus * a_minus + a_minus * a_plus + b));
}

MCEstimate estimate_product_formula(const Operator& a_plus, const Operator& a_minus,
                                    const Operator& b, double t, std::size_t n_steps,
                                    const Sampling& sampling) {
  check_sampling(sampling);
  opalg::validate_operator(a_plus, "A+");
  opalg::validate_operator(a_minus, "A-");
  opalg::validate_operator(b, "B");
  const Eigen::Index m = b.rows();
  if (a_plus.rows() != m || a_minus.rows() != m)
    throw std::invalid_argument("estimate_product_formula: dimension mismatch");
  if (!(t >= 0.0)) throw std::invalid_argument("estimate_product_formula: t must be >= 0");
  if (t == 0.0) return deterministic_estimate(Operator::Identity(m, m), sampling.n_paths);
  const wiener::TimeGrid grid(t, n_steps);
  const wiener::Ensemble ens{grid, 2, sampling.seed, sampling.n_paths / 2, sampling.first_stream};

  return dispatch_dim(m, [&]<class Mat>(std::type_identity<Mat>) {
    const Mat ap = a_plus, am = a_minus;
    const Mat minus_dt_b = -grid.dt() * b;
    const cplx i(0.0, 1.0);
    const auto acc = reduce_samples(ens.n_paths, static_cast<std::size_t>(2 * m * m), sampling.exec, [&] {
      return [&, path = wiener::WienerPath(grid, 2)](std::size_t idx, std::span<double> out) mutable {
        auto rng = ens.stream(idx);
        wiener::sample_path_into(path, rng);
        std::fill(out.begin(), out.end(), 0.0);
        for (double sign : {1.0, -1.0}) {
          product_integral<Mat>(
              m, grid.n_steps(),
              [&](std::size_t k, Mat& gen) {
                const double dw1 = sign * (path(k, 0) - path(k - 1, 0));
                const double dw2 = sign * (path(k, 1) - path(k - 1, 1));
                gen = minus_dt_b - i * ((cplx(dw1, dw2) * ap) + (cplx(dw1, -dw2) * am));
              },
              [&](std::size_t k, const Mat& tk) {
                if (k == grid.n_steps()) add_flat(tk, 0.5, out);
              });
        }
        return true;
      };
    });
    return to_operator_estimate(acc, m, m, 2);
  });
}

double frobenius_distance(const MCEstimate& est, const Operator& target) {
  return (est.mean - target).norm();
}

double max_abs_z(const MCEstimate& est, const Operator& target) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < target.rows(); ++r)
    for (Eigen::Index c = 0; c < target.cols(); ++c) {
      const cplx diff = est.mean(r, c) - target(r, c);
      worst = std::max(worst, std::abs(z_score(diff.real(), est.stderr_re(r, c))));
      worst = std::max(worst, std::abs(z_score(diff.imag(), est.stderr_im(r, c))));
    }
  return worst;
}

}  // namespace fkpath::fkmatrix
