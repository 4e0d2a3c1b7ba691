// One PASS/FAIL line per acceptance criterion. Each criterion runs the same
// experiments the CLI runs, checks the targets against independent oracles,
// and keeps its CSV so the determinism criterion can compare reruns.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fkpath/cli/config.hpp"
#include "fkpath/cli/experiments.hpp"
#include "fkpath/cli/report.hpp"
#include "oracles.hpp"

using namespace fkpath::cli;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::string csv;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

json doc(const std::string& experiment, std::uint64_t seed, std::size_t n_paths, double t_end,
         std::size_t n_steps, json params) {
  return {{"experiment", experiment}, {"seed", seed}, {"n_paths", n_paths},
          {"grid", {{"t_end", t_end}, {"n_steps", n_steps}}}, {"workers", 1}, {"params", std::move(params)}};
}

ExperimentConfig config(const json& d, int workers) {
  auto c = parse_config(d);
  c.workers = workers;
  return c;
}

RunReport run(Outcome& o, const json& d, int workers) {
  auto r = run_experiment(config(d, workers));
  std::ostringstream os;
  write_csv(os, r);
  o.csv += os.str();
  return r;
}

SweepReport sweep(Outcome& o, const json& d, int workers, const std::string& axis, std::vector<double> values) {
  auto s = run_sweep(config(d, workers), axis, values);
  std::ostringstream os;
  write_csv(os, s);
  o.csv += os.str();
  return s;
}

bool starts(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

// checks every row whose quantity matches; returns the worst |z| seen
double check_rows(Outcome& o, const RunReport& r, const std::function<bool(const Row&)>& pick,
                  const std::string& label) {
  double worst = 0.0;
  int seen = 0;
  for (const auto& row : r.rows) {
    if (!pick(row)) continue;
    ++seen;
    if (std::isfinite(row.z)) worst = std::max(worst, std::abs(row.z));
    o.require(row.pass, label + " " + row.quantity + " " + row.component + " z=" + std::to_string(row.z));
  }
  o.require(seen > 0, label + ": no rows");
  return worst;
}

auto quantity(const std::string& q) {
  return [q](const Row& r) { return r.quantity == q; };
}

const Row* find(const RunReport& r, const std::string& q, const std::string& comp = "") {
  for (const auto& row : r.rows)
    if (row.quantity == q && (comp.empty() || row.component == comp)) return &row;
  return nullptr;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome wiener_moments(int workers) {
  Outcome o;
  const auto r = run(o, doc("wiener-stats", 101, 100000, 1.0, 1024, {{"d", 2}, {"times", {0.25, 0.5, 1.0}}}), workers);
  const double zm = check_rows(o, r, quantity("mean"), "mean");
  const double zc = check_rows(o, r, quantity("covariance"), "cov");
  // covariance targets are delta_jk min(r, s)
  for (const auto& row : r.rows)
    if (row.quantity == "covariance" && row.target.real() != 0.0)
      o.require(row.target.real() == 0.25 || row.target.real() == 0.5 || row.target.real() == 1.0,
                "unexpected covariance target");
  o.detail = o.detail.empty() ? fmt("max|z| mean %.2f", zm) + fmt(" cov %.2f", zc) : o.detail;
  return o;
}

Outcome fourier_and_white_noise(int workers) {
  Outcome o;
  const auto r = run(o, doc("wiener-stats", 102, 100000, 1.0, 256, {{"d", 1}, {"times", {1.0}}, {"c", 1.0}}),
                     workers);
  // exp(-1/2 int int 1[0,1](r) 1[0,1](s) min(r, s)) by nested quadrature
  using boost::math::quadrature::gauss_kronrod;
  const double dbl = gauss_kronrod<double, 31>::integrate(
      [](double s) {
        return gauss_kronrod<double, 31>::integrate([s](double u) { return std::min(u, s); }, 0.0, s) +
               s * (1.0 - s);
      },
      0.0, 1.0);
  const double char_target = std::exp(-0.5 * dbl), noise_target = std::exp(-0.5);
  const Row* cf = find(r, "char_functional");
  const Row* wn = find(r, "white_noise");
  o.require(cf && std::abs(cf->target - char_target) < 1e-12, "char functional target mismatch");
  o.require(wn && std::abs(wn->target - noise_target) < 1e-12, "white noise target mismatch");
  if (cf && wn) {
    o.require(std::abs(cf->z) <= 3.0, fmt("char functional z=%.2f", cf->z));
    o.require(std::abs(wn->z) <= 3.0, fmt("white noise z=%.2f", wn->z));
    if (o.pass) o.detail = fmt("z char %.2f", cf->z) + fmt(" noise %.2f", wn->z);
  }
  return o;
}

Outcome conversion(int workers) {
  Outcome o;
  const auto s = sweep(o, doc("stochint-convergence", 103, 20000, 1.0, 64, {{"field", "identity"}, {"d", 1}, {"alphas", {0.0, 0.5, 1.0}}}),
                       workers, "n_steps", {64, 128, 256, 512, 1024});
  int slopes = 0;
  std::string d;
  for (const auto& row : s.slopes) {
    if (row.quantity != "slope:mean_square_residual") continue;
    ++slopes;
    o.require(std::abs(row.mean.real() + 1.0) <= 0.3, row.component + fmt(" slope %.3f", row.mean.real()));
    d += row.component + fmt(" %.3f ", row.mean.real());
  }
  o.require(slopes == 2, "expected slopes for alpha 0 and 1");
  for (const auto& p : s.points) {
    const Row* half = find(p.report, "mean_square_residual", "alpha=0.5");
    o.require(half && half->mean == 0.0, "alpha=1/2 residual not exactly zero");
  }
  if (o.pass) o.detail = "slopes " + d + "alpha=1/2 residual 0";
  return o;
}

struct PauliCase {
  json a, b;
};

const std::vector<PauliCase> kPauli = {
    {{"sigma_x"}, "zero"}, {{"sigma_x"}, "sigma_z"}, {{"sigma_x", "sigma_y"}, "zero"}};

Eigen::MatrixXcd named(const json& j) { return parse_matrix(j, "m"); }

Outcome generalized_fk(int workers) {
  Outcome o;
  double worst = 0.0;
  std::uint64_t seed = 104;
  for (const auto& pc : kPauli)
    for (double t : {0.5, 1.0}) {
      const auto r = run(o, doc("fk-matrix", seed++, 100000, t, 512, {{"a", pc.a}, {"b", pc.b}}), workers);
      Eigen::MatrixXcd gen = named(pc.b);
      for (const auto& a : pc.a) gen += 0.5 * named(a) * named(a);
      const Eigen::MatrixXcd target = oracle::expm_taylor(-t * gen);
      double target_err = 0.0;
      for (const auto& row : r.rows)
        if (row.quantity == "fk" && row.component != "frobenius") {
          const int i = row.component[1] - '0', j = row.component[4] - '0';
          target_err = std::max(target_err, std::abs(row.target - target(i, j)));
        }
      o.require(target_err < 1e-12, "expm target disagrees with oracle");
      const Row* f = find(r, "fk", "frobenius");
      o.require(f && f->pass, "frobenius t=" + fmt("%g", t) + fmt(" dist %.3g", f ? f->mean.real() : NAN));
      if (f) worst = std::max(worst, f->mean.real() / std::max(3.0 * f->stderr, 1e-2));
    }
  if (o.pass) o.detail = fmt("worst distance / allowance %.2f", worst);
  return o;
}

Outcome nov_duhamel(int workers) {
  Outcome o;
  double worst = 0.0;
  std::uint64_t seed = 110;
  for (const auto& pc : kPauli) {
    const bool nov = named(pc.b).norm() == 0.0;
    const auto r = run(o, doc("fk-matrix", seed++, 20000, 0.5, 256, {{"a", pc.a}, {"b", pc.b}, {"nov", nov}, {"duhamel", true}}),
                       workers);
    worst = std::max(worst, check_rows(o, r, [](const Row& row) {
      return (starts(row.quantity, "nov[") || row.quantity == "duhamel") && row.component != "frobenius";
    }, "entry"));
  }
  if (o.pass) o.detail = fmt("max entrywise |z| %.2f", worst);
  return o;
}

Outcome product(int workers) {
  Outcome o;
  const auto r = run(o, doc("fk-product", 116, 100000, 1.0, 512, json::object()), workers);
  const Row* f = find(r, "product", "frobenius");
  double target_err = 0.0;
  for (const auto& row : r.rows)
    if (row.quantity == "product" && row.component != "frobenius") {
      const bool diag = row.component == "[0][0]" || row.component == "[1][1]";
      target_err = std::max(target_err, std::abs(row.target - (diag ? std::exp(-1.0) : 0.0)));
    }
  o.require(target_err < 1e-12, "target is not e^-1 I");
  o.require(f && f->pass, fmt("distance %.3g", f ? f->mean.real() : NAN));
  if (o.pass) o.detail = fmt("distance %.4f", f->mean.real()) + fmt(" stderr %.4f", f->stderr);
  return o;
}

Outcome schrodinger_fk(int workers) {
  Outcome o;
  const auto free_r = run(o, doc("fk-kernel", 117, 20000, 1.0, 128, {{"potential", "free"}, {"q", {0.3}}, {"q_prime", {-0.4}}}),
                          workers);
  const Row* fk = find(free_r, "kernel");
  const double heat = std::exp(-0.49 / 2.0) / std::sqrt(2.0 * std::numbers::pi);
  o.require(fk && std::abs(fk->mean - heat) < 1e-12 && fk->stderr == 0.0, "free kernel not exact");

  const double closed = 1.0 / std::sqrt(2.0 * std::numbers::pi * std::sinh(1.0));
  const oracle::GridHamiltonian grid([](double q) { return 0.5 * q * q; });
  const double grid_value = grid.kernel(0.0, 0.0, 1.0);
  o.require(std::abs(grid_value - closed) < 1e-3 * closed, "grid oracle disagrees with Mehler");
  const auto h = run(o, doc("fk-kernel", 118, 100000, 1.0, 256,
                            {{"potential", "harmonic"}, {"q", {0.0}}, {"q_prime", {0.0}}, {"chapman_kolmogorov", true},
                             {"ck_paths", 4000}}),
                     workers);
  const Row* k = find(h, "kernel");
  o.require(k && std::abs(k->target - closed) < 1e-12, "kernel target mismatch");
  if (k) {
    const double dev = std::abs(k->mean - grid_value);
    o.require(dev <= std::max(3.0 * k->stderr, 0.02 * grid_value), fmt("harmonic kernel off by %.3g", dev));
  }
  const Row* ck = find(h, "chapman_kolmogorov");
  o.require(ck && ck->pass, fmt("chapman-kolmogorov z=%.2f", ck ? ck->z : NAN));

  const auto sg = run(o, doc("fk-semigroup", 119, 100000, 1.0, 256,
                             {{"potential", "harmonic"}, {"psi", {{"kind", "gaussian"}, {"width", 1.0}}}, {"q", {0.3}}}),
                      workers);
  const Row* s = find(sg, "semigroup");
  o.require(s && s->pass, fmt("semigroup z=%.2f", s ? s->z : NAN));
  if (o.pass)
    o.detail = fmt("harmonic K=%.5f", k->mean.real()) + fmt(" oracle %.5f", grid_value) + fmt(" ck z=%.2f", ck->z);
  return o;
}

Outcome gauge_diamagnetic(int workers) {
  Outcome o;
  const auto g = run(o, doc("gauge", 120, 20000, 1.0, 128,
                            {{"potential", "gauge-linear"}, {"q", {0.2}}, {"q_prime", {-0.7}}}),
                     workers);
  const double zg = check_rows(o, g, quantity("residual"), "gauge");
  const auto d = run(o, doc("diamagnetic", 121, 4000, 2.0, 64,
                            {{"potential", "constant-magnetic-2d"}, {"potential_params", {{"b", 1.0}}}, {"n_probes", 20}}),
                     workers);
  int probes = 0;
  for (const auto& row : d.rows) probes += row.quantity == "diamagnetic";
  o.require(probes == 20, "expected 20 probes");
  check_rows(o, d, quantity("diamagnetic"), "diamagnetic");
  if (o.pass) o.detail = fmt("gauge |z| %.2f", zg) + ", 20/20 probes";
  return o;
}

Outcome kato_khasminskii(int workers) {
  Outcome o;
  const auto c = run(o, doc("kato", 122, 2, 1.0, 1, {{"u", {{"kind", "constant"}, {"value", 2.5}}}, {"times", {0.25, 1.0}}}),
                     workers);
  for (const auto& row : c.rows)
    if (row.quantity == "kappa")
      o.require(std::abs(row.mean.real() - row.target.real()) <= 1e-4 && row.target.real() > 0.0,
                "kappa constant " + row.component);
  const auto dec = run(o, doc("kato", 123, 2, 0.5, 1,
                              {{"u", {{"kind", "indicator"}, {"radius", 1.0}, {"value", 1.0}}},
                               {"probes", {{-0.5}, {0.0}, {0.5}}}, {"times", {0.0625, 0.125, 0.25, 0.5}}}),
                       workers);
  std::vector<double> kap;
  for (const auto& row : dec.rows)
    if (row.quantity == "kappa") kap.push_back(row.mean.real());
  for (std::size_t i = 1; i < kap.size(); ++i) o.require(kap[i] > kap[i - 1], "kappa not increasing in t");
  const Row* slope = find(dec, "decay_slope");
  o.require(slope && slope->mean.real() > 0.0, "decay slope not positive");

  const auto s = sweep(o, doc("khasminskii", 124, 20000, 0.5, 128,
                              {{"potential", "constant-well"}, {"potential_params", {{"depth", 1.0}, {"radius", 1.0}}},
                               {"box_lo", {-1.0}}, {"box_hi", {1.0}}, {"probes", {{-0.5}, {0.0}, {0.5}}}}),
                       workers, "potential_params.depth", {0.3, 1.0, 1.6, 2.0});
  double worst = -1e300;
  for (const auto& p : s.points) {
    check_rows(o, p.report, quantity("khasminskii_bound"), "khas");
    // signed: negative means below the bound
    for (const auto& row : p.report.rows)
      if (row.quantity == "khasminskii_bound") worst = std::max(worst, row.z);
  }
  if (o.pass) o.detail = fmt("decay slope %.3f", slope->mean.real()) + fmt(", khasminskii max z %.1f", worst);
  return o;
}

Outcome phase_space(int workers) {
  Outcome o;
  const auto s = sweep(o, doc("phasespace-roundtrip", 125, 2, 1.0, 1,
                              {{"operator", "standard"}, {"length", 16.0}, {"alphas", {0.0, 0.5, 1.0}}}),
                       workers, "n_points", {64, 128, 256});
  for (const auto& p : s.points) {
    check_rows(o, p.report, quantity("roundtrip"), "roundtrip");
    check_rows(o, p.report, quantity("reality"), "reality");
  }
  double order = 1e300;
  int fits = 0;
  for (const auto& row : s.slopes)
    if (row.quantity == "slope:standard_symbol_error") {
      ++fits;
      order = std::min(order, -row.mean.real());
    }
  o.require(fits == 3 && order >= 1.7, fmt("standard symbol order %.3f", order));

  const auto t = run(o, doc("trotter", 126, 2, 1.0, 1,
                            {{"operator", "oscillator"}, {"n_points", 64}, {"length", 16.0}, {"alphas", {0.0, 0.5, 1.0}},
                             {"n", {4, 8, 16, 32, 64, 128, 256}}}),
                     workers);
  check_rows(o, t, quantity("slope"), "trotter");
  check_rows(o, t, quantity("nonmonotone_steps"), "trotter");
  check_rows(o, t, quantity("ordering_gap_nonmonotone"), "trotter");
  std::string slopes;
  for (const auto& row : t.rows)
    if (row.quantity == "slope") slopes += fmt(" %.3f", row.mean.real());
  if (o.pass) o.detail = fmt("symbol order %.2f, trotter slopes", order) + slopes;
  return o;
}

using Criterion = Outcome (*)(int);

const std::vector<std::pair<const char*, Criterion>> kCriteria = {
    {"wiener moments", wiener_moments},
    {"functional fourier transform and white noise", fourier_and_white_noise},
    {"conversion formula", conversion},
    {"generalized feynman-kac", generalized_fk},
    {"nov identity and duhamel residual", nov_duhamel},
    {"product corollary", product},
    {"schrodinger semigroup and kernel", schrodinger_fk},
    {"gauge covariance and diamagnetic inequality", gauge_diamagnetic},
    {"kato and khasminskii", kato_khasminskii},
    {"phase-space calculus and trotter", phase_space},
};

void line(int n, const char* name, bool pass, const std::string& detail, double secs) {
  std::printf("%s %2d %-46s %6.1fs  %s\n", pass ? "PASS" : "FAIL", n, name, secs, detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  bool all = true;
  std::vector<std::string> csv;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = kCriteria[i].second(1);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    csv.push_back(o.csv);
    all = all && o.pass;
    line(static_cast<int>(i + 1), kCriteria[i].first, o.pass,
         o.detail, std::chrono::duration<double>(clock::now() - t0).count());
  }

  // rerun everything: same seed and workers, then three workers
  const auto t0 = clock::now();
  Outcome det;
  for (std::size_t i = 0; i < kCriteria.size(); ++i)
    for (int workers : {1, 3}) {
      try {
        const auto again = kCriteria[i].second(workers).csv;
        det.require(!again.empty() && again == csv[i],
                    "criterion " + std::to_string(i + 1) + " differs with " + std::to_string(workers) + " workers");
      } catch (const std::exception& e) {
        det.require(false, std::string("exception: ") + e.what());
      }
    }
  if (det.pass) det.detail = "10 criteria x {1, 3} workers bit-identical";
  all = all && det.pass;
  line(11, "determinism", det.pass, det.detail, std::chrono::duration<double>(clock::now() - t0).count());
  return all ? 0 : 1;
}
