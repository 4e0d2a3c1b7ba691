#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fkpath/cli/config.hpp"
#include "fkpath/estimate.hpp"

namespace fkpath::cli {

/// One reported number. pass is recomputed from the recorded fields:
///   statistical rows: z <= z_max, or |mean - target| <= abs_tol
///   tolerance rows (no stderr): |mean - target| <= abs_tol
///   one-sided rows: mean_re <= target_re + z_max * stderr
///   lower-bound rows: mean_re >= target_re - z_max * stderr
///   info rows: always pass
struct Row {
  enum class Kind { statistical, tolerance, one_sided, lower_bound, info };

  std::string experiment;
  std::string quantity;
  std::string component;
  cplx mean{};
  double stderr = 0.0;
  cplx target{};
  double z = 0.0;
  bool pass = true;
  Kind kind = Kind::info;
  double z_max = 0.0;
  double abs_tol = 0.0;
  /// Rows whose mean_re should decay along a sweep axis with this log-log slope.
  std::optional<double> expected_slope;
  double slope_tol = 0.3;

  void evaluate();
};

Row stat_row(std::string quantity, std::string component, const ScalarEstimate& e, cplx target,
             double z_max, double abs_tol = 0.0);
Row tol_row(std::string quantity, std::string component, cplx value, cplx target, double abs_tol);
Row one_sided_row(std::string quantity, std::string component, double value, double bound,
                  double stderr, double z_max);
Row lower_bound_row(std::string quantity, std::string component, double value, double bound,
                    double stderr, double z_max);
Row info_row(std::string quantity, std::string component, cplx value, double stderr = 0.0);

/// Rows "r,c" for every matrix entry, plus a frobenius row passing when
/// the distance is within max(z_max * ||stderr||_F, abs_tol).
void add_matrix_rows(std::vector<Row>& rows, const std::string& quantity, const MCEstimate& est,
                     const Eigen::MatrixXcd& target, double z_max, double abs_tol);

struct RunReport {
  ExperimentConfig config;
  std::vector<Row> rows;
  double wall_seconds = 0.0;

  bool passed() const;
};

struct SweepPoint {
  double value;
  RunReport report;
};

struct SweepReport {
  std::string axis;
  std::vector<SweepPoint> points;
  std::vector<Row> slopes;  ///< one per row declaring expected_slope
  double wall_seconds = 0.0;

  bool passed() const;
};

SweepReport summarize_sweep(std::string axis, std::vector<SweepPoint> points);

inline constexpr const char* kCsvHeader =
    "experiment,quantity,component,mean_re,mean_im,stderr,target_re,target_im,z,pass";

void write_csv(std::ostream& os, const RunReport& r);
void write_csv(std::ostream& os, const SweepReport& s);
json to_json(const RunReport& r);
json to_json(const SweepReport& s);

/// %.16e, with inf/nan spelled out.
std::string format_number(double x);

}  // namespace fkpath::cli
