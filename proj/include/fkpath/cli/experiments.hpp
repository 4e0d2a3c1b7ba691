#pragma once

#include <string>
#include <vector>

#include "fkpath/cli/config.hpp"
#include "fkpath/cli/report.hpp"

namespace fkpath::cli {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2, kExitNumerical = 3 };

/// Validates c.params for c.experiment and returns them with defaults filled.
/// Throws ConfigError.
json resolve_params(const ExperimentConfig& c);

/// Runs one experiment. Throws ConfigError for inputs only detectable late,
/// fkschrodinger::NumericalFailure / std::overflow_error on numerical trouble.
RunReport run_experiment(const ExperimentConfig& c);

/// One run per value of `axis`, plus slope rows for quantities that declare
/// an expected decay.
SweepReport run_sweep(const ExperimentConfig& c, const std::string& axis,
                      const std::vector<double>& values);

}  // namespace fkpath::cli
