#pragma once

#include <iosfwd>
#include <string>

#include "rmab/cli/config.hpp"
#include "rmab/cli/output.hpp"

namespace rmab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitInvariant = 3,
  kExitSizeGuard = 4,
};

/// Frozen column order of each mode's table.
std::vector<std::string> columns_for(Mode mode);

/// Run the configured experiment and return its table. Throws the library
/// errors unchanged.
Table run_to_table(const ExperimentConfig& config);

/// run_to_table plus writing the output; every error becomes a message on
/// `err` and its exit code.
int run_experiment(const ExperimentConfig& config, std::ostream& err);

/// Parse and run in one step, so config errors map to exit codes too.
int run_config_text(const std::string& text, const std::vector<std::string>& overrides, std::ostream& err);

}  // namespace rmab::cli
