#pragma once

#include <iosfwd>

#include "run_config.hpp"

namespace tbie::cli {

// Each command validates the whole configuration first, writes its files into
// config.out and returns the process exit code.

int cmd_oracle_eigs(const RunConfig& config);
int cmd_ssm_eigs(const RunConfig& config);
int cmd_scatter(const RunConfig& config);

struct SelftestOptions {
  /// Negative control: scales the reference circle symbols by 1 + 1e-6.
  bool corrupt_symbol = false;
};

/// Prints one line per suite and returns 0 when every suite passes, 1 otherwise.
int cmd_selftest(const SelftestOptions& options, std::ostream& report);

}  // namespace tbie::cli
