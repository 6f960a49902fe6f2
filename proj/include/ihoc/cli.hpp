#pragma once

#include "ihoc/config.hpp"

#include <ostream>
#include <string>

namespace ihoc {

/// Process exit codes of the batch front end.
enum ExitCode : int {
  kExitPass = 0,
  kExitCertificateFailure = 2,
  kExitNoConvergence = 3,
  kExitConfigError = 4,
};

/// Executes a parsed configuration, writing summary.json plus a CSV trace
/// into cfg.out_dir. Messages go to `log`.
int run(const RunConfig &cfg, std::ostream &log);

/// Parses and runs. Configuration errors return kExitConfigError before any
/// file is written.
int run_from_text(const std::string &text, const CliOverrides &overrides,
                  std::ostream &log);

/// Reads the file at `path` and hands it to run_from_text.
int run_from_file(const std::string &path, const CliOverrides &overrides,
                  std::ostream &log);

} // namespace ihoc
