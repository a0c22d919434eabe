#pragma once

#include "pfto/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace pfto {

/// Process exit codes of the command line verbs.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,      ///< config text or input data rejected
  kExitOutput = 3,      ///< output directory locked or not writable
  kExitNumerical = 4,   ///< solver, projection or other numerical failure
};

struct CommandOptions {
  std::string config_path;
  std::filesystem::path out_dir;
  int threads = 1;
};

/// Parse plus mesh and solver sanity checks. Writes nothing.
int validate_command(const CommandOptions& options, std::ostream& log);

/// One minimization: iterations.csv, phi_/u_XXXX.vtk snapshots, final fields,
/// config echo and summary.json in the output directory.
int run_command(const CommandOptions& options, std::ostream& log);

/// Warm-started eps sweep: sweep.csv, per-run iteration logs and final
/// fields, gnuplot data files and summary.json.
int sweep_command(const CommandOptions& options, std::ostream& log);

/// printf "%.17g": enough digits for an exact round trip.
std::string format_number(double v);

}  // namespace pfto
