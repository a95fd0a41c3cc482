#pragma once

#include <string>

#include "structlqr/serialization.hpp"

namespace structlqr {

/// One CLI invocation: a command plus the shared flags, defaults as
/// documented in the README.
struct RunConfig {
  std::string command;        // sync | centroid | gap | simulate | surface |
                              // field | paper-example
  std::string input_path;     // problem JSON (unused by paper-example)
  std::string out_dir = ".";  // artifacts land here
  double horizon = 10.0;
  double dt = 1e-3;
  double extent = 2.0;
  int resolution = 41;
  double tol_residual = 1e-9;  // pass threshold for residual certificates
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitModuleError = 1;
inline constexpr int kExitConfigError = 2;

/// Executes one command end to end: load + validate the problem file, run
/// the requested synthesis/analysis, write the artifacts into out_dir.
/// Returns a process exit code; failures are reported as machine-readable
/// JSON on err and a one-line summary on out.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace structlqr
