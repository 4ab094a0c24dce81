#pragma once

namespace waterline {

// Full command-line surface (estimate/batch/evaluate/plot/calibrate/synth).
// Returns the process exit code: 0 success, 1 validation error, 2
// runtime/data error.
int run_cli(int argc, char** argv);

}  // namespace waterline
