#pragma once

#include <string>

#include "ember/errors.hpp"

namespace ember_cli {

/// Process exit codes shared by every subcommand:
///   0 success, 1 internal error / failed check, 2 config error,
///   3 data error, 4 non-finite loss, 5 bad dimension, 6 service error.
int exit_code_for(ember::ErrorCode code);

/// Parses argv and dispatches to one subcommand (train, eval, mine, synth,
/// gradcheck, reformat, gen-toy). Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace ember_cli
