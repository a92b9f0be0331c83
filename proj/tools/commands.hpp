#pragma once

#include <CLI11.hpp>

#include <functional>
#include <stdexcept>
#include <string>

namespace markerlab::cli {

enum Exit : int { Ok = 0, InvariantFailure = 1, Usage = 2, Budget = 3 };

/// Thrown for malformed inputs that should end with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Registers every subcommand on `app`; the callbacks store the exit code
/// of the command that ran in `status`.
void register_commands(CLI::App& app, int& status);

}  // namespace markerlab::cli
