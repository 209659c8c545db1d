#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace cgs::io {

/// Command-line overrides; unset values fall back to the file's [config]
/// section and then to built-in defaults.
struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> points;
  std::optional<double> tol;
  std::optional<int> grid;
  std::optional<double> h;
  std::optional<double> newton_tol;
};

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInput = 2 };

struct CommandResult {
  int exit_code = kExitPass;
  std::string json;      // report document, empty on input errors
  std::string summary;   // human-readable lines for stdout
  std::string message;   // error or refusal text
};

CommandResult run_verify(const std::string& name_or_path, const CommandOptions& opt);
CommandResult run_cauchy(const std::string& name_or_path, const CommandOptions& opt);
CommandResult run_normal_form(const std::string& name_or_path, const CommandOptions& opt);
CommandResult run_list();

}  // namespace cgs::io
