#pragma once

#include <exception>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace netsac {

// Process exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitModelClass = 3,
  kExitSizeGuard = 4,
  kExitNumerical = 5,
};

// Maps an exception raised by a command to its exit code (ConfigError -> 2,
// ModelClassError -> 3, SizeGuardError -> 4, NumericalError -> 5, anything
// else -> 2).
int exit_code_for(const std::exception& e);

const std::vector<std::string>& command_names();

// Full default configuration of a subcommand; every accepted key appears here.
nlohmann::json default_config(const std::string& command);

// Overlays `doc` on the defaults of `command`, rejecting unknown keys and
// ill-typed values. A document that carries a "config" object (the header of
// an earlier output) is unwrapped first.
nlohmann::json resolve_config(const std::string& command, const nlohmann::json& doc);

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
  nlohmann::json summary;
};

// Runs a resolved configuration ("command" selects decay, verify, train or
// benchmark) and writes its outputs below config["out"]. Progress lines go to
// `log`. Errors are thrown, not mapped to exit codes.
CommandResult run_command(const nlohmann::json& config, std::ostream& log);

// CSV file whose first line is "# config: <json>".
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const nlohmann::json& config, const std::vector<std::string>& columns);

  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(std::size_t v);
  CsvWriter& operator<<(const std::string& v);
  void end_row();

 private:
  void separator();

  std::ofstream out_;
  bool row_started_ = false;
};

// Shortest round-trip decimal form of v ("nan" for NaN).
std::string format_number(double v);

}  // namespace netsac
