#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace georank {

struct RunOptions {
  std::string base_dir = ".";  // relative paths in the config resolve here
  std::optional<std::uint64_t> seed;  // overrides the config seed
  bool timestamps = true;
};

struct RunResult {
  std::string report;  // JSON text, schema georank-report/1
  bool all_pass = false;
};

extern const char* const kCommands[];
extern const int kCommandCount;

// Parses the config and runs one command. Config, usage and input-file problems throw
// georank::Error (Parse, Io, Variant, Enumeration, Dimension, Precondition); failing checks do
// not throw and are recorded in the report.
RunResult run_experiment(const std::string& command, const std::string& config_json,
                         const RunOptions& opts);

}  // namespace georank
