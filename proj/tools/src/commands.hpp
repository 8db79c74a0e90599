#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace dcpl::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitEstimation = 4,
  kExitNotCertified = 5,
};

int exit_code_for(ErrorKind kind);
int exit_code_for(const std::exception& e);

// Machine-readable error record, written to <dir>/error.json.
Json error_record(const std::exception& e, int exit_code);
void write_error_file(const std::filesystem::path& dir, const Json& record);

// Each command writes its bundle under cfg.output and returns an exit code.
int cmd_estimate(const RunConfig& cfg);
int cmd_profile(const RunConfig& cfg);
int cmd_search(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
// Bundles are output directories (or their .jsonl files) of earlier runs.
int cmd_report(const std::vector<std::filesystem::path>& bundles,
               const std::filesystem::path& output);

}  // namespace dcpl::cli
