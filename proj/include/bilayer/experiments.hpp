#pragma once

// Command runner behind the bilayer-spectra CLI.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bilayer/config.hpp"
#include "bilayer/records.hpp"

namespace bilayer {

/// git describe of the build, or a fallback release tag.
std::string_view version_string();

const std::vector<std::string>& command_names();

struct RunResult {
  std::string command;
  Table table;
  nlohmann::json summary;
};

/// Runs one command.  Rows always end with the config_hash column.
RunResult run(std::string_view command, const ExperimentConfig& config);

/// Summary document: schema, version, command, config echo, hash, summary.
nlohmann::json summary_document(const RunResult& result, const ExperimentConfig& config);

/// Column schema of each command's table (for parsing emitted CSV).
std::vector<Column> command_schema(std::string_view command, const ExperimentConfig& config);

}  // namespace bilayer
