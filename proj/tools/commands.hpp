#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace bsts::cli {

struct RunOptions {
  std::filesystem::path output;
  int threads = 1;
  bool quiet = false;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand on a resolved config and writes its outputs plus
/// manifest.json into options.output. Errors propagate as exceptions.
void run_command(const std::string& command, const json& resolved, const RunOptions& options, std::ostream& log);

}  // namespace bsts::cli
