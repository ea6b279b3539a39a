#pragma once

#include <string>

#include "spikerace/io.hpp"

namespace spikerace {

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir);
int cmd_fit(const RunConfig& cfg, const std::string& data_path, const std::string& out_dir);
int cmd_compare(const RunConfig& cfg, const std::string& data_path, const std::string& out_dir);
int cmd_screen(const RunConfig& cfg, const std::string& data_path, const std::string& out_dir);

/**
 * Parses arguments, merges config file and flags, and dispatches. Returns the
 * process exit code: 0 success, 2 bad input, 3 numerical failure, 4 internal.
 */
int run_cli(int argc, const char* const* argv);

}  // namespace spikerace
