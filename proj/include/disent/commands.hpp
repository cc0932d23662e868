#pragma once

#include "disent/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace disent {

// One function per CLI subcommand. Each reads its inputs and writes its
// outputs as named by the config, and returns the text printed to stdout.
std::string cmd_gen_data(const Config& config);
std::string cmd_train(const Config& config);
std::string cmd_embed(const Config& config);
std::string cmd_cluster(const Config& config);
std::string cmd_evaluate(const Config& config);
std::string cmd_run_experiment(const Config& config);
std::string cmd_sweep_k(const Config& config);
std::string cmd_diagnostics(const Config& config);

// Dispatch by subcommand name; throws Validation for an unknown name.
std::string run_command(const std::string& name, const Config& config);
const std::vector<std::string>& command_names();

// Integer labels from a one-per-line file or from `column` of a CSV with a
// header row.
std::vector<int> read_label_file(const std::filesystem::path& path, const std::string& column);

// Like format_double but always shows a decimal point ("1.0", not "1").
std::string format_score(double v);

}  // namespace disent
