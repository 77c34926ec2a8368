#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace cmdp::cli {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> trials;
  bool quick = false;
  std::optional<int> workers;
  /// Input file for commands that consume a CMDP or trajectories.
  std::string input;
};

int run_generate(const CommonOptions& options);
int run_simulate(const CommonOptions& options);
int run_cluster(const CommonOptions& options);
int run_cece_command(const CommonOptions& options);
int run_experiment(const std::string& experiment, const CommonOptions& options);
int run_bounds(const CommonOptions& options);
int run_verify_bounds(const CommonOptions& options);

}  // namespace cmdp::cli
