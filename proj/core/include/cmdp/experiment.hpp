#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmdp/cece.hpp"

namespace cmdp {

/// Parameters the rate calculators need beyond the instance sizes.
struct BoundsSettings {
  double separation = 1.0;
  /// Defaults to 1 / (S A), the visit fraction of a uniform sweep.
  std::optional<double> alpha;
  /// Defaults to 1 / K.
  std::optional<double> beta;
  double constant_scale = 1.0;
};

struct ExperimentConfig {
  /// "exp1-t", "exp1-h" or "exp2".
  std::string experiment = "exp1-t";
  int num_states = 100;
  int num_actions = 2;
  int num_contexts = 5;
  RowDistribution row_distribution = RowDistribution::kSimplex;
  int trajectories = 100;  // H
  int horizon = 2000;      // T
  std::optional<int> exploration_steps;
  std::optional<double> exploration_fraction;
  int minibatch_size = 20;

  /// The single swept parameter: "T" or "H" for experiment 1; "H", "T", "K"
  /// or "eta" for experiment 2.
  std::string sweep_param = "T";
  std::vector<double> sweep_values;
  /// Experiment 1 vs H draws one line per trajectory length.
  std::vector<int> line_horizons;

  int trials = 100;
  std::uint64_t seed = 1;
  std::string out;
  int workers = 1;
  /// Reuse one instance per trial index across swept values.
  bool fixed_instance = false;

  ClusterSlot cluster;
  std::string explore = "uniform";
  std::string classify = "min-l1";
  ExploitSlot exploit;

  BoundsSettings bounds;

  /// Whether the defaults came from the reduced preset; default sweep lists
  /// for a newly chosen axis follow it.
  bool quick = false;

  void validate() const;
};

/// Full-scale defaults for an experiment, or the reduced desk-scale preset.
ExperimentConfig default_experiment_config(const std::string& experiment, bool quick);

/// Overlays a JSON object on `base`. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(std::string_view text, ExperimentConfig base);

/// Reads a CeceConfig from JSON. Unknown keys are rejected.
CeceConfig parse_cece_config(std::string_view text);

struct SweepRow {
  double swept_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double metric = 0.0;
};

struct SweepSummary {
  double swept_value = 0.0;
  double mean = 0.0;
  /// Sample standard deviation (n - 1 denominator; 0 for one trial).
  double std = 0.0;
  int n = 0;
};

struct SweepResult {
  std::string experiment;
  std::string swept_param;
  std::string metric_name;
  std::vector<SweepRow> rows;

  /// One entry per swept value, in first-appearance order.
  std::vector<SweepSummary> summary() const;
};

SweepResult experiment1_score_vs_T(const ExperimentConfig& config);
std::vector<SweepResult> experiment1_score_vs_H(const ExperimentConfig& config);
SweepResult experiment2_sweeps(const ExperimentConfig& config);

/// Runs `task(i)` for i in [0, count) on `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& task);

std::string render_csv(const SweepResult& result);
std::string render_summary_csv(const SweepResult& result);
/// "out/run.csv" -> "out/run_summary.csv".
std::string summary_path(const std::string& path);
/// Writes the per-trial file and its `_summary` sibling.
void emit_csv(const SweepResult& result, const std::string& path);

}  // namespace cmdp
