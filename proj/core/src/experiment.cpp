#include "cmdp/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"

#include "cmdp/errors.hpp"
#include "cmdp/serialize.hpp"

namespace cmdp {

namespace {

using nlohmann::json;

constexpr int kQuickStates = 20;
// Horizons shrink with (S_quick / S_full)^2 so that T / S^2 stays fixed.
constexpr double kQuickHorizonScale = (20.0 / 100.0) * (20.0 / 100.0);

int quick_horizon(double full) { return std::max(2, static_cast<int>(std::lround(full * kQuickHorizonScale))); }

std::vector<double> default_sweep(const std::string& experiment, const std::string& param, bool quick) {
  std::vector<double> values;
  if (experiment == "exp1-t" || (experiment == "exp2" && param == "T")) {
    values = experiment == "exp1-t" ? std::vector<double>{1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000}
                                    : std::vector<double>{500, 1000, 2000, 4000};
    if (quick)
      for (double& v : values) v = quick_horizon(v);
  } else if (param == "H") {
    values = experiment == "exp1-h" ? std::vector<double>{10, 20, 50, 100, 200} : std::vector<double>{20, 50, 100, 200};
  } else if (param == "K") {
    values = {5, 10, 20, 40};
  } else if (param == "eta") {
    values = {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9};
  }
  return values;
}

void check_keys(const json& node, const std::set<std::string>& allowed, const std::string& where) {
  detail::require(node.is_object(), where + " must be an object");
  for (const auto& [key, value] : node.items())
    if (!allowed.count(key)) throw InvalidParameter("unknown key '" + key + "' in " + where);
}

void read_slots(const json& slots, ClusterSlot& cluster, std::string& explore, std::string& classify,
                ExploitSlot& exploit) {
  check_keys(slots, {"cluster", "explore", "classify", "exploit"}, "slots");
  if (slots.contains("cluster")) {
    const json& c = slots.at("cluster");
    check_keys(c, {"name", "restarts", "max_iterations"}, "slots.cluster");
    if (c.contains("name")) cluster.name = c.at("name").get<std::string>();
    if (c.contains("restarts")) cluster.kmeans.restarts = c.at("restarts").get<int>();
    if (c.contains("max_iterations")) cluster.kmeans.max_iterations = c.at("max_iterations").get<int>();
  }
  if (slots.contains("explore")) {
    const json& e = slots.at("explore");
    check_keys(e, {"name"}, "slots.explore");
    if (e.contains("name")) explore = e.at("name").get<std::string>();
  }
  if (slots.contains("classify")) {
    const json& c = slots.at("classify");
    check_keys(c, {"name"}, "slots.classify");
    if (c.contains("name")) classify = c.at("name").get<std::string>();
  }
  if (slots.contains("exploit")) {
    const json& e = slots.at("exploit");
    check_keys(e, {"name", "learn_rate", "explore_rate", "q_init", "discount"}, "slots.exploit");
    if (e.contains("name")) exploit.name = e.at("name").get<std::string>();
    if (e.contains("learn_rate")) exploit.qlearning.learn_rate = e.at("learn_rate").get<double>();
    if (e.contains("explore_rate")) exploit.qlearning.explore_rate = e.at("explore_rate").get<double>();
    if (e.contains("q_init")) exploit.qlearning.q_init = e.at("q_init").get<double>();
    if (e.contains("discount")) exploit.qlearning.discount = e.at("discount").get<double>();
  }
}

json parse_object(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("malformed configuration: ") + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  detail::require(experiment == "exp1-t" || experiment == "exp1-h" || experiment == "exp2",
                  "unknown experiment '" + experiment + "'");
  detail::require(num_states >= 1 && num_actions >= 1 && num_contexts >= 1, "instance sizes must be positive");
  detail::require(trials >= 1, "trials must be at least 1");
  detail::require(workers >= 1, "workers must be at least 1");
  detail::require(!sweep_values.empty(), "the sweep needs at least one value");
  if (experiment == "exp1-t") detail::require(sweep_param == "T", "exp1-t sweeps T");
  if (experiment == "exp1-h") {
    detail::require(sweep_param == "H", "exp1-h sweeps H");
    detail::require(!line_horizons.empty(), "exp1-h needs at least one line horizon");
  }
  if (experiment == "exp2") {
    detail::require(sweep_param == "H" || sweep_param == "T" || sweep_param == "K" || sweep_param == "eta",
                    "exp2 sweeps one of H, T, K, eta");
    detail::require(minibatch_size >= 1, "minibatch_size must be positive");
    detail::require(exploration_steps.has_value() != exploration_fraction.has_value(),
                    "set exactly one of exploration_steps and exploration_fraction");
  }
}

ExperimentConfig default_experiment_config(const std::string& experiment, bool quick) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "exp1-t" || experiment == "exp1-h") {
    c.num_states = 100;
    c.num_actions = 2;
    c.num_contexts = 5;
    c.trajectories = 100;
    c.horizon = 8000;
    c.trials = 100;
    c.sweep_param = experiment == "exp1-t" ? "T" : "H";
    if (experiment == "exp1-h") c.line_horizons = {2000, 5000, 8000};
  } else if (experiment == "exp2") {
    c.num_states = 100;
    c.num_actions = 4;
    c.num_contexts = 20;
    c.trajectories = 100;
    c.horizon = 2000;
    c.exploration_fraction = 0.3;
    c.minibatch_size = 20;
    c.trials = 20;
    c.sweep_param = "H";
    c.exploit.name = "qlearning";
  } else {
    throw InvalidParameter("unknown experiment '" + experiment + "'");
  }
  c.quick = quick;
  if (quick) {
    c.num_states = kQuickStates;
    c.horizon = quick_horizon(c.horizon);
    for (int& t : c.line_horizons) t = quick_horizon(t);
    c.trials = 10;
  }
  c.sweep_values = default_sweep(experiment, c.sweep_param, quick);
  return c;
}

ExperimentConfig parse_experiment_config(std::string_view text, ExperimentConfig base) {
  const json root = parse_object(text);
  check_keys(root,
             {"experiment", "num_states", "num_actions", "num_contexts", "row_distribution", "trajectories",
              "horizon", "exploration_steps", "exploration_fraction", "minibatch_size", "sweep", "line_horizons", "trials",
              "seed", "out", "workers", "fixed_instance", "slots", "bounds"},
             "experiment config");
  try {
    if (root.contains("experiment")) base.experiment = root.at("experiment").get<std::string>();
    if (root.contains("num_states")) base.num_states = root.at("num_states").get<int>();
    if (root.contains("num_actions")) base.num_actions = root.at("num_actions").get<int>();
    if (root.contains("num_contexts")) base.num_contexts = root.at("num_contexts").get<int>();
    if (root.contains("row_distribution"))
      base.row_distribution = parse_row_distribution(root.at("row_distribution").get<std::string>());
    if (root.contains("trajectories")) base.trajectories = root.at("trajectories").get<int>();
    if (root.contains("horizon")) base.horizon = root.at("horizon").get<int>();
    if (root.contains("exploration_steps")) {
      base.exploration_steps = root.at("exploration_steps").get<int>();
      base.exploration_fraction.reset();
    }
    if (root.contains("exploration_fraction")) {
      base.exploration_fraction = root.at("exploration_fraction").get<double>();
      base.exploration_steps.reset();
    }
    if (root.contains("minibatch_size")) base.minibatch_size = root.at("minibatch_size").get<int>();
    if (root.contains("sweep")) {
      const json& sweep = root.at("sweep");
      check_keys(sweep, {"param", "values"}, "sweep");
      if (sweep.contains("param")) {
        base.sweep_param = sweep.at("param").get<std::string>();
        base.sweep_values = default_sweep(base.experiment, base.sweep_param, base.quick);
      }
      if (sweep.contains("values")) base.sweep_values = sweep.at("values").get<std::vector<double>>();
    }
    if (root.contains("line_horizons")) base.line_horizons = root.at("line_horizons").get<std::vector<int>>();
    if (root.contains("trials")) base.trials = root.at("trials").get<int>();
    if (root.contains("seed")) base.seed = root.at("seed").get<std::uint64_t>();
    if (root.contains("out")) base.out = root.at("out").get<std::string>();
    if (root.contains("workers")) base.workers = root.at("workers").get<int>();
    if (root.contains("fixed_instance")) base.fixed_instance = root.at("fixed_instance").get<bool>();
    if (root.contains("slots")) read_slots(root.at("slots"), base.cluster, base.explore, base.classify, base.exploit);
    if (root.contains("bounds")) {
      const json& b = root.at("bounds");
      check_keys(b, {"separation", "alpha", "beta", "constant_scale"}, "bounds");
      if (b.contains("separation")) base.bounds.separation = b.at("separation").get<double>();
      if (b.contains("alpha")) base.bounds.alpha = b.at("alpha").get<double>();
      if (b.contains("beta")) base.bounds.beta = b.at("beta").get<double>();
      if (b.contains("constant_scale")) base.bounds.constant_scale = b.at("constant_scale").get<double>();
    }
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("bad configuration value: ") + e.what());
  }
  return base;
}

CeceConfig parse_cece_config(std::string_view text) {
  const json root = parse_object(text);
  check_keys(root,
             {"num_contexts", "horizon", "exploration_steps", "exploration_fraction", "minibatch_sizes", "slots"},
             "CECE config");
  CeceConfig c;
  try {
    if (root.contains("num_contexts")) c.num_contexts = root.at("num_contexts").get<int>();
    if (root.contains("horizon")) c.horizon = root.at("horizon").get<int>();
    if (root.contains("exploration_steps")) c.exploration_steps = root.at("exploration_steps").get<int>();
    if (root.contains("exploration_fraction")) c.exploration_fraction = root.at("exploration_fraction").get<double>();
    if (root.contains("minibatch_sizes")) c.minibatch_sizes = root.at("minibatch_sizes").get<std::vector<int>>();
    if (root.contains("slots")) read_slots(root.at("slots"), c.cluster, c.explore, c.classify, c.exploit);
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("bad configuration value: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<SweepSummary> SweepResult::summary() const {
  std::vector<SweepSummary> out;
  std::vector<std::vector<double>> groups;
  for (const SweepRow& row : rows) {
    std::size_t g = 0;
    while (g < out.size() && out[g].swept_value != row.swept_value) ++g;
    if (g == out.size()) {
      out.push_back(SweepSummary{row.swept_value});
      groups.emplace_back();
    }
    groups[g].push_back(row.metric);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    const auto& v = groups[g];
    out[g].n = static_cast<int>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    out[g].mean = sum / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - out[g].mean) * (x - out[g].mean);
    out[g].std = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
  }
  return out;
}

void parallel_for(int count, int workers, const std::function<void(int)>& task) {
  if (count <= 0) return;
  const int threads = std::max(1, std::min(workers, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct TrialTask {
  std::size_t sweep_index;
  int trial;
};

std::vector<TrialTask> trial_grid(std::size_t sweep_count, int trials) {
  std::vector<TrialTask> tasks;
  for (std::size_t v = 0; v < sweep_count; ++v)
    for (int t = 0; t < trials; ++t) tasks.push_back({v, t});
  return tasks;
}

std::uint64_t instance_seed(const ExperimentConfig& config, std::uint64_t trial_seed, int trial) {
  return config.fixed_instance ? derive_seed(config.seed, {0xF1EDu, static_cast<std::uint64_t>(trial)})
                               : derive_seed(trial_seed, {0});
}

double clustering_trial(const ExperimentConfig& config, int horizon, int trajectories, std::uint64_t trial_seed,
                        int trial) {
  const ContextualMdp cmdp = generate_random_cmdp(config.num_states, config.num_actions, config.num_contexts,
                                                  instance_seed(config, trial_seed, trial), config.row_distribution);
  const Policy uniform = Policy::uniform(config.num_actions);
  std::vector<Trajectory> data;
  data.reserve(static_cast<std::size_t>(trajectories));
  for (int h = 0; h < trajectories; ++h)
    data.push_back(simulate_episode(cmdp, uniform, horizon, derive_seed(trial_seed, {1, static_cast<std::uint64_t>(h)})));
  const ClusterAssignment assignment = kmeans_cluster(data, config.num_contexts,
                                                      {config.num_states, config.num_actions}, config.cluster.kmeans,
                                                      derive_seed(trial_seed, {2}));
  std::vector<int> truth;
  truth.reserve(data.size());
  for (const auto& t : data) truth.push_back(*t.true_context);
  return entropy_score(assignment.labels, truth, config.num_contexts);
}

SweepResult run_clustering_sweep(const ExperimentConfig& config, const std::string& name, std::uint64_t line_key,
                                 int fixed_horizon, bool sweep_horizon) {
  SweepResult result;
  result.experiment = name;
  result.swept_param = sweep_horizon ? "T" : "H";
  result.metric_name = "entropy_nats";
  const auto tasks = trial_grid(config.sweep_values.size(), config.trials);
  result.rows.resize(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), config.workers, [&](int i) {
    const TrialTask& task = tasks[i];
    const double value = config.sweep_values[task.sweep_index];
    const std::uint64_t trial_seed =
        derive_seed(config.seed, {line_key, task.sweep_index, static_cast<std::uint64_t>(task.trial)});
    const int horizon = sweep_horizon ? static_cast<int>(value) : fixed_horizon;
    const int trajectories = sweep_horizon ? config.trajectories : static_cast<int>(value);
    result.rows[i] = {value, task.trial, trial_seed,
                      clustering_trial(config, horizon, trajectories, trial_seed, task.trial)};
  });
  return result;
}

}  // namespace

SweepResult experiment1_score_vs_T(const ExperimentConfig& config) {
  config.validate();
  detail::require(config.experiment == "exp1-t", "configuration is not for exp1-t");
  return run_clustering_sweep(config, "exp1-t", 0, config.horizon, true);
}

std::vector<SweepResult> experiment1_score_vs_H(const ExperimentConfig& config) {
  config.validate();
  detail::require(config.experiment == "exp1-h", "configuration is not for exp1-h");
  std::vector<SweepResult> lines;
  for (std::size_t line = 0; line < config.line_horizons.size(); ++line) {
    const int horizon = config.line_horizons[line];
    lines.push_back(run_clustering_sweep(config, "exp1-h-T" + std::to_string(horizon),
                                         static_cast<std::uint64_t>(horizon), horizon, false));
  }
  return lines;
}

SweepResult experiment2_sweeps(const ExperimentConfig& config) {
  config.validate();
  detail::require(config.experiment == "exp2", "configuration is not for exp2");
  SweepResult result;
  result.experiment = "exp2";
  result.swept_param = config.sweep_param;
  result.metric_name = "average_reward";
  const auto tasks = trial_grid(config.sweep_values.size(), config.trials);
  result.rows.resize(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), config.workers, [&](int i) {
    const TrialTask& task = tasks[i];
    const double value = config.sweep_values[task.sweep_index];
    const std::uint64_t trial_seed =
        derive_seed(config.seed, {task.sweep_index, static_cast<std::uint64_t>(task.trial)});

    int num_contexts = config.num_contexts;
    int trajectories = config.trajectories;
    CeceConfig cece;
    cece.horizon = config.horizon;
    cece.exploration_steps = config.exploration_steps;
    cece.exploration_fraction = config.exploration_fraction;
    if (config.sweep_param == "H") trajectories = static_cast<int>(value);
    if (config.sweep_param == "T") cece.horizon = static_cast<int>(value);
    if (config.sweep_param == "K") num_contexts = static_cast<int>(value);
    if (config.sweep_param == "eta") {
      cece.exploration_steps.reset();
      cece.exploration_fraction = value;
    }
    cece.num_contexts = num_contexts;
    for (int left = trajectories; left > 0; left -= config.minibatch_size)
      cece.minibatch_sizes.push_back(std::min(left, config.minibatch_size));
    cece.cluster = config.cluster;
    cece.explore = config.explore;
    cece.classify = config.classify;
    cece.exploit = config.exploit;

    const ContextualMdp cmdp = generate_random_cmdp(config.num_states, config.num_actions, num_contexts,
                                                    instance_seed(config, trial_seed, task.trial), config.row_distribution);
    const CeceRun run = run_cece(cmdp, cece, derive_seed(trial_seed, {3}));
    result.rows[i] = {value, task.trial, trial_seed, run.average_reward()};
  });
  return result;
}

std::string render_csv(const SweepResult& result) {
  std::string out = "experiment,swept_param,swept_value,trial,seed,metric_name,metric_value\n";
  for (const SweepRow& row : result.rows) {
    out += result.experiment + ',' + result.swept_param + ',' + format_real(row.swept_value) + ',' +
           std::to_string(row.trial) + ',' + std::to_string(row.seed) + ',' + result.metric_name + ',' +
           format_real(row.metric) + '\n';
  }
  return out;
}

std::string render_summary_csv(const SweepResult& result) {
  std::string out = "swept_value,mean,std,n\n";
  for (const SweepSummary& s : result.summary())
    out += format_real(s.swept_value) + ',' + format_real(s.mean) + ',' + format_real(s.std) + ',' +
           std::to_string(s.n) + '\n';
  return out;
}

std::string summary_path(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_summary";
  return path.substr(0, dot) + "_summary" + path.substr(dot);
}

void emit_csv(const SweepResult& result, const std::string& path) {
  write_text_file(path, render_csv(result));
  write_text_file(summary_path(path), render_summary_csv(result));
}

}  // namespace cmdp
