#include "commands.hpp"

#include <iostream>
#include <sstream>
#include <vector>

#include "cmdp/bounds.hpp"
#include "cmdp/cece.hpp"
#include "cmdp/errors.hpp"
#include "cmdp/experiment.hpp"
#include "cmdp/serialize.hpp"
#include "cmdp/simulate.hpp"

namespace cmdp::cli {

namespace {

ExperimentConfig load_config(const std::string& preset, const CommonOptions& options) {
  ExperimentConfig config = default_experiment_config(preset, options.quick);
  if (!options.config_path.empty()) config = parse_experiment_config(read_text_file(options.config_path), config);
  if (options.seed) config.seed = *options.seed;
  if (options.trials) config.trials = *options.trials;
  if (options.workers) config.workers = *options.workers;
  if (!options.out.empty()) config.out = options.out;
  return config;
}

void deliver(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

ContextualMdp instance_for(const ExperimentConfig& config, const CommonOptions& options) {
  if (!options.input.empty()) return cmdp_from_json(read_text_file(options.input));
  return generate_random_cmdp(config.num_states, config.num_actions, config.num_contexts,
                              derive_seed(config.seed, {0}), config.row_distribution);
}

std::vector<Trajectory> uniform_trajectories(const ContextualMdp& cmdp, const ExperimentConfig& config) {
  const Policy uniform = Policy::uniform(cmdp.num_actions());
  std::vector<Trajectory> data;
  for (int h = 0; h < config.trajectories; ++h)
    data.push_back(simulate_episode(cmdp, uniform, config.horizon,
                                    derive_seed(config.seed, {1, static_cast<std::uint64_t>(h)})));
  return data;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

std::string flag(bool b) { return b ? "1" : "0"; }

}  // namespace

int run_generate(const CommonOptions& options) {
  const ExperimentConfig config = load_config("exp1-t", options);
  const ContextualMdp cmdp = generate_random_cmdp(config.num_states, config.num_actions, config.num_contexts,
                                                  derive_seed(config.seed, {0}), config.row_distribution);
  deliver(config.out, to_json(cmdp) + "\n");
  return 0;
}

int run_simulate(const CommonOptions& options) {
  const ExperimentConfig config = load_config("exp1-t", options);
  const ContextualMdp cmdp = instance_for(config, options);
  detail::require(config.trajectories >= 0 && config.horizon >= 0, "trajectories and horizon must be nonnegative");
  const std::vector<Trajectory> data = uniform_trajectories(cmdp, config);
  deliver(config.out, to_json(std::span<const Trajectory>(data)) + "\n");
  return 0;
}

int run_cluster(const CommonOptions& options) {
  const ExperimentConfig config = load_config("exp1-t", options);
  std::vector<Trajectory> data;
  int num_states = config.num_states;
  int num_actions = config.num_actions;
  if (!options.input.empty()) {
    data = trajectories_from_json(read_text_file(options.input));
    num_states = 0;
    num_actions = 0;
    for (const auto& t : data) {
      for (int s : t.states) num_states = std::max(num_states, s + 1);
      for (int a : t.actions) num_actions = std::max(num_actions, a + 1);
    }
    num_states = std::max(num_states, config.num_states);
    num_actions = std::max(num_actions, config.num_actions);
  } else {
    data = uniform_trajectories(instance_for(config, options), config);
  }

  const ModelSpace space{num_states, num_actions};
  ClusterAssignment assignment;
  if (config.cluster.name == "exhaustive")
    assignment = exhaustive_cluster(data, config.num_contexts, space);
  else if (config.cluster.name == "kmeans")
    assignment = kmeans_cluster(data, config.num_contexts, space, config.cluster.kmeans, derive_seed(config.seed, {2}));
  else
    throw InvalidParameter("the cluster command supports the kmeans and exhaustive slots");

  std::string csv = "trajectory,true_context,label\n";
  bool labeled = !data.empty();
  std::vector<int> truth;
  for (std::size_t h = 0; h < data.size(); ++h) {
    const auto& c = data[h].true_context;
    labeled = labeled && c.has_value();
    if (c) truth.push_back(*c);
    csv += std::to_string(h) + ',' + (c ? std::to_string(*c) : std::string()) + ',' +
           std::to_string(assignment.labels[h]) + '\n';
  }
  deliver(config.out, csv);

  std::cerr << "score," << format_real(assignment.score) << '\n';
  if (labeled) std::cerr << "entropy_nats," << format_real(entropy_score(assignment.labels, truth, config.num_contexts)) << '\n';
  return 0;
}

int run_cece_command(const CommonOptions& options) {
  ExperimentConfig config = load_config("exp2", options);
  const ContextualMdp cmdp = instance_for(config, options);

  CeceConfig cece;
  cece.num_contexts = cmdp.num_contexts();
  cece.horizon = config.horizon;
  cece.exploration_steps = config.exploration_steps;
  cece.exploration_fraction = config.exploration_fraction;
  for (int left = config.trajectories; left > 0; left -= config.minibatch_size)
    cece.minibatch_sizes.push_back(std::min(left, config.minibatch_size));
  cece.cluster = config.cluster;
  cece.explore = config.explore;
  cece.classify = config.classify;
  cece.exploit = config.exploit;

  const CeceRun run = run_cece(cmdp, cece, derive_seed(config.seed, {3}));
  std::string csv =
      "episode,batch,true_context,classified_context,correct,classification_failed,optimal_value,realized_reward,"
      "exploration_reward,exploitation_reward\n";
  for (const EpisodeRecord& r : run.ledger.records()) {
    csv += std::to_string(r.episode) + ',' + std::to_string(r.batch) + ',' + std::to_string(r.true_context) + ',' +
           (r.classified_context ? std::to_string(*r.classified_context) : std::string()) + ',' +
           flag(r.correct_classification) + ',' + flag(r.classification_failed) + ',' + format_real(r.optimal_value) +
           ',' + format_real(r.realized_reward) + ',' + format_real(r.exploration_reward) + ',' +
           format_real(r.exploitation_reward) + '\n';
  }
  deliver(config.out, csv);
  std::cerr << "average_reward,regret,classification_failures\n"
            << format_real(run.average_reward()) << ',' << format_real(compute_regret(run.ledger)) << ','
            << run.classification_failures << '\n';
  return 0;
}

int run_experiment(const std::string& experiment, const CommonOptions& options) {
  ExperimentConfig config = load_config(experiment, options);
  detail::require(config.experiment == experiment,
                  "configuration names experiment '" + config.experiment + "' but the command is " + experiment);
  if (config.out.empty()) config.out = experiment + ".csv";

  if (experiment == "exp1-t") {
    emit_csv(experiment1_score_vs_T(config), config.out);
  } else if (experiment == "exp1-h") {
    const auto lines = experiment1_score_vs_H(config);
    for (std::size_t i = 0; i < lines.size(); ++i)
      emit_csv(lines[i], with_suffix(config.out, "_T" + std::to_string(config.line_horizons[i])));
  } else {
    emit_csv(experiment2_sweeps(config), config.out);
  }
  return 0;
}

int run_bounds(const CommonOptions& options) {
  const ExperimentConfig config = load_config("exp2", options);
  detail::require(!config.sweep_values.empty(), "the sweep needs at least one value");
  std::string csv =
      "swept_param,swept_value,S,A,K,T,T_EC,H,epsilon_H,delta1_H,delta1_vacuous,delta2_defined,delta2_eps,"
      "delta2_vacuous,delta2_two_term,zeta_eps,theorem1_bound,corollary_misclassification,corollary_model_error,"
      "corollary_misclustering,corollary_total\n";

  for (double value : config.sweep_values) {
    RateInputs in;
    in.num_states = config.num_states;
    in.num_actions = config.num_actions;
    in.num_contexts = config.num_contexts;
    in.horizon = config.horizon;
    in.trajectories = config.trajectories;
    std::optional<double> fraction = config.exploration_fraction;
    std::optional<int> steps = config.exploration_steps;
    if (config.sweep_param == "H") in.trajectories = value;
    else if (config.sweep_param == "T") in.horizon = static_cast<int>(value);
    else if (config.sweep_param == "K") in.num_contexts = static_cast<int>(value);
    else if (config.sweep_param == "eta") {
      fraction = value;
      steps.reset();
    } else {
      throw InvalidParameter("bounds sweeps one of H, T, K, eta");
    }
    in.exploration_steps = steps ? *steps : static_cast<int>(std::llround(fraction.value_or(0.0) * in.horizon));
    in.separation = config.bounds.separation;
    in.alpha = config.bounds.alpha.value_or(1.0 / (static_cast<double>(in.num_states) * in.num_actions));
    in.beta = config.bounds.beta.value_or(1.0 / in.num_contexts);
    in.constant_scale = config.bounds.constant_scale;

    const RateBundle rates = lemma1_rates(in);
    const double batch = std::min<double>(config.minibatch_size, in.trajectories);
    const double regret = theorem1_regret_bound(batch, in.horizon, in.exploration_steps, rates);
    const CorollaryTerms terms = corollary_bound({in, std::max(0.0, in.trajectories - batch), batch});

    std::ostringstream row;
    row << config.sweep_param << ',' << format_real(value) << ',' << in.num_states << ',' << in.num_actions << ','
        << in.num_contexts << ',' << in.horizon << ',' << in.exploration_steps << ',' << format_real(in.trajectories)
        << ',' << format_real(rates.epsilon_H) << ',' << format_real(rates.delta1_H.value) << ','
        << flag(rates.delta1_H.vacuous) << ',' << flag(rates.delta2_defined) << ','
        << (rates.delta2_defined ? format_real(rates.delta2_eps.value) : std::string()) << ','
        << (rates.delta2_defined ? flag(rates.delta2_eps.vacuous) : std::string()) << ','
        << (rates.delta2_defined ? format_real(rates.delta2_two_term.value) : std::string()) << ','
        << format_real(rates.zeta_eps) << ',' << format_real(regret) << ',' << format_real(terms.misclassification)
        << ',' << format_real(terms.model_error) << ',' << format_real(terms.misclustering) << ','
        << format_real(terms.total) << '\n';
    csv += row.str();
  }
  deliver(config.out, csv);
  return 0;
}

int run_verify_bounds(const CommonOptions& options) {
  ExperimentConfig config = load_config("exp2", options);
  const int trials = options.trials ? *options.trials : (options.quick ? 2000 : 10000);

  struct Cell {
    int s;
    int m;
    double eps;
  };
  std::vector<Cell> grid;
  for (int s : {2, 3, 5})
    for (int m : {50, 200, 1000})
      for (double eps : {0.2, 0.5, 1.0}) grid.push_back({s, m, eps});

  std::vector<WeissmanCheck> checks(grid.size());
  parallel_for(static_cast<int>(grid.size()), config.workers, [&](int i) {
    checks[i] = verify_weissman_mc(grid[i].s, grid[i].m, grid[i].eps, trials,
                                   derive_seed(config.seed, {4, static_cast<std::uint64_t>(i)}));
  });

  SimulationLemmaOptions lemma;
  if (options.quick) lemma.pairs = 50;
  const SimulationLemmaCheck sim = verify_simulation_lemma(lemma, derive_seed(config.seed, {5}));

  std::string csv = "check,S,m,eps,trials,observed,bound,standard_error,holds\n";
  bool all = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const WeissmanCheck& c = checks[i];
    all = all && c.holds();
    csv += "weissman," + std::to_string(grid[i].s) + ',' + std::to_string(grid[i].m) + ',' +
           format_real(grid[i].eps) + ',' + std::to_string(c.trials) + ',' + format_real(c.frequency) + ',' +
           format_real(c.bound.value) + ',' + format_real(c.standard_error) + ',' + flag(c.holds()) + '\n';
  }
  all = all && sim.holds();
  csv += "simulation_lemma,,,," + std::to_string(sim.cases) + ',' + format_real(sim.worst_ratio) + ",1,," +
         flag(sim.holds()) + '\n';
  deliver(config.out, csv);
  return all ? 0 : 1;
}

}  // namespace cmdp::cli
