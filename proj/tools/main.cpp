#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cmdp/errors.hpp"
#include "commands.hpp"

namespace {

void add_common(CLI::App& sub, cmdp::cli::CommonOptions& options) {
  sub.add_option("--config", options.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  sub.add_option("--seed", options.seed, "Master seed");
  sub.add_option("--out", options.out, "Output path");
  sub.add_option("--trials", options.trials, "Trials per swept value")->check(CLI::PositiveNumber);
  sub.add_flag("--quick", options.quick, "Reduced desk-scale preset");
  sub.add_option("--workers", options.workers, "Worker threads; output does not depend on it")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual MDP simulation and CECE experiments"};
  app.require_subcommand(1);
  cmdp::cli::CommonOptions options;

  auto* generate = app.add_subcommand("generate", "Draw a random CMDP and write it as JSON");
  auto* simulate = app.add_subcommand("simulate", "Simulate uniform-policy episodes on a CMDP");
  auto* cluster = app.add_subcommand("cluster", "Cluster trajectories and score the partition");
  auto* cece = app.add_subcommand("run-cece", "Run CECE and write the per-episode ledger");
  auto* exp1t = app.add_subcommand("exp1-t", "Experiment 1: clustering score against trajectory length");
  auto* exp1h = app.add_subcommand("exp1-h", "Experiment 1: clustering score against episode count");
  auto* exp2 = app.add_subcommand("exp2", "Experiment 2: CECE average reward sweeps");
  auto* bounds = app.add_subcommand("bounds", "Tabulate rate expressions and regret bounds along a sweep");
  auto* verify = app.add_subcommand("verify-bounds", "Monte-Carlo checks of the concentration and simulation bounds");

  for (auto* sub : {generate, simulate, cluster, cece, exp1t, exp1h, exp2, bounds, verify}) add_common(*sub, options);
  simulate->add_option("--cmdp", options.input, "CMDP JSON to simulate on (generated when absent)")
      ->check(CLI::ExistingFile);
  cece->add_option("--cmdp", options.input, "CMDP JSON to run on (generated when absent)")->check(CLI::ExistingFile);
  cluster->add_option("--input", options.input, "Trajectories JSON (simulated when absent)")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmdp::cli::run_generate(options);
    if (simulate->parsed()) return cmdp::cli::run_simulate(options);
    if (cluster->parsed()) return cmdp::cli::run_cluster(options);
    if (cece->parsed()) return cmdp::cli::run_cece_command(options);
    if (exp1t->parsed()) return cmdp::cli::run_experiment("exp1-t", options);
    if (exp1h->parsed()) return cmdp::cli::run_experiment("exp1-h", options);
    if (exp2->parsed()) return cmdp::cli::run_experiment("exp2", options);
    if (bounds->parsed()) return cmdp::cli::run_bounds(options);
    if (verify->parsed()) return cmdp::cli::run_verify_bounds(options);
  } catch (const cmdp::InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
