// chaingraph: simulate, fit, evaluate and diagnose Gaussian chain graphs.

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace chaingraph::cli;
  init_logging();

  CLI::App app{"Chain graph structure learning"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a model and a data set from a design");
  simulate->add_option("--config", sim.config, "Generator config (JSON)")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--seed", sim.seed, "Override the config seed");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Estimate the chain graph from data");
  fit_cmd->add_option("--data", fit.data, "n x p data matrix (CSV)")->required();
  fit_cmd->add_option("--config", fit.config, "Recovery config (JSON)");
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();
  fit_cmd->add_flag("--center", fit.center, "Subtract column means before forming the covariance");
  fit_cmd->add_option("--eta", fit.eta, "Tuning exponent in (0, 1/4)");
  fit_cmd->add_option("--gamma", fit.gamma, "Nuclear-norm weight");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Compare an estimated graph with the truth");
  eval->add_option("--est", ev.est, "Estimated graph (JSON)")->required();
  eval->add_option("--truth", ev.truth, "True graph (JSON)")->required();
  eval->add_option("--out", ev.out, "Metrics file (default stdout)");

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run replicated simulations");
  experiment->add_option("--config", ex.config, "Experiment config (JSON)")->required();
  experiment->add_option("--out", ex.out, "Output directory")->required();
  experiment->add_option("--parallelism", ex.parallelism, "Worker threads");
  experiment->add_option("--seed", ex.seed, "Override base_seed");
  experiment->add_option("--eta", ex.eta, "Tuning exponent in (0, 1/4)");
  experiment->add_option("--gamma", ex.gamma, "Nuclear-norm weight");

  CheckArgs ck;
  auto* check = app.add_subcommand("check", "Identifiability diagnostics for (omega, b)");
  check->add_option("--params", ck.params, "Directory with omega.csv and b.csv")->required();
  check->add_option("--out", ck.out, "Report file (default stdout)");
  check->add_option("--gamma", ck.gamma, "Nuclear-norm weight")->capture_default_str();
  check->add_option("--incoherence-cap", ck.incoherence_cap, "Skip incoherence above this p")
      ->capture_default_str();
  check->add_option("--sign-convention", ck.sign_convention, "full or offdiag")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*simulate) return cmd_simulate(sim);
  if (*fit_cmd) return cmd_fit(fit);
  if (*eval) return cmd_eval(ev);
  if (*experiment) return cmd_experiment(ex);
  return cmd_check(ck);
}
