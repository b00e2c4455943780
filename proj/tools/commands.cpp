#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "chaingraph/diagnostics.hpp"
#include "chaingraph/experiment.hpp"
#include "chaingraph/io.hpp"

namespace chaingraph::cli {

namespace fs = std::filesystem;
using io::json;

void init_logging() {
  auto logger = spdlog::get("chaingraph");
  if (!logger) logger = spdlog::stderr_color_mt("chaingraph");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  const char* env = std::getenv("CHAINGRAPH_LOG");
  if (!env || !*env) return;
  const auto level = spdlog::level::from_str(env);
  // from_str maps anything unknown to off; only accept "off" when asked for
  if (level == spdlog::level::off && std::string(env) != "off") {
    spdlog::warn("unknown CHAINGRAPH_LOG level '{}', using info", env);
    return;
  }
  spdlog::set_level(level);
}

namespace {

// Runs `body`, mapping input problems to exit 2 and anything else to 1.
template <typename F>
int guarded(const char* name, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    spdlog::error("{}: {}", name, e.what());
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}: {}", name, e.what());
    return kExitInput;
  } catch (const json::exception& e) {
    spdlog::error("{}: malformed JSON: {}", name, e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", name, e.what());
    return kExitPartial;
  }
}

void prepare_out_dir(const std::string& out) {
  if (out.empty()) throw InputError("--out is required");
  fs::create_directories(out);
  if (!fs::is_directory(out)) throw InputError(out + " is not a directory");
}

void emit(const std::string& out, const json& j) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::write_json(out, j);
  }
}

}  // namespace

int cmd_simulate(const SimulateArgs& args) {
  return guarded("simulate", [&] {
    const json raw = io::read_json(args.config);
    GenConfig gen = io::gen_config_from_json(raw);
    if (args.seed) gen.seed = *args.seed;
    if (!raw.contains("n")) throw InputError("simulate config needs n");
    const int n = raw.at("n").get<int>();
    if (n < 2) throw InputError("n must be at least 2");
    if (raw.contains("reps")) spdlog::info("simulate draws a single data set; 'reps' ignored");

    // everything is computed before the first file is written
    const SimulatedModel model = generate(gen);
    const Matrix x = sample_data(model.params, n, splitmix64(gen.seed));
    json manifest = {{"schema_version", io::kSchemaVersion},
                     {"config", io::gen_config_to_json(gen)},
                     {"n", n},
                     {"seed", gen.seed},
                     {"data_seed", splitmix64(gen.seed)},
                     {"files", {"omega.csv", "b.csv", "graph.json", "data.csv"}}};
    manifest["config"]["n"] = n;

    prepare_out_dir(args.out);
    const fs::path dir = args.out;
    io::write_matrix(dir / "omega.csv", model.params.omega);
    io::write_matrix(dir / "b.csv", model.params.b);
    io::write_json(dir / "graph.json", io::graph_to_json(model.graph));
    io::write_matrix(dir / "data.csv", x);
    io::write_json(dir / "manifest.json", manifest);
    spdlog::info("simulated {} p={} n={} seed={} into {}", to_string(gen.design), gen.p, n, gen.seed, args.out);
    return kExitOk;
  });
}

int cmd_fit(const FitArgs& args) {
  return guarded("fit", [&] {
    RecoveryConfig cfg;
    if (!args.config.empty()) cfg = io::recovery_config_from_json(io::read_json(args.config));
    if (args.center) cfg.center = true;
    if (args.eta) cfg.eta = *args.eta;
    if (args.gamma) cfg.solver.gamma = *args.gamma;
    cfg.validate();
    cfg.solver.validate();
    if (args.data.empty()) throw InputError("--data is required");
    const Matrix x = io::read_matrix(args.data);

    const ChainGraphEstimate est = learn_chain_graph(x, cfg);
    if (!est.fit.converged) spdlog::warn("ADMM did not converge in {} iterations", est.fit.iterations);
    if (est.warnings.ill_conditioned) {
      spdlog::warn("{} conditioning blocks needed an eigenvalue floor", est.warnings.ill_conditioned);
    }

    json ordering = json::array();
    for (int c : est.ordered.pi_hat) {
      json comp = json::array();
      for (int v : est.ordered.components[c]) comp.push_back(v + 1);
      ordering.push_back(comp);
    }
    const json diagnostics = {{"schema_version", io::kSchemaVersion},
                              {"n", x.rows()},
                              {"p", x.cols()},
                              {"iterations", est.fit.iterations},
                              {"converged", est.fit.converged},
                              {"primal_residual", est.fit.primal_residual},
                              {"dual_residual", est.fit.dual_residual},
                              {"objective", est.fit.objective},
                              {"inner_unconverged", est.fit.inner_unconverged},
                              {"lambda", est.lambda},
                              {"kappa", est.kappa},
                              {"nu", est.nu},
                              {"eta", cfg.eta},
                              {"gamma", cfg.solver.gamma},
                              {"center", cfg.center},
                              {"ill_conditioned_blocks", est.warnings.ill_conditioned},
                              {"component_order", ordering},
                              {"gaps", est.ordered.gaps}};

    prepare_out_dir(args.out);
    const fs::path dir = args.out;
    io::write_matrix(dir / "omega_hat.csv", est.fit.omega);
    io::write_matrix(dir / "lowrank_hat.csv", est.fit.lowrank);
    io::write_matrix(dir / "b_hat.csv", est.b_hat);
    io::write_json(dir / "graph_hat.json", io::graph_to_json(est.graph));
    io::write_json(dir / "diagnostics.json", diagnostics);
    spdlog::info("fit: {} undirected, {} directed edges", est.graph.undirected.size(), est.graph.directed.size());
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args) {
  return guarded("eval", [&] {
    const ChainGraph est = io::graph_from_json(io::read_json(args.est));
    const ChainGraph truth = io::graph_from_json(io::read_json(args.truth));
    emit(args.out, io::metrics_to_json(edge_metrics(est, truth)));
    return kExitOk;
  });
}

int cmd_experiment(const ExperimentArgs& args) {
  return guarded("experiment", [&] {
    ExperimentConfig cfg = io::experiment_config_from_json(io::read_json(args.config));
    if (args.parallelism) cfg.parallelism = *args.parallelism;
    if (args.seed) cfg.base_seed = *args.seed;
    if (args.eta) cfg.recovery.eta = *args.eta;
    if (args.gamma) cfg.recovery.solver.gamma = *args.gamma;
    cfg.validate();
    prepare_out_dir(args.out);

    spdlog::info("experiment: {} p={} n={} reps={} parallelism={}", to_string(cfg.generator.design),
                 cfg.generator.p, cfg.n, cfg.reps, cfg.parallelism);
    const auto results = run_replications(cfg);
    for (const auto& r : results) {
      if (!r.ok) spdlog::warn("replication {} failed and is excluded: {}", r.rep, r.error);
    }
    const ExperimentSummary s = io::write_experiment(cfg, results, args.out);
    spdlog::info("mean MCC(Omega) {:.4f}, MCC(B) {:.4f}, SHD {:.2f}", s.mean[2], s.mean[5], s.mean[6]);
    if (2 * s.failed >= cfg.reps) {
      spdlog::error("{} of {} replications failed", s.failed, cfg.reps);
      return kExitPartial;
    }
    return kExitOk;
  });
}

int cmd_check(const CheckArgs& args) {
  return guarded("check", [&] {
    if (!(args.gamma > 0.0)) throw InputError("--gamma must be positive");
    SignConvention convention;
    if (args.sign_convention == "full") {
      convention = SignConvention::kFull;
    } else if (args.sign_convention == "offdiag") {
      convention = SignConvention::kOffDiagonal;
    } else {
      throw InputError("--sign-convention must be full or offdiag");
    }
    const fs::path dir = args.params;
    SemParams params{io::read_matrix(dir / "omega.csv"), io::read_matrix(dir / "b.csv")};
    validate(params);
    const CgFeasibility feas = is_cg_feasible(params);
    if (!feas.feasible) throw InputError("(omega, b) is not chain-graph feasible: " + feas.reason);

    const Matrix lowrank = low_rank_part(params);
    const TangentBases bases = tangent_bases(params.omega, lowrank);
    const TransversalityReport tr = check_transversality(bases);
    const EigenGapReport gaps = check_distinct_eigenvalues(lowrank);

    json report = {{"schema_version", io::kSchemaVersion},
                   {"p", params.p()},
                   {"feasible", true},
                   {"rank", bases.d1.size()},
                   {"transversality",
                    {{"transversal", tr.transversal},
                     {"min_principal_angle", tr.min_principal_angle},
                     {"dim_s", bases.dim_s()},
                     {"dim_t", bases.dim_t()}}},
                   {"eigenvalues",
                    {{"distinct", gaps.distinct},
                     {"min_gap", std::isinf(gaps.min_gap) ? json(nullptr) : json(gaps.min_gap)},
                     {"nonzero", std::vector<double>(gaps.nonzero_eigenvalues.data(),
                                                     gaps.nonzero_eigenvalues.data() +
                                                         gaps.nonzero_eigenvalues.size())}}}};
    bool ok = tr.transversal && gaps.distinct;
    json inc = {{"gamma", args.gamma}, {"sign_convention", args.sign_convention}};
    if (params.p() > args.incoherence_cap) {
      inc["skipped"] = true;
      inc["notice"] = "p = " + std::to_string(params.p()) + " exceeds the incoherence cap of " +
                      std::to_string(args.incoherence_cap);
      spdlog::info("incoherence skipped: p above cap {}", args.incoherence_cap);
    } else if (!tr.transversal) {
      inc["skipped"] = true;
      inc["notice"] = "tangent spaces are not transversal; F is singular";
    } else {
      try {
        const IncoherenceReport r = check_incoherence(params.omega, lowrank, args.gamma, std::nullopt, convention);
        inc["skipped"] = false;
        inc["g_value"] = r.g_value;
        inc["satisfied"] = r.satisfied;
        inc["condition_of_f"] = r.condition_of_f;
        ok = ok && r.satisfied;
      } catch (const NumericalError& e) {
        inc["skipped"] = true;
        inc["notice"] = e.what();
        ok = false;
      }
    }
    report["incoherence"] = inc;
    report["all_passed"] = ok;
    emit(args.out, report);
    return ok ? kExitOk : kExitPartial;
  });
}

}  // namespace chaingraph::cli
