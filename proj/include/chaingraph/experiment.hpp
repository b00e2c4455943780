#pragma once

// Replicated simulate -> sample -> fit -> evaluate runs, and their summary.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "chaingraph/io.hpp"
#include "chaingraph/metrics.hpp"
#include "chaingraph/recovery.hpp"
#include "chaingraph/simulate.hpp"

namespace chaingraph {

struct ExperimentConfig {
  GenConfig generator;  // design, p and probabilities; seed is replaced per replication
  int n = 1000;
  int reps = 50;
  std::uint64_t base_seed = 0;
  int parallelism = 1;
  RecoveryConfig recovery;

  void validate() const {
    generator.validate();
    if (reps < 1) throw InputError("reps must be at least 1");
    if (n < 2) throw InputError("n must be at least 2");
    if (parallelism < 1) throw InputError("parallelism must be at least 1");
    recovery.validate();
    recovery.solver.validate();
  }
};

struct ReplicationResult {
  int rep = 0;
  std::uint64_t graph_seed = 0;
  std::uint64_t data_seed = 0;
  bool ok = false;
  std::string error;
  EdgeMetrics metrics;
  bool converged = false;
  int iterations = 0;
  bool exact_undirected = false;  // estimated undirected edge set equals the truth
  bool exact_graph = false;
};

/// Column means and standard errors over successful replications. Ratios
/// that were undefined in a replication (zero denominator) are left out of
/// that column; `counts` records how many values entered each column.
struct ExperimentSummary {
  static constexpr int kColumns = 7;
  static constexpr const char* kNames[kColumns] = {"recall_omega", "precision_omega", "mcc_omega", "recall_b",
                                                   "precision_b",  "mcc_b",           "shd"};
  double mean[kColumns] = {};
  double se[kColumns] = {};
  int counts[kColumns] = {};
  int succeeded = 0;
  int failed = 0;
  double exact_undirected_rate = 0.0;
  double exact_graph_rate = 0.0;
};

/// Mixes a replication seed into an independent stream for the data draw.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline ReplicationResult run_replication(const ExperimentConfig& cfg, int rep) {
  ReplicationResult r;
  r.rep = rep;
  r.graph_seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
  r.data_seed = splitmix64(r.graph_seed);
  try {
    GenConfig gen = cfg.generator;
    gen.seed = r.graph_seed;
    const SimulatedModel truth = generate(gen);
    const Matrix x = sample_data(truth.params, cfg.n, r.data_seed);
    const ChainGraphEstimate est = learn_chain_graph(x, cfg.recovery);
    r.metrics = edge_metrics(est.graph, truth.graph);
    r.converged = est.fit.converged;
    r.iterations = est.fit.iterations;
    r.exact_undirected = est.graph.undirected == truth.graph.undirected;
    r.exact_graph = est.graph.same_edges(truth.graph);
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

/// Runs all replications on `cfg.parallelism` workers. Results are indexed by
/// replication, so the output does not depend on scheduling.
inline std::vector<ReplicationResult> run_replications(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ReplicationResult> results(cfg.reps);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int rep = next++; rep < cfg.reps; rep = next++) results[rep] = run_replication(cfg, rep);
  };
  const int workers = std::min(cfg.parallelism, cfg.reps);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

inline ExperimentSummary summarize(const std::vector<ReplicationResult>& results) {
  ExperimentSummary s;
  std::vector<double> columns[ExperimentSummary::kColumns];
  int exact_u = 0;
  int exact_g = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++s.failed;
      continue;
    }
    ++s.succeeded;
    exact_u += r.exact_undirected;
    exact_g += r.exact_graph;
    const EdgeMetrics& m = r.metrics;
    const double values[ExperimentSummary::kColumns] = {
        m.recall_u, m.precision_u, m.mcc_u, m.recall_d, m.precision_d, m.mcc_d, static_cast<double>(m.shd)};
    for (int c = 0; c < ExperimentSummary::kColumns; ++c) {
      if (!std::isnan(values[c])) columns[c].push_back(values[c]);
    }
  }
  for (int c = 0; c < ExperimentSummary::kColumns; ++c) {
    const auto& v = columns[c];
    s.counts[c] = static_cast<int>(v.size());
    if (v.empty()) {
      s.mean[c] = s.se[c] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean[c] = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean[c]) * (x - s.mean[c]);
    s.se[c] = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
  }
  if (s.succeeded > 0) {
    s.exact_undirected_rate = static_cast<double>(exact_u) / s.succeeded;
    s.exact_graph_rate = static_cast<double>(exact_g) / s.succeeded;
  }
  return s;
}

namespace io {

inline json replication_to_json(const ReplicationResult& r) {
  json j = {{"schema_version", kSchemaVersion}, {"rep", r.rep},   {"graph_seed", r.graph_seed},
            {"data_seed", r.data_seed},         {"ok", r.ok}};
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["metrics"] = metrics_to_json(r.metrics);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["exact_undirected"] = r.exact_undirected;
  j["exact_graph"] = r.exact_graph;
  return j;
}

/// Header plus one "mean" and one "se" row, columns in table order.
inline std::string summary_to_csv(const ExperimentSummary& s) {
  std::string out = "stat";
  for (const char* name : ExperimentSummary::kNames) out += std::string(",") + name;
  out += ",succeeded,failed,exact_undirected_rate,exact_graph_rate\n";
  auto row = [&](const char* label, const double* values) {
    out += label;
    for (int c = 0; c < ExperimentSummary::kColumns; ++c) out += "," + format_double(values[c]);
    out += "," + std::to_string(s.succeeded) + "," + std::to_string(s.failed) + "," +
           format_double(s.exact_undirected_rate) + "," + format_double(s.exact_graph_rate) + "\n";
  };
  row("mean", s.mean);
  row("se", s.se);
  return out;
}

inline json summary_to_json(const ExperimentSummary& s) {
  json cols = json::object();
  for (int c = 0; c < ExperimentSummary::kColumns; ++c) {
    auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    cols[ExperimentSummary::kNames[c]] = {{"mean", num(s.mean[c])}, {"se", num(s.se[c])}, {"count", s.counts[c]}};
  }
  return {{"schema_version", kSchemaVersion}, {"columns", cols},
          {"succeeded", s.succeeded},         {"failed", s.failed},
          {"exact_undirected_rate", s.exact_undirected_rate},
          {"exact_graph_rate", s.exact_graph_rate}};
}

/// {"design", "p", "n", "reps", "base_seed", "parallelism", "recovery": {...},
///  plus optional generator probabilities}
inline ExperimentConfig experiment_config_from_json(const json& j) {
  try {
    detail::reject_unknown(j,
                           {"design", "p", "n", "reps", "base_seed", "parallelism", "recovery", "undirected_prob",
                            "directed_prob", "hub_prob", "coef_low", "coef_high", "diag_slack"},
                           "experiment config");
    ExperimentConfig cfg;
    json gen = j;
    gen.erase("n");
    gen.erase("reps");
    gen.erase("base_seed");
    gen.erase("parallelism");
    gen.erase("recovery");
    cfg.generator = gen_config_from_json(gen);
    cfg.n = j.at("n").get<int>();
    detail::read_if(j, "reps", cfg.reps);
    detail::read_if(j, "base_seed", cfg.base_seed);
    detail::read_if(j, "parallelism", cfg.parallelism);
    if (j.contains("recovery")) cfg.recovery = recovery_config_from_json(j.at("recovery"));
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed experiment config: ") + e.what());
  }
}

inline json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j = gen_config_to_json(cfg.generator);
  j.erase("seed");
  j["n"] = cfg.n;
  j["reps"] = cfg.reps;
  j["base_seed"] = cfg.base_seed;
  j["parallelism"] = cfg.parallelism;
  j["recovery"] = recovery_config_to_json(cfg.recovery);
  return j;
}

/// Writes rep_NNN.json for every replication plus summary.csv and
/// summary.json into `out_dir`.
inline ExperimentSummary write_experiment(const ExperimentConfig& cfg, const std::vector<ReplicationResult>& results,
                                          const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& r : results) {
    char name[32];
    std::snprintf(name, sizeof name, "rep_%03d.json", r.rep);
    write_json(out_dir / name, replication_to_json(r));
  }
  const ExperimentSummary s = summarize(results);
  write_text(out_dir / "summary.csv", summary_to_csv(s));
  json sj = summary_to_json(s);
  sj["config"] = experiment_config_to_json(cfg);
  write_json(out_dir / "summary.json", sj);
  return s;
}

}  // namespace io
}  // namespace chaingraph
