#pragma once

// File formats. Matrices are headerless comma-separated text with 17
// significant digits; graphs and configs are JSON. All node indices in files
// are 1-based.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>  // vendored nlohmann/json

#include "chaingraph/metrics.hpp"
#include "chaingraph/recovery.hpp"
#include "chaingraph/simulate.hpp"

namespace chaingraph::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline Matrix matrix_from_csv(const std::string& text, const std::string& origin = "csv") {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == begin || *end != '\0') {
        throw InputError(origin + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(origin + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(origin + ": empty matrix");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

inline Matrix read_matrix(const std::filesystem::path& path) { return matrix_from_csv(read_text(path), path.string()); }

inline void write_matrix(const std::filesystem::path& path, const Matrix& m) { write_text(path, matrix_to_csv(m)); }

inline json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Graphs: {"schema_version": 1, "p": int, "undirected": [[i,j],...] (i<j),
//          "directed": [[parent,child],...]}, 1-based, sorted.

inline json graph_to_json(const ChainGraph& g) {
  json undirected = json::array();
  for (const auto& [i, j] : g.undirected) undirected.push_back({i + 1, j + 1});
  json directed = json::array();
  for (const auto& [a, b] : g.directed) directed.push_back({a + 1, b + 1});
  return {{"schema_version", kSchemaVersion}, {"p", g.p}, {"undirected", undirected}, {"directed", directed}};
}

inline ChainGraph graph_from_json(const json& j) {
  try {
    ChainGraph g;
    g.p = j.at("p").get<int>();
    if (g.p < 1) throw InputError("graph p must be positive");
    auto node = [&](const json& v) {
      const int x = v.get<int>();
      if (x < 1 || x > g.p) throw InputError("graph node " + std::to_string(x) + " out of range 1.." + std::to_string(g.p));
      return x - 1;
    };
    for (const auto& e : j.at("undirected")) {
      if (e.size() != 2) throw InputError("undirected edge must have two nodes");
      const int a = node(e[0]);
      const int b = node(e[1]);
      if (a == b) throw InputError("self loop in undirected edges");
      g.undirected.emplace(std::min(a, b), std::max(a, b));
    }
    for (const auto& e : j.at("directed")) {
      if (e.size() != 2) throw InputError("directed edge must have two nodes");
      const int a = node(e[0]);
      const int b = node(e[1]);
      if (a == b) throw InputError("self loop in directed edges");
      g.directed.emplace(a, b);
    }
    g.components = chain_components(g.undirected, g.p);
    g.ordering = component_order(g.components, g.directed, g.p);
    return g;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed graph JSON: ") + e.what());
  }
}

inline json metrics_to_json(const EdgeMetrics& m) {
  auto ratio = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  return {{"schema_version", kSchemaVersion},
          {"recall_omega", ratio(m.recall_u)},
          {"precision_omega", ratio(m.precision_u)},
          {"mcc_omega", m.mcc_u},
          {"recall_b", ratio(m.recall_d)},
          {"precision_b", ratio(m.precision_d)},
          {"mcc_b", m.mcc_d},
          {"shd", m.shd},
          {"undefined",
           {{"recall_omega", m.recall_u_undefined},
            {"precision_omega", m.precision_u_undefined},
            {"mcc_omega", m.mcc_u_undefined},
            {"recall_b", m.recall_d_undefined},
            {"precision_b", m.precision_d_undefined},
            {"mcc_b", m.mcc_d_undefined}}}};
}

// ---------------------------------------------------------------------------
// Configs

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  if (!j.is_object()) throw InputError(std::string(where) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw InputError(std::string("unknown key '") + item.key() + "' in " + where);
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace detail

/// Generator settings; probabilities default per design.
inline GenConfig gen_config_from_json(const json& j) {
  try {
    const Design design = design_from_string(j.at("design").get<std::string>());
    const int p = j.at("p").get<int>();
    GenConfig cfg = GenConfig::for_design(design, p, j.value("seed", std::uint64_t{0}));
    detail::read_if(j, "undirected_prob", cfg.undirected_prob);
    detail::read_if(j, "directed_prob", cfg.directed_prob);
    detail::read_if(j, "hub_prob", cfg.hub_prob);
    detail::read_if(j, "coef_low", cfg.coef_low);
    detail::read_if(j, "coef_high", cfg.coef_high);
    detail::read_if(j, "diag_slack", cfg.diag_slack);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed generator config: ") + e.what());
  }
}

inline json gen_config_to_json(const GenConfig& cfg) {
  return {{"design", to_string(cfg.design)},       {"p", cfg.p},
          {"seed", cfg.seed},                      {"undirected_prob", cfg.undirected_prob},
          {"directed_prob", cfg.directed_prob},    {"hub_prob", cfg.hub_prob},
          {"coef_low", cfg.coef_low},              {"coef_high", cfg.coef_high},
          {"diag_slack", cfg.diag_slack}};
}

inline SolverConfig solver_config_from_json(const json& j, SolverConfig cfg = {}) {
  detail::reject_unknown(j, {"gamma", "mu", "rho", "delta", "outer_tol", "inner_tol", "max_outer", "max_inner"},
                         "solver config");
  detail::read_if(j, "gamma", cfg.gamma);
  detail::read_if(j, "mu", cfg.mu);
  detail::read_if(j, "rho", cfg.rho);
  detail::read_if(j, "delta", cfg.delta);
  detail::read_if(j, "outer_tol", cfg.outer_tol);
  detail::read_if(j, "inner_tol", cfg.inner_tol);
  detail::read_if(j, "max_outer", cfg.max_outer);
  detail::read_if(j, "max_inner", cfg.max_inner);
  return cfg;
}

/// {"eta", "gamma", "lambda", "kappa", "nu", "center", "solver": {...}}
inline RecoveryConfig recovery_config_from_json(const json& j) {
  try {
    detail::reject_unknown(j, {"eta", "gamma", "lambda", "kappa", "nu", "center", "solver"}, "recovery config");
    RecoveryConfig cfg;
    detail::read_if(j, "eta", cfg.eta);
    detail::read_if(j, "center", cfg.center);
    if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
    if (j.contains("kappa")) cfg.kappa = j.at("kappa").get<double>();
    if (j.contains("nu")) cfg.nu = j.at("nu").get<double>();
    if (j.contains("solver")) cfg.solver = solver_config_from_json(j.at("solver"), cfg.solver);
    detail::read_if(j, "gamma", cfg.solver.gamma);
    cfg.validate();
    cfg.solver.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed recovery config: ") + e.what());
  }
}

inline json recovery_config_to_json(const RecoveryConfig& cfg) {
  json j = {{"eta", cfg.eta},
            {"gamma", cfg.solver.gamma},
            {"center", cfg.center},
            {"solver",
             {{"mu", cfg.solver.mu},
              {"rho", cfg.solver.rho},
              {"delta", cfg.solver.delta},
              {"outer_tol", cfg.solver.outer_tol},
              {"inner_tol", cfg.solver.inner_tol},
              {"max_outer", cfg.solver.max_outer},
              {"max_inner", cfg.solver.max_inner}}}};
  if (cfg.lambda) j["lambda"] = *cfg.lambda;
  if (cfg.kappa) j["kappa"] = *cfg.kappa;
  if (cfg.nu) j["nu"] = *cfg.nu;
  return j;
}

}  // namespace chaingraph::io
