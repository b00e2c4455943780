#pragma once

// Subcommand implementations behind the chaingraph executable. Each returns
// the process exit code: 0 success, 1 partial or statistical failure,
// 2 input error.

#include <cstdint>
#include <optional>
#include <string>

namespace chaingraph::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitInput = 2;

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct FitArgs {
  std::string data;
  std::string config;  // optional recovery config
  std::string out;
  bool center = false;
  std::optional<double> eta;
  std::optional<double> gamma;
};

struct EvalArgs {
  std::string est;
  std::string truth;
  std::string out;  // empty: stdout
};

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::optional<int> parallelism;
  std::optional<std::uint64_t> seed;  // replaces base_seed
  std::optional<double> eta;
  std::optional<double> gamma;
};

struct CheckArgs {
  std::string params;  // directory holding omega.csv and b.csv
  std::string out;     // empty: stdout
  double gamma = 2.0;
  int incoherence_cap = 50;
  std::string sign_convention = "full";
};

/// Sets the log level from CHAINGRAPH_LOG (trace, debug, info, warn, error,
/// critical, off). Unknown values fall back to info with a warning.
void init_logging();

int cmd_simulate(const SimulateArgs& args);
int cmd_fit(const FitArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_experiment(const ExperimentArgs& args);
int cmd_check(const CheckArgs& args);

}  // namespace chaingraph::cli
