#pragma once

// Random chain-graph generators (two-layer and hub designs) and a Gaussian
// SEM sampler.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "chaingraph/model.hpp"

namespace chaingraph {

enum class Design { kExample1, kExample2 };

inline std::string to_string(Design d) { return d == Design::kExample1 ? "example1" : "example2"; }

inline Design design_from_string(const std::string& s) {
  if (s == "example1" || s == "Example1") return Design::kExample1;
  if (s == "example2" || s == "Example2") return Design::kExample2;
  throw InputError("unknown design '" + s + "' (expected example1 or example2)");
}

struct GenConfig {
  int p = 50;
  Design design = Design::kExample1;
  std::uint64_t seed = 0;
  double undirected_prob = 0.02;
  double directed_prob = 0.8;
  double hub_prob = 0.2;  // hub design only
  double coef_low = 0.5;
  double coef_high = 1.5;
  double diag_slack = 0.1;

  static GenConfig for_design(Design design, int p, std::uint64_t seed) {
    GenConfig cfg;
    cfg.design = design;
    cfg.p = p;
    cfg.seed = seed;
    cfg.undirected_prob = design == Design::kExample1 ? 0.02 : 0.03;
    return cfg;
  }

  void validate() const {
    auto prob = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(name) + " must lie in [0,1]");
    };
    prob(undirected_prob, "undirected_prob");
    prob(directed_prob, "directed_prob");
    prob(hub_prob, "hub_prob");
    if (!(coef_low > 0.0 && coef_low <= coef_high)) throw InputError("need 0 < coef_low <= coef_high");
    if (!(diag_slack > 0.0)) throw InputError("diag_slack must be positive");
    if (p < 2) throw InputError("p must be at least 2");
  }
};

struct SimulatedModel {
  SemParams params;
  ChainGraph graph;
};

namespace detail {

class WeightDraw {
 public:
  WeightDraw(std::mt19937_64& rng, double low, double high) : rng_(rng), magnitude_(low, high) {}

  /// Uniform on [-high, -low] U [low, high].
  double operator()() {
    const double m = magnitude_(rng_);
    return coin_(rng_) ? m : -m;
  }

 private:
  std::mt19937_64& rng_;
  std::uniform_real_distribution<double> magnitude_;
  std::bernoulli_distribution coin_{0.5};
};

/// Strict diagonal dominance: omega_ii = sum_{j != i} |omega_ji| + slack.
inline void set_dominant_diagonal(Matrix& omega, double slack) {
  for (int i = 0; i < omega.rows(); ++i) {
    omega(i, i) = 0.0;
    omega(i, i) = omega.col(i).cwiseAbs().sum() + slack;
  }
}

inline SimulatedModel finish(Matrix omega, Matrix b, double slack) {
  set_dominant_diagonal(omega, slack);
  SimulatedModel out{{std::move(omega), std::move(b)}, {}};
  out.graph = graph_of(out.params);
  return out;
}

}  // namespace detail

/// Size of the first layer of the two-layer design: floor(0.1 p), at least 1.
inline int first_layer_size(int p) { return std::max(1, static_cast<int>(std::floor(0.1 * p))); }

/// Two layers {1..a} and {a+1..p}; undirected edges within layers, directed
/// edges from the first layer to the second.
inline SimulatedModel gen_example1(const GenConfig& cfg) {
  cfg.validate();
  if (cfg.design != Design::kExample1) throw InputError("gen_example1 requires design example1");
  const int p = cfg.p;
  const int a = first_layer_size(p);
  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution undirected(cfg.undirected_prob);
  std::bernoulli_distribution directed(cfg.directed_prob);
  detail::WeightDraw weight(rng, cfg.coef_low, cfg.coef_high);

  Matrix omega = Matrix::Zero(p, p);
  Matrix b = Matrix::Zero(p, p);
  auto layer = [a](int v) { return v < a ? 0 : 1; };
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (layer(i) == layer(j) && undirected(rng)) omega(i, j) = omega(j, i) = weight();
    }
  }
  const auto components = chain_components(undirected_support(omega), p);
  const auto of = detail::membership(components, p);
  for (int parent = 0; parent < a; ++parent) {
    for (int child = a; child < p; ++child) {
      if (directed(rng) && of[parent] != of[child]) b(child, parent) = weight();
    }
  }
  return detail::finish(std::move(omega), std::move(b), cfg.diag_slack);
}

/// Random undirected graph, components ordered by smallest node, hub nodes
/// pointing into every later component.
inline SimulatedModel gen_example2(const GenConfig& cfg) {
  cfg.validate();
  if (cfg.design != Design::kExample2) throw InputError("gen_example2 requires design example2");
  const int p = cfg.p;
  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution undirected(cfg.undirected_prob);
  std::bernoulli_distribution hub(cfg.hub_prob);
  std::bernoulli_distribution directed(cfg.directed_prob);
  detail::WeightDraw weight(rng, cfg.coef_low, cfg.coef_high);

  Matrix omega = Matrix::Zero(p, p);
  Matrix b = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (undirected(rng)) omega(i, j) = omega(j, i) = weight();
    }
  }
  const auto components = chain_components(undirected_support(omega), p);
  const int m = static_cast<int>(components.size());
  for (int k = 0; k < m; ++k) {
    for (int h : components[k]) {
      if (!hub(rng)) continue;
      for (int later = k + 1; later < m; ++later) {
        for (int child : components[later]) {
          if (directed(rng)) b(child, h) = weight();
        }
      }
    }
  }
  return detail::finish(std::move(omega), std::move(b), cfg.diag_slack);
}

inline SimulatedModel generate(const GenConfig& cfg) {
  return cfg.design == Design::kExample1 ? gen_example1(cfg) : gen_example2(cfg);
}

/// Omega^{-1/2} through the symmetric eigendecomposition.
inline Matrix inverse_sqrt_spd(const Matrix& a) {
  const linalg::SymEig eig = linalg::sym_eig(linalg::symmetrize(a));
  if (!(eig.values(0) > 0.0)) throw NumericalError("matrix is not positive definite");
  return linalg::compose(eig.vectors, eig.values.cwiseSqrt().cwiseInverse());
}

/// n i.i.d. rows x = (I - B)^{-1} Omega^{-1/2} z with z standard normal.
inline Matrix sample_data(const SemParams& params, int n, std::uint64_t seed) {
  if (n < 1) throw InputError("n must be at least 1");
  const int p = params.p();
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(p, p) - params.b);
  if (!lu.isInvertible()) throw NumericalError("I - B is singular");
  const Matrix mix = lu.inverse() * inverse_sqrt_spd(params.omega);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, p);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < p; ++c) z(r, c) = normal(rng);
  }
  return z * mix.transpose();
}

}  // namespace chaingraph
