#pragma once

// Chain-graph recovery from data: sparse-plus-low-rank fit, component
// ordering by conditional-variance gaps, and directed coefficients through
// blockwise regression, truncated SVD and hard thresholding.

#include <cmath>
#include <optional>
#include <vector>

#include "chaingraph/admm.hpp"
#include "chaingraph/model.hpp"

namespace chaingraph {

struct RecoveryConfig {
  double eta = 0.125;
  std::optional<double> lambda;  // default n^{-1/2 + eta}
  std::optional<double> kappa;   // default n^{-1/2 + eta}
  std::optional<double> nu;      // default n^{-1/2 + 2 eta}
  bool center = false;
  SolverConfig solver{};  // lambda is overwritten by the resolved value

  void validate() const {
    if (!(eta > 0.0 && eta < 0.25)) throw InputError("eta must lie in (0, 1/4)");
    if (lambda && !(*lambda > 0.0)) throw InputError("lambda must be positive");
    if (kappa && !(*kappa > 0.0)) throw InputError("kappa must be positive");
    if (nu && !(*nu > 0.0)) throw InputError("nu must be positive");
  }
  double lambda_for(int n) const { return lambda.value_or(std::pow(n, -0.5 + eta)); }
  double kappa_for(int n) const { return kappa.value_or(std::pow(n, -0.5 + eta)); }
  double nu_for(int n) const { return nu.value_or(std::pow(n, -0.5 + 2.0 * eta)); }
};

struct OrderedComponents {
  std::vector<NodeSet> components;
  std::vector<int> pi_hat;   // component indices in selection order
  std::vector<double> gaps;  // gap value at each selection
};

/// Counts conditioning blocks that needed an eigenvalue floor.
struct RecoveryWarnings {
  int ill_conditioned = 0;
};

/// Ties in the greedy argmin: values within this relative margin count as equal.
inline constexpr double kOrderTieTol = 1e-12;

/// max_{i in tau} { S_ii - S_iC S_CC^{-1} S_Ci - (Omega^{-1})_ii }.
/// `omega_inv_diag[i]` holds (Omega^{-1})_ii for every node.
inline double d_hat(const Matrix& sigma_hat, const Vector& omega_inv_diag, const NodeSet& tau,
                    const NodeSet& cond, RecoveryWarnings* warnings = nullptr) {
  detail::require_disjoint(tau, cond, static_cast<int>(sigma_hat.rows()));
  double best = -std::numeric_limits<double>::infinity();
  if (cond.empty()) {
    for (int i : tau) best = std::max(best, sigma_hat(i, i) - omega_inv_diag(i));
    return best;
  }
  const auto inv = linalg::inv_spd_floored(linalg::block(sigma_hat, cond, cond));
  if (inv.floored && warnings) ++warnings->ill_conditioned;
  const Matrix s_tc = linalg::block(sigma_hat, tau, cond);
  const Vector explained = (s_tc * inv.inverse).cwiseProduct(s_tc).rowwise().sum();
  for (std::size_t k = 0; k < tau.size(); ++k) {
    const int i = tau[k];
    best = std::max(best, sigma_hat(i, i) - explained(k) - omega_inv_diag(i));
  }
  return best;
}

inline NodeSet merge_nodes(NodeSet a, const NodeSet& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

/// Greedy ordering: repeatedly pick the unselected component with the
/// smallest gap given the union of those already selected.
inline OrderedComponents order_components(const Matrix& sigma_hat, const Matrix& omega_hat,
                                          const std::vector<NodeSet>& components,
                                          RecoveryWarnings* warnings = nullptr) {
  const int m = static_cast<int>(components.size());
  const Vector omega_inv_diag = linalg::inv_spd_floored(omega_hat).inverse.diagonal();
  OrderedComponents out;
  out.components = components;
  std::vector<char> used(m, 0);
  NodeSet selected;
  for (int step = 0; step < m; ++step) {
    int best = -1;
    double best_gap = 0.0;
    for (int c = 0; c < m; ++c) {
      if (used[c]) continue;
      const double gap = d_hat(sigma_hat, omega_inv_diag, components[c], selected, warnings);
      if (best < 0 || gap < best_gap - kOrderTieTol * (1.0 + std::abs(best_gap))) {
        best = c;
        best_gap = gap;
      }
    }
    used[best] = 1;
    out.pi_hat.push_back(best);
    out.gaps.push_back(best_gap);
    selected = merge_nodes(std::move(selected), components[best]);
  }
  return out;
}

/// Blockwise regression: rows of the k-th selected component on the columns
/// of all earlier ones get S_{tau,C} S_CC^{-1}; everything else is zero.
inline Matrix estimate_b_reg(const Matrix& sigma_hat, const OrderedComponents& ordered,
                             RecoveryWarnings* warnings = nullptr) {
  const Eigen::Index p = sigma_hat.rows();
  Matrix b = Matrix::Zero(p, p);
  NodeSet before;
  for (std::size_t k = 0; k < ordered.pi_hat.size(); ++k) {
    const NodeSet& tau = ordered.components[ordered.pi_hat[k]];
    if (!before.empty()) {
      const auto inv = linalg::inv_spd_floored(linalg::block(sigma_hat, before, before));
      if (inv.floored && warnings) ++warnings->ill_conditioned;
      const Matrix coef = linalg::block(sigma_hat, tau, before) * inv.inverse;
      for (std::size_t r = 0; r < tau.size(); ++r) {
        for (std::size_t c = 0; c < before.size(); ++c) b(tau[r], before[c]) = coef(r, c);
      }
    }
    before = merge_nodes(std::move(before), tau);
  }
  return b;
}

/// Drops singular values <= kappa and rebuilds from the original vectors.
inline Matrix truncate_svd(const Matrix& b_reg, double kappa) {
  if (!(kappa >= 0.0)) throw InputError("kappa must be nonnegative");
  if (b_reg.size() == 0) return b_reg;
  Eigen::JacobiSVD<Matrix> svd(b_reg, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector s = svd.singularValues();
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (s(j) <= kappa) s(j) = 0.0;
  }
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

/// Zeroes the diagonal and upper blocks in selection order, then
/// hard-thresholds the rest at nu.
inline Matrix finalize_b(const Matrix& b_svd, const OrderedComponents& ordered, double nu) {
  if (!(nu >= 0.0)) throw InputError("nu must be nonnegative");
  const int p = static_cast<int>(b_svd.rows());
  std::vector<int> rank(p, -1);
  for (std::size_t k = 0; k < ordered.pi_hat.size(); ++k) {
    for (int v : ordered.components[ordered.pi_hat[k]]) rank[v] = static_cast<int>(k);
  }
  Matrix b = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (rank[j] < rank[i] && std::abs(b_svd(i, j)) > nu) b(i, j) = b_svd(i, j);
    }
  }
  return b;
}

inline Matrix empirical_covariance(const Matrix& x, bool center) {
  if (center) {
    const Matrix xc = x.rowwise() - x.colwise().mean();
    return linalg::symmetrize(xc.transpose() * xc / static_cast<double>(x.rows()));
  }
  return linalg::symmetrize(x.transpose() * x / static_cast<double>(x.rows()));
}

struct ChainGraphEstimate {
  PrecisionDecomposition fit;
  Matrix sigma_hat;
  OrderedComponents ordered;
  Matrix b_reg;
  Matrix b_hat;
  ChainGraph graph;
  double lambda = 0.0;
  double kappa = 0.0;
  double nu = 0.0;
  RecoveryWarnings warnings;
};

/// Full pipeline on an n x p data matrix.
inline ChainGraphEstimate learn_chain_graph(const Matrix& x, const RecoveryConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (n < 2 || p < 2) throw InputError("need at least 2 samples and 2 variables");
  if (!x.allFinite()) throw InputError("data contain NaN or Inf");

  ChainGraphEstimate est;
  est.lambda = cfg.lambda_for(n);
  est.kappa = cfg.kappa_for(n);
  est.nu = cfg.nu_for(n);
  est.sigma_hat = empirical_covariance(x, cfg.center);

  SolverConfig solver = cfg.solver;
  solver.lambda = est.lambda;
  est.fit = fit_sparse_lowrank(est.sigma_hat, solver);

  est.graph.p = p;
  est.graph.undirected = undirected_support(est.fit.omega);
  est.graph.components = chain_components(est.graph.undirected, p);
  est.ordered = order_components(est.sigma_hat, est.fit.omega, est.graph.components, &est.warnings);
  est.b_reg = estimate_b_reg(est.sigma_hat, est.ordered, &est.warnings);
  est.b_hat = finalize_b(truncate_svd(est.b_reg, est.kappa), est.ordered, est.nu);
  est.graph.directed = directed_support(est.b_hat, 0.0);
  est.graph.ordering = est.ordered.pi_hat;
  return est;
}

}  // namespace chaingraph
