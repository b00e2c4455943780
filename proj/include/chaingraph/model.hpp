#pragma once

// Chain-graph model objects: SEM parameters (Omega, B), the mixed graph they
// encode, feasibility, and exact population moments.
//
// Convention: B(i, j) != 0 means a directed edge j -> i (x = B x + eps).

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chaingraph/linalg.hpp"

namespace chaingraph {

using Edge = std::pair<int, int>;

/// Noise precision Omega and SEM coefficients B of x = B x + eps,
/// eps ~ N(0, Omega^{-1}).
struct SemParams {
  Matrix omega;
  Matrix b;

  int p() const { return static_cast<int>(omega.rows()); }
};

/// Mixed graph with undirected edges inside chain components and directed
/// edges between them. Indices are zero-based.
struct ChainGraph {
  int p = 0;
  std::set<Edge> undirected;  // (i, j), i < j
  std::set<Edge> directed;    // (parent, child)
  std::vector<NodeSet> components;
  std::optional<std::vector<int>> ordering;  // indices into components

  bool same_edges(const ChainGraph& other) const {
    return p == other.p && undirected == other.undirected && directed == other.directed;
  }
};

struct PopulationMoments {
  Matrix sigma;
  Matrix theta;
  Matrix total_effects;  // (I - B)^{-1}
};

struct CgFeasibility {
  bool feasible = false;
  std::vector<NodeSet> components;
  std::vector<int> order;  // topological order of components when feasible
  std::string reason;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

inline void require_node(int node, int p) {
  if (node < 0 || node >= p) {
    throw InputError("node index " + std::to_string(node + 1) + " out of range 1.." + std::to_string(p));
  }
}

/// component id of each node
inline std::vector<int> membership(const std::vector<NodeSet>& components, int p) {
  std::vector<int> of(p, -1);
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (int v : components[c]) of[v] = static_cast<int>(c);
  }
  return of;
}

}  // namespace detail

/// Connected components of the undirected graph on p nodes. Components are
/// sorted by their smallest node; nodes inside a component are ascending.
template <typename EdgeRange>
std::vector<NodeSet> chain_components(const EdgeRange& edges, int p) {
  if (p < 0) throw InputError("node count must be nonnegative");
  detail::DisjointSets sets(p);
  for (const auto& [i, j] : edges) {
    detail::require_node(i, p);
    detail::require_node(j, p);
    sets.unite(i, j);
  }
  std::vector<NodeSet> components;
  std::vector<int> slot(p, -1);
  for (int v = 0; v < p; ++v) {
    const int root = sets.find(v);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(components.size());
      components.emplace_back();
    }
    components[slot[root]].push_back(v);
  }
  return components;
}

/// Undirected support {i < j : |omega_ij| > tol}.
inline std::set<Edge> undirected_support(const Matrix& omega, double tol = kSupportTol) {
  std::set<Edge> edges;
  for (int i = 0; i < omega.rows(); ++i) {
    for (int j = i + 1; j < omega.cols(); ++j) {
      if (std::abs(omega(i, j)) > tol || std::abs(omega(j, i)) > tol) edges.emplace(i, j);
    }
  }
  return edges;
}

/// Directed support {(parent j, child i) : |b_ij| > tol}.
inline std::set<Edge> directed_support(const Matrix& b, double tol = kSupportTol) {
  std::set<Edge> edges;
  for (int i = 0; i < b.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      if (i != j && std::abs(b(i, j)) > tol) edges.emplace(j, i);
    }
  }
  return edges;
}

/// Topological order of components under the given directed edges, smallest
/// available component first. Empty optional if an edge stays inside a
/// component or the component digraph has a cycle; `reason` says which.
inline std::optional<std::vector<int>> component_order(const std::vector<NodeSet>& components,
                                                       const std::set<Edge>& directed, int p,
                                                       std::string* reason = nullptr) {
  const std::vector<int> of = detail::membership(components, p);
  const int m = static_cast<int>(components.size());
  std::vector<std::set<int>> succ(m);
  for (const auto& [parent, child] : directed) {
    if (of[parent] == of[child]) {
      if (reason) {
        *reason = "directed edge " + std::to_string(parent + 1) + "->" + std::to_string(child + 1) +
                  " lies inside a chain component";
      }
      return std::nullopt;
    }
    succ[of[parent]].insert(of[child]);
  }
  std::vector<int> indegree(m, 0);
  for (const auto& s : succ) {
    for (int c : s) ++indegree[c];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int c = 0; c < m; ++c) {
    if (indegree[c] == 0) ready.push(c);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    const int c = ready.top();
    ready.pop();
    order.push_back(c);
    for (int d : succ[c]) {
      if (--indegree[d] == 0) ready.push(d);
    }
  }
  if (static_cast<int>(order.size()) != m) {
    if (reason) *reason = "chain components form a directed cycle";
    return std::nullopt;
  }
  return order;
}

/// Checks shapes, symmetry and positive definiteness of Omega and the zero
/// diagonal of B. Feasibility is checked separately.
inline void validate(const SemParams& params) {
  linalg::require_symmetric(params.omega, 1e-12, "omega");
  linalg::require_square(params.b, "b");
  if (params.b.rows() != params.omega.rows()) throw InputError("omega and b differ in size");
  if (!params.b.allFinite()) throw InputError("b has non-finite entries");
  if (params.b.diagonal().cwiseAbs().maxCoeff() > 0.0) throw InputError("b must have zero diagonal");
  if (params.p() > 0 && !(linalg::sym_eig(params.omega).values(0) > 0.0)) {
    throw InputError("omega is not positive definite");
  }
}

/// Reads components from the support of Omega and checks that B only
/// connects distinct components acyclically.
inline CgFeasibility is_cg_feasible(const SemParams& params, double tol = kSupportTol) {
  linalg::require_symmetric(params.omega, 1e-12, "omega");
  linalg::require_square(params.b, "b");
  if (params.b.rows() != params.omega.rows()) throw InputError("omega and b differ in size");
  const int p = params.p();
  CgFeasibility out;
  out.components = chain_components(undirected_support(params.omega, tol), p);
  for (int i = 0; i < p; ++i) {
    if (std::abs(params.b(i, i)) > tol) {
      out.reason = "b has a nonzero diagonal entry at node " + std::to_string(i + 1);
      return out;
    }
  }
  auto order = component_order(out.components, directed_support(params.b, tol), p, &out.reason);
  if (order) {
    out.feasible = true;
    out.order = std::move(*order);
  }
  return out;
}

/// Graph encoded by the supports of (Omega, B), with a component ordering when
/// the pair is feasible.
inline ChainGraph graph_of(const SemParams& params, double tol = kSupportTol) {
  ChainGraph g;
  g.p = params.p();
  g.undirected = undirected_support(params.omega, tol);
  g.directed = directed_support(params.b, tol);
  g.components = chain_components(g.undirected, g.p);
  g.ordering = component_order(g.components, g.directed, g.p);
  return g;
}

/// Checks the structural invariants of a chain graph; empty string if valid.
inline std::string check_graph(const ChainGraph& g) {
  const std::vector<int> of = detail::membership(g.components, g.p);
  if (std::find(of.begin(), of.end(), -1) != of.end()) return "components do not cover all nodes";
  std::size_t covered = 0;
  for (const auto& c : g.components) covered += c.size();
  if (covered != static_cast<std::size_t>(g.p)) return "components overlap";
  for (const auto& [i, j] : g.undirected) {
    if (i >= j) return "undirected edge not stored as (i<j)";
    if (of[i] != of[j]) return "undirected edge spans two components";
  }
  for (const auto& [a, b] : g.directed) {
    if (of[a] == of[b]) return "directed edge inside a component";
    if (g.directed.count({b, a})) return "edge pair carries both orientations";
    if (g.undirected.count({std::min(a, b), std::max(a, b)})) return "pair has both edge types";
  }
  if (g.ordering) {
    const auto& ord = *g.ordering;
    if (ord.size() != g.components.size()) return "ordering length differs from component count";
    std::vector<int> rank(ord.size(), -1);
    for (std::size_t k = 0; k < ord.size(); ++k) {
      if (ord[k] < 0 || ord[k] >= static_cast<int>(ord.size()) || rank[ord[k]] >= 0) {
        return "ordering is not a permutation";
      }
      rank[ord[k]] = static_cast<int>(k);
    }
    for (const auto& [a, b] : g.directed) {
      if (rank[of[a]] >= rank[of[b]]) return "ordering is not topological";
    }
  }
  return {};
}

/// Theta = (I - B)^T Omega (I - B)
inline Matrix precision_of(const SemParams& params) {
  const Matrix ib = Matrix::Identity(params.p(), params.p()) - params.b;
  return linalg::symmetrize(ib.transpose() * params.omega * ib);
}

/// L = B^T Omega B - B^T Omega - Omega B, so that Theta = Omega + L.
inline Matrix low_rank_part(const SemParams& params) {
  const Matrix& b = params.b;
  const Matrix& w = params.omega;
  return linalg::symmetrize(b.transpose() * w * b - b.transpose() * w - w * b);
}

inline PopulationMoments covariance_of(const SemParams& params) {
  const int p = params.p();
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(p, p) - params.b);
  if (!lu.isInvertible()) throw NumericalError("I - B is singular");
  PopulationMoments m;
  m.total_effects = lu.inverse();
  const Matrix noise_cov = linalg::inv_spd(params.omega);
  m.sigma = linalg::symmetrize(m.total_effects * noise_cov * m.total_effects.transpose());
  m.theta = precision_of(params);
  return m;
}

namespace detail {

inline void require_disjoint(const NodeSet& tau, const NodeSet& cond, int p) {
  if (tau.empty()) throw InputError("tau must be nonempty");
  std::vector<char> seen(p, 0);
  for (int v : tau) {
    require_node(v, p);
    seen[v] = 1;
  }
  for (int v : cond) {
    require_node(v, p);
    if (seen[v]) throw InputError("tau and conditioning set overlap at node " + std::to_string(v + 1));
  }
}

}  // namespace detail

/// Sigma_{tau,tau} - Sigma_{tau,C} Sigma_{C,C}^{-1} Sigma_{C,tau} for a given
/// covariance matrix.
inline Matrix conditional_cov(const Matrix& sigma, const NodeSet& tau, const NodeSet& cond) {
  const Matrix s_tt = linalg::block(sigma, tau, tau);
  if (cond.empty()) return s_tt;
  const Matrix s_tc = linalg::block(sigma, tau, cond);
  const Matrix s_cc_inv = linalg::inv_spd(linalg::block(sigma, cond, cond));
  return linalg::symmetrize(s_tt - s_tc * s_cc_inv * s_tc.transpose());
}

/// Cov(x_tau | x_cond) under the population distribution (Schur complement).
inline Matrix population_conditional_cov(const SemParams& params, const NodeSet& tau,
                                         const NodeSet& cond) {
  detail::require_disjoint(tau, cond, params.p());
  return conditional_cov(covariance_of(params).sigma, tau, cond);
}

/// Same quantity through total effects: sum over every component tau_j not in
/// the conditioning set of A_{tau,tau_j} (Omega^{-1})_{tau_j,tau_j} A_{tau,tau_j}^T.
/// Valid when `cond` is a union of components closed under taking parents.
inline Matrix population_conditional_cov_by_effects(const SemParams& params, const NodeSet& tau,
                                                    const NodeSet& cond,
                                                    const std::vector<NodeSet>& components) {
  const int p = params.p();
  detail::require_disjoint(tau, cond, p);
  const PopulationMoments m = covariance_of(params);
  const Matrix noise_cov = linalg::inv_spd(params.omega);
  std::vector<char> in_cond(p, 0);
  for (int v : cond) in_cond[v] = 1;
  Matrix out = Matrix::Zero(tau.size(), tau.size());
  for (const NodeSet& comp : components) {
    if (comp.empty() || in_cond[comp.front()]) continue;
    const Matrix a = linalg::block(m.total_effects, tau, comp);
    out += a * linalg::block(noise_cov, comp, comp) * a.transpose();
  }
  return linalg::symmetrize(out);
}

/// max_{i in tau} Var(x_i | x_cond) - (Omega^{-1})_{ii}. Zero exactly when
/// every parent of tau is in `cond`, positive otherwise.
inline double population_order_gap(const SemParams& params, const NodeSet& tau, const NodeSet& cond) {
  const Matrix cc = population_conditional_cov(params, tau, cond);
  const Matrix noise_cov = linalg::inv_spd(params.omega);
  double gap = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < tau.size(); ++k) {
    gap = std::max(gap, cc(k, k) - noise_cov(tau[k], tau[k]));
  }
  return gap;
}

}  // namespace chaingraph
