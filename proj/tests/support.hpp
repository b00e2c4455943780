#pragma once

// Random instances shared by the unit and acceptance tests.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "chaingraph/model.hpp"

namespace cgtest {

using chaingraph::Matrix;
using chaingraph::NodeSet;
using chaingraph::SemParams;
using chaingraph::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = z(rng);
  }
  return m;
}

inline Matrix random_symmetric(std::mt19937_64& rng, int p) {
  const Matrix a = random_matrix(rng, p, p);
  return 0.5 * (a + a.transpose());
}

/// Wishart-like SPD matrix with eigenvalues bounded away from zero.
inline Matrix random_spd(std::mt19937_64& rng, int p, double ridge = 0.1) {
  const Matrix a = random_matrix(rng, p, p + 2);
  return a * a.transpose() / (p + 2) + ridge * Matrix::Identity(p, p);
}

/// Uniform on [-high,-low] u [low,high].
inline double signed_weight(std::mt19937_64& rng, double low = 0.5, double high = 1.5) {
  std::uniform_real_distribution<double> mag(low, high);
  std::bernoulli_distribution neg(0.5);
  const double v = mag(rng);
  return neg(rng) ? -v : v;
}

/// A random CG-feasible pair with its component partition and one
/// topological order of the components (indices into `components`).
struct RandomChainGraph {
  SemParams params;
  std::vector<NodeSet> components;
  std::vector<int> order;
  std::vector<std::vector<int>> parents;  // component-level parent sets
};

/// Nodes are shuffled into m random components; each component is connected
/// by a random spanning tree plus extra edges; directed edges go from earlier
/// to later components of a random order.
inline RandomChainGraph random_chain_graph(std::mt19937_64& rng, int p, double extra_edge_prob = 0.3,
                                           double directed_prob = 0.4) {
  RandomChainGraph g;
  const int m = std::uniform_int_distribution<int>(1, p)(rng);
  std::vector<int> nodes(p);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  // every component gets one node, the rest land uniformly
  std::vector<int> owner(p);
  for (int k = 0; k < p; ++k) owner[nodes[k]] = k < m ? k : std::uniform_int_distribution<int>(0, m - 1)(rng);
  std::vector<NodeSet> comps(m);
  for (int v = 0; v < p; ++v) comps[owner[v]].push_back(v);

  Matrix omega = Matrix::Zero(p, p);
  std::bernoulli_distribution extra(extra_edge_prob);
  for (const NodeSet& c : comps) {
    for (std::size_t k = 1; k < c.size(); ++k) {
      const int other = c[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)];
      omega(c[k], other) = omega(other, c[k]) = signed_weight(rng);
    }
    for (std::size_t a = 0; a < c.size(); ++a) {
      for (std::size_t b = a + 1; b < c.size(); ++b) {
        if (omega(c[a], c[b]) == 0.0 && extra(rng)) omega(c[a], c[b]) = omega(c[b], c[a]) = signed_weight(rng);
      }
    }
  }
  for (int i = 0; i < p; ++i) omega(i, i) = omega.col(i).cwiseAbs().sum() + 0.1;

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix b = Matrix::Zero(p, p);
  std::bernoulli_distribution directed(directed_prob);
  g.parents.assign(m, {});
  for (int later = 0; later < m; ++later) {
    for (int earlier = 0; earlier < later; ++earlier) {
      bool any = false;
      for (int child : comps[order[later]]) {
        for (int parent : comps[order[earlier]]) {
          if (directed(rng)) {
            b(child, parent) = signed_weight(rng);
            any = true;
          }
        }
      }
      if (any) g.parents[order[later]].push_back(order[earlier]);
    }
  }
  g.params = {omega, b};
  // renumber components the same way the library does (by smallest node)
  g.components = chaingraph::chain_components(chaingraph::undirected_support(omega), p);
  std::vector<int> remap(m);
  for (int c = 0; c < m; ++c) {
    for (int k = 0; k < m; ++k) {
      if (g.components[k] == comps[c]) remap[c] = k;
    }
  }
  for (int k = 0; k < m; ++k) g.order.push_back(remap[order[k]]);
  std::vector<std::vector<int>> parents(m);
  for (int c = 0; c < m; ++c) {
    for (int q : g.parents[c]) parents[remap[c]].push_back(remap[q]);
  }
  g.parents = parents;
  return g;
}

/// True when `order` places every component after all components that send
/// it a directed edge.
inline bool is_topological(const std::vector<int>& order, const std::vector<std::vector<int>>& parents) {
  std::vector<int> pos(order.size(), -1);
  for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<int>(k);
  for (std::size_t c = 0; c < parents.size(); ++c) {
    if (pos[c] < 0) return false;
    for (int q : parents[c]) {
      if (pos[q] < 0 || pos[q] >= pos[c]) return false;
    }
  }
  return true;
}

inline NodeSet union_of(const std::vector<NodeSet>& components, const std::vector<int>& which) {
  NodeSet out;
  for (int c : which) out.insert(out.end(), components[c].begin(), components[c].end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cgtest
