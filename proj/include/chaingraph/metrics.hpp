#pragma once

// Edge-recovery metrics between an estimated and a true chain graph.

#include <cmath>
#include <cstdint>
#include <limits>

#include "chaingraph/model.hpp"

namespace chaingraph {

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
};

struct EdgeMetrics {
  double recall_u = 0.0;
  double precision_u = 0.0;
  double mcc_u = 0.0;
  double recall_d = 0.0;
  double precision_d = 0.0;
  double mcc_d = 0.0;
  std::int64_t shd = 0;
  // set when a ratio had a zero denominator (the value is NaN, or 0 for MCC)
  bool recall_u_undefined = false;
  bool precision_u_undefined = false;
  bool mcc_u_undefined = false;
  bool recall_d_undefined = false;
  bool precision_d_undefined = false;
  bool mcc_d_undefined = false;
};

namespace detail {
inline void require_same_p(const ChainGraph& est, const ChainGraph& truth) {
  if (est.p != truth.p) {
    throw InputError("graphs differ in node count (" + std::to_string(est.p) + " vs " +
                     std::to_string(truth.p) + ")");
  }
}

inline Confusion confusion_over(const std::set<Edge>& est, const std::set<Edge>& truth,
                                std::int64_t universe) {
  Confusion c;
  for (const auto& e : est) {
    if (truth.count(e)) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  c.fn = static_cast<std::int64_t>(truth.size()) - c.tp;
  c.tn = universe - c.tp - c.fp - c.fn;
  return c;
}
}  // namespace detail

/// Counts over the p(p-1)/2 unordered pairs.
inline Confusion confusion_undirected(const ChainGraph& est, const ChainGraph& truth) {
  detail::require_same_p(est, truth);
  const std::int64_t p = est.p;
  return detail::confusion_over(est.undirected, truth.undirected, p * (p - 1) / 2);
}

/// Counts over the p(p-1) ordered pairs; orientation must match.
inline Confusion confusion_directed(const ChainGraph& est, const ChainGraph& truth) {
  detail::require_same_p(est, truth);
  const std::int64_t p = est.p;
  return detail::confusion_over(est.directed, truth.directed, p * (p - 1));
}

/// Matthews correlation; 0 when any marginal is empty.
inline double mcc(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn,
                  bool* undefined = nullptr) {
  const double denom = static_cast<double>(tp + fp) * static_cast<double>(tp + fn) *
                       static_cast<double>(tn + fp) * static_cast<double>(tn + fn);
  if (undefined) *undefined = denom == 0.0;
  if (denom == 0.0) return 0.0;
  const double num = static_cast<double>(tp) * static_cast<double>(tn) -
                     static_cast<double>(fp) * static_cast<double>(fn);
  return num / std::sqrt(denom);
}

inline double mcc(const Confusion& c, bool* undefined = nullptr) { return mcc(c.tp, c.fp, c.fn, c.tn, undefined); }

/// Per unordered pair, the relation is one of: none, undirected, i->j, j->i.
/// Each pair where the two graphs disagree costs one edit.
inline std::int64_t shd(const ChainGraph& est, const ChainGraph& truth) {
  detail::require_same_p(est, truth);
  auto relation = [](const ChainGraph& g, int i, int j) {
    if (g.undirected.count({i, j})) return 1;
    if (g.directed.count({i, j})) return 2;
    if (g.directed.count({j, i})) return 3;
    return 0;
  };
  std::int64_t d = 0;
  for (int i = 0; i < est.p; ++i) {
    for (int j = i + 1; j < est.p; ++j) d += relation(est, i, j) != relation(truth, i, j);
  }
  return d;
}

inline EdgeMetrics edge_metrics(const ChainGraph& est, const ChainGraph& truth) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  auto ratio = [&](std::int64_t num, std::int64_t den, bool& undefined) {
    undefined = den == 0;
    return den == 0 ? nan : static_cast<double>(num) / static_cast<double>(den);
  };
  EdgeMetrics m;
  const Confusion u = confusion_undirected(est, truth);
  const Confusion d = confusion_directed(est, truth);
  m.recall_u = ratio(u.tp, u.tp + u.fn, m.recall_u_undefined);
  m.precision_u = ratio(u.tp, u.tp + u.fp, m.precision_u_undefined);
  m.mcc_u = mcc(u, &m.mcc_u_undefined);
  m.recall_d = ratio(d.tp, d.tp + d.fn, m.recall_d_undefined);
  m.precision_d = ratio(d.tp, d.tp + d.fp, m.precision_d_undefined);
  m.mcc_d = mcc(d, &m.mcc_d_undefined);
  m.shd = shd(est, truth);
  return m;
}

}  // namespace chaingraph
