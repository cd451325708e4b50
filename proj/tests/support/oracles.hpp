#pragma once

// Dense reference implementations. They share no code with the library beyond
// the graph accessors and are kept deliberately naive.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "propgraph/global_mode.hpp"
#include "propgraph/graph.hpp"
#include "propgraph/leiden.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense matmul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  const std::size_t m = k == 0 ? 0 : b[0].size();
  Dense out = zeros(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][t] * b[t][j];
  return out;
}

inline void zero_diagonal_and_renormalize(Dense& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i][i] = 0.0;
    double s = 0.0;
    for (double v : m[i]) s += v;
    if (s > 0.0)
      for (double& v : m[i]) v /= s;
  }
}

/// T_s over every proposition of a finalized graph, from the edge list alone.
/// Hubs are passages and entities; column h of A(p->eP) is hub h.
inline Dense structural(const propgraph::HeteroGraph& g) {
  using propgraph::NodeKind;
  const std::size_t np = g.proposition_count();
  const std::size_t nh = g.passage_count() + g.entity_count();
  const auto hub_col = [&](propgraph::NodeId h) {
    return h.kind == NodeKind::Passage ? h.index : g.passage_count() + h.index;
  };
  Dense adj = zeros(np, nh);
  for (const auto& [p, h] : g.edges()) adj[p.index][hub_col(h)] = 1.0;

  Dense p_to_h = adj;
  for (auto& row : p_to_h) {
    double deg = 0.0;
    for (double v : row) deg += v;
    if (deg > 0)
      for (double& v : row) v /= deg;
  }
  Dense h_to_p = zeros(nh, np);
  for (std::size_t h = 0; h < nh; ++h) {
    double deg = 0.0;
    for (std::size_t p = 0; p < np; ++p) deg += adj[p][h];
    for (std::size_t p = 0; p < np; ++p)
      if (deg > 0) h_to_p[h][p] = adj[p][h] / deg;
  }
  Dense ts = matmul(p_to_h, h_to_p);
  zero_diagonal_and_renormalize(ts);
  return ts;
}

struct Semantic {
  Dense matrix;
  std::vector<bool> fallback;
};

/// exp(c_j / tau) for c_j >= theta on the support of each T_s row, normalized;
/// a row left with no weight copies the T_s row.
inline Semantic semantic(const Dense& ts, const std::vector<double>& c, double tau, double theta) {
  const std::size_t n = ts.size();
  Semantic out{zeros(n, n), std::vector<bool>(n, false)};
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (ts[i][j] > 0.0 && c[j] >= theta) {
        out.matrix[i][j] = std::exp(c[j] / tau);
        z += out.matrix[i][j];
      }
    }
    if (z > 0.0) {
      for (double& v : out.matrix[i]) v /= z;
    } else {
      bool any = false;
      for (std::size_t j = 0; j < n; ++j) any = any || ts[i][j] > 0.0;
      if (any) {
        out.matrix[i] = ts[i];
        out.fallback[i] = true;
      }
    }
  }
  return out;
}

inline Dense blend(const Dense& a, const Dense& b, double lambda) {
  Dense out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out[i][j] = lambda * a[i][j] + (1.0 - lambda) * b[i][j];
  return out;
}

/// Dense power iteration of pi <- d M^T pi + (1 - d) r, dangling rows teleporting to r.
inline std::vector<double> ppr(const Dense& m, const std::vector<std::uint32_t>& seeds, double d,
                               double tol = 1e-14, int max_iters = 100000) {
  const std::size_t n = m.size();
  std::set<std::uint32_t> s(seeds.begin(), seeds.end());
  std::vector<double> r(n, 0.0);
  for (auto i : s) r[i] = 1.0 / static_cast<double>(s.size());
  std::vector<double> pi = r;
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> next(n, 0.0);
    double lost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += m[i][j];
      if (row == 0.0) lost += pi[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += m[i][j] * pi[i];
      next[j] = d * acc + ((1.0 - d) + d * lost) * r[j];
    }
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff += std::abs(next[j] - pi[j]);
    pi = next;
    if (diff < tol) break;
  }
  return pi;
}

/// Newman-Girvan modularity: sum over communities of L_c / W - gamma (D_c / 2W)^2.
inline double modularity(std::size_t n, const std::vector<propgraph::WeightedGraph::Edge>& edges,
                         const std::vector<std::size_t>& membership, double gamma = 1.0) {
  double w = 0.0;
  std::vector<double> deg(n, 0.0);
  std::map<std::size_t, double> inner;
  std::map<std::size_t, double> total;
  for (const auto& e : edges) {
    w += e.w;
    deg[e.u] += e.w;
    deg[e.v] += e.w;
    if (membership[e.u] == membership[e.v]) inner[membership[e.u]] += e.w;
  }
  for (std::size_t v = 0; v < n; ++v) total[membership[v]] += deg[v];
  double q = 0.0;
  for (const auto& [c, d] : total) {
    q += inner[c] / w - gamma * (d / (2.0 * w)) * (d / (2.0 * w));
  }
  return q;
}

/// Replays the greedy pick: at every step, score all remaining candidates as
/// new-anchors / size in floating point (equal ratios round identically), pick
/// the maximum, break ties by size then id. Stops when every coverable anchor is
/// covered or the budget is reached.
inline std::vector<std::size_t> greedy_communities(const std::vector<propgraph::NodeId>& anchors,
                                                   const std::vector<propgraph::Community>& cands,
                                                   std::size_t budget) {
  const std::set<propgraph::NodeId> a(anchors.begin(), anchors.end());
  std::set<propgraph::NodeId> coverable;
  for (const auto& c : cands)
    for (const auto& n : c.nodes)
      if (a.contains(n)) coverable.insert(n);
  std::set<propgraph::NodeId> covered;
  std::vector<std::size_t> picked;
  std::size_t used = 0;
  std::set<std::size_t> remaining;
  for (std::size_t i = 0; i < cands.size(); ++i) remaining.insert(i);
  while (covered != coverable && used < budget && !remaining.empty()) {
    std::vector<std::pair<double, std::size_t>> scored;
    for (const auto i : remaining) {
      std::size_t fresh = 0;
      for (const auto& n : cands[i].nodes) fresh += (a.contains(n) && !covered.contains(n)) ? 1 : 0;
      scored.emplace_back(static_cast<double>(fresh) / static_cast<double>(cands[i].nodes.size()), i);
    }
    const auto best = *std::max_element(scored.begin(), scored.end(), [&](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first < y.first;
      const auto sx = cands[x.second].nodes.size();
      const auto sy = cands[y.second].nodes.size();
      if (sx != sy) return sx > sy;
      return cands[x.second].id > cands[y.second].id;
    });
    picked.push_back(best.second);
    remaining.erase(best.second);
    used += cands[best.second].nodes.size();
    for (const auto& n : cands[best.second].nodes)
      if (a.contains(n)) covered.insert(n);
  }
  return picked;
}

}  // namespace oracle
