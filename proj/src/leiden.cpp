#include "propgraph/leiden.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>

#include "propgraph/error.hpp"

namespace propgraph {

namespace {

constexpr double kGainEpsilon = 1e-12;

void add_half(std::vector<std::pair<std::size_t, double>>& list, std::size_t to, double w) {
  for (auto& [n, weight] : list) {
    if (n == to) {
      weight += w;
      return;
    }
  }
  list.emplace_back(to, w);
}

// Fisher-Yates with raw engine draws so the order does not depend on the
// standard library's distribution implementation.
std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

// Labels renumbered 0.. by first occurrence.
std::size_t renumber(std::vector<std::size_t>& labels) {
  std::vector<std::size_t> map;
  std::vector<bool> seen;
  std::size_t next = 0;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto l = labels[i];
    if (l >= map.size()) {
      map.resize(l + 1);
      seen.resize(l + 1, false);
    }
    if (!seen[l]) {
      seen[l] = true;
      map[l] = next++;
    }
    out[i] = map[l];
  }
  labels.swap(out);
  return next;
}

struct Degrees {
  std::vector<double> k;
  double two_m = 0.0;
};

Degrees degrees(const WeightedGraph& g) {
  Degrees d;
  d.k.resize(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    d.k[v] = g.degree(v);
    d.two_m += d.k[v];
  }
  return d;
}

// Weight from v to each neighboring label (self-loops excluded), in first-seen order.
class LabelWeights {
 public:
  explicit LabelWeights(std::size_t n) : w_(n, 0.0), seen_(n, false) {}

  template <typename LabelOf>
  void gather(const WeightedGraph& g, std::size_t v, LabelOf label_of) {
    for (const auto l : touched_) {
      w_[l] = 0.0;
      seen_[l] = false;
    }
    touched_.clear();
    for (const auto& [u, w] : g.neighbors(v)) {
      if (u == v) continue;
      const auto l = label_of(u);
      if (l == kSkip) continue;
      if (!seen_[l]) {
        seen_[l] = true;
        touched_.push_back(l);
      }
      w_[l] += w;
    }
  }
  void ensure(std::size_t l) {
    if (l >= w_.size()) {
      w_.resize(l + 1, 0.0);
      seen_.resize(l + 1, false);
    }
  }

  const std::vector<std::size_t>& labels() const { return touched_; }
  double weight(std::size_t l) const { return l < w_.size() && seen_[l] ? w_[l] : 0.0; }

  static constexpr std::size_t kSkip = static_cast<std::size_t>(-1);

 private:
  std::vector<double> w_;
  std::vector<bool> seen_;
  std::vector<std::size_t> touched_;
};

// Fast local moving. Returns true when any node changed community.
bool move_nodes(const WeightedGraph& g, const Degrees& deg, std::vector<std::size_t>& part,
                double gamma, std::mt19937_64& rng) {
  const std::size_t n = g.size();
  std::vector<double> total(n, 0.0);
  std::vector<std::size_t> members(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    total[part[v]] += deg.k[v];
    ++members[part[v]];
  }
  std::vector<std::size_t> empty;
  for (std::size_t c = n; c-- > 0;) {
    if (members[c] == 0) empty.push_back(c);
  }

  std::deque<std::size_t> queue;
  std::vector<bool> queued(n, true);
  for (const auto v : shuffled(n, rng)) queue.push_back(v);

  LabelWeights lw(n);
  bool changed = false;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    queued[v] = false;
    const auto own = part[v];
    lw.gather(g, v, [&](std::size_t u) { return part[u]; });

    total[own] -= deg.k[v];
    --members[own];
    const double scale = gamma * deg.k[v] / deg.two_m;
    std::size_t best = own;
    double best_gain = lw.weight(own) - scale * total[own];
    for (const auto c : lw.labels()) {
      if (c == own) continue;
      const double gain = lw.weight(c) - scale * total[c];
      if (gain > best_gain + kGainEpsilon) {
        best_gain = gain;
        best = c;
      }
    }
    // an empty community scores zero
    if (best_gain < -kGainEpsilon && members[own] > 0 && !empty.empty()) {
      best = empty.back();
      empty.pop_back();
    } else if (best != own && members[own] == 0) {
      empty.push_back(own);
    }

    total[best] += deg.k[v];
    ++members[best];
    if (best != own) {
      part[v] = best;
      changed = true;
      for (const auto& [u, w] : g.neighbors(v)) {
        if (!queued[u] && part[u] != best) {
          queued[u] = true;
          queue.push_back(u);
        }
      }
    }
  }
  return changed;
}

// Refinement: merge singletons inside each community into well-connected
// sub-communities, taking the best positive modularity gain.
std::vector<std::size_t> refine(const WeightedGraph& g, const Degrees& deg,
                                const std::vector<std::size_t>& part, double gamma,
                                std::mt19937_64& rng) {
  const std::size_t n = g.size();
  std::vector<std::size_t> refined(n);
  std::iota(refined.begin(), refined.end(), 0);
  std::vector<double> ref_total(deg.k);
  std::vector<std::size_t> ref_size(n, 1);
  std::vector<double> ref_ext(n, 0.0);
  std::vector<double> node_ext(n, 0.0);
  std::vector<double> comm_total(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    comm_total[part[v]] += deg.k[v];
    for (const auto& [u, w] : g.neighbors(v)) {
      if (u != v && part[u] == part[v]) node_ext[v] += w;
    }
    ref_ext[v] = node_ext[v];
  }

  LabelWeights lw(n);
  for (const auto v : shuffled(n, rng)) {
    if (ref_size[refined[v]] != 1) continue;
    const double ks = comm_total[part[v]];
    if (node_ext[v] < gamma * deg.k[v] * (ks - deg.k[v]) / deg.two_m) continue;
    lw.gather(g, v, [&](std::size_t u) {
      return part[u] == part[v] ? refined[u] : LabelWeights::kSkip;
    });
    const double scale = gamma * deg.k[v] / deg.two_m;
    std::size_t best = refined[v];
    double best_gain = kGainEpsilon;
    for (const auto c : lw.labels()) {
      if (c == refined[v]) continue;
      if (ref_ext[c] < gamma * ref_total[c] * (ks - ref_total[c]) / deg.two_m) continue;
      const double gain = lw.weight(c) - scale * ref_total[c];
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best == refined[v]) continue;
    const auto old = refined[v];
    const double w_vc = lw.weight(best);
    ref_ext[best] = ref_ext[best] + node_ext[v] - 2.0 * w_vc;
    ref_total[best] += deg.k[v];
    ++ref_size[best];
    ref_total[old] = 0.0;
    ref_size[old] = 0;
    refined[v] = best;
  }
  renumber(refined);
  return refined;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<std::size_t>& labels,
                        std::size_t count) {
  std::vector<WeightedGraph::Edge> edges;
  for (std::size_t v = 0; v < g.size(); ++v) {
    for (const auto& [u, w] : g.neighbors(v)) {
      if (u < v) continue;
      edges.push_back({labels[v], labels[u], w});
    }
  }
  return WeightedGraph::from_edges(count, std::move(edges));
}

}  // namespace

WeightedGraph WeightedGraph::from_edges(std::size_t n, std::vector<Edge> edges) {
  for (auto& e : edges) {
    if (e.u >= n || e.v >= n) throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  WeightedGraph g(n);
  for (std::size_t i = 0; i < edges.size();) {
    double w = 0.0;
    std::size_t j = i;
    for (; j < edges.size() && edges[j].u == edges[i].u && edges[j].v == edges[i].v; ++j) {
      w += edges[j].w;
    }
    g.adj_[edges[i].u].emplace_back(edges[i].v, w);
    if (edges[i].u != edges[i].v) g.adj_[edges[i].v].emplace_back(edges[i].u, w);
    i = j;
  }
  return g;
}

void WeightedGraph::add_edge(std::size_t u, std::size_t v, double w) {
  if (u >= adj_.size() || v >= adj_.size()) {
    throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
  }
  add_half(adj_[u], v, w);
  if (u != v) add_half(adj_[v], u, w);
}

double WeightedGraph::degree(std::size_t v) const {
  double d = 0.0;
  for (const auto& [u, w] : adj_[v]) d += u == v ? 2.0 * w : w;
  return d;
}

double WeightedGraph::total_weight() const {
  double t = 0.0;
  for (std::size_t v = 0; v < adj_.size(); ++v) {
    for (const auto& [u, w] : adj_[v]) {
      if (u >= v) t += w;
    }
  }
  return t;
}

double modularity(const WeightedGraph& g, const std::vector<std::size_t>& membership,
                  double gamma) {
  const double m = g.total_weight();
  if (m <= 0.0) return 0.0;
  const std::size_t c = membership.empty() ? 0 : *std::max_element(membership.begin(), membership.end()) + 1;
  std::vector<double> inside(c, 0.0);
  std::vector<double> total(c, 0.0);
  for (std::size_t v = 0; v < g.size(); ++v) {
    total[membership[v]] += g.degree(v);
    for (const auto& [u, w] : g.neighbors(v)) {
      if (u >= v && membership[u] == membership[v]) inside[membership[v]] += w;
    }
  }
  double q = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double share = total[i] / (2.0 * m);
    q += inside[i] / m - gamma * share * share;
  }
  return q;
}

std::vector<std::size_t> leiden(const WeightedGraph& g, const LeidenOptions& options) {
  const std::size_t n = g.size();
  std::vector<std::size_t> labels(n);
  std::iota(labels.begin(), labels.end(), 0);
  if (n == 0 || g.total_weight() <= 0.0) return labels;

  std::mt19937_64 rng(options.seed);
  WeightedGraph current = g;
  std::vector<std::size_t> node_of(n);  // original node -> node of `current`
  std::iota(node_of.begin(), node_of.end(), 0);
  std::vector<std::size_t> part(n);
  std::iota(part.begin(), part.end(), 0);

  for (std::size_t round = 0; round < options.max_rounds; ++round) {
    const auto deg = degrees(current);
    move_nodes(current, deg, part, options.resolution, rng);
    const std::size_t communities = renumber(part);
    if (communities == current.size()) break;

    auto refined = refine(current, deg, part, options.resolution, rng);
    const std::size_t refined_count =
        refined.empty() ? 0 : *std::max_element(refined.begin(), refined.end()) + 1;
    if (refined_count == current.size()) break;

    std::vector<std::size_t> next_part(refined_count);
    for (std::size_t v = 0; v < current.size(); ++v) next_part[refined[v]] = part[v];
    for (auto& x : node_of) x = refined[x];
    current = aggregate(current, refined, refined_count);
    part = std::move(next_part);
  }

  for (std::size_t v = 0; v < n; ++v) labels[v] = part[node_of[v]];
  renumber(labels);
  return labels;
}

std::vector<std::vector<std::size_t>> hierarchical_leiden(const WeightedGraph& g,
                                                          std::size_t max_size,
                                                          const LeidenOptions& options,
                                                          std::size_t max_levels) {
  std::vector<std::vector<std::size_t>> levels;
  if (g.size() == 0) return levels;
  levels.push_back(leiden(g, options));

  while (levels.size() < max_levels) {
    const auto& prev = levels.back();
    const std::size_t count = *std::max_element(prev.begin(), prev.end()) + 1;
    std::vector<std::vector<std::size_t>> members(count);
    for (std::size_t v = 0; v < prev.size(); ++v) members[prev[v]].push_back(v);

    std::vector<std::size_t> next(prev.size());
    std::size_t label = 0;
    bool changed = false;
    std::vector<std::size_t> local(g.size(), 0);
    for (const auto& nodes : members) {
      std::vector<std::size_t> sub_labels(nodes.size(), 0);
      if (nodes.size() > max_size) {
        std::vector<bool> inside(g.size(), false);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          inside[nodes[i]] = true;
          local[nodes[i]] = i;
        }
        std::vector<WeightedGraph::Edge> edges;
        for (const auto v : nodes) {
          for (const auto& [u, w] : g.neighbors(v)) {
            if (u >= v && inside[u]) edges.push_back({local[v], local[u], w});
          }
        }
        sub_labels = leiden(WeightedGraph::from_edges(nodes.size(), std::move(edges)), options);
      }
      const std::size_t parts = *std::max_element(sub_labels.begin(), sub_labels.end()) + 1;
      if (parts > 1) changed = true;
      for (std::size_t i = 0; i < nodes.size(); ++i) next[nodes[i]] = label + sub_labels[i];
      label += parts;
    }
    if (!changed) break;
    renumber(next);
    levels.push_back(std::move(next));
  }
  return levels;
}

}  // namespace propgraph
