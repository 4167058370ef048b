#pragma once

// Reference implementations used only by the tests. Each one takes the most
// direct route available (dense matrices, explicit pair enumeration,
// Floyd-Warshall, recursion) and shares no code with the library paths it
// checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "follownet/graph.hpp"

namespace follownet::oracle {

using EdgeSet = std::set<std::pair<NodeId, NodeId>>;

/// Uniform random simple digraph with up to `m` edges (std::mt19937_64, not the library Rng).
inline std::vector<Edge> random_edges(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  EdgeSet seen;
  std::vector<Edge> out;
  for (std::size_t tries = 0; out.size() < m && tries < 20 * m + 100; ++tries) {
    const NodeId u = pick(eng), v = pick(eng);
    if (u != v && seen.insert({u, v}).second) {
      out.push_back({u, v});
    }
  }
  return out;
}

inline DirectedGraph random_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
  return DirectedGraph::from_edges(n, random_edges(n, m, seed));
}

/// Random graph whose edges all come in both directions.
inline DirectedGraph random_mutual_graph(std::size_t n, std::size_t pairs, std::uint64_t seed) {
  std::vector<Edge> edges;
  for (const Edge& e : random_edges(n, pairs, seed)) {
    edges.push_back(e);
    edges.push_back({e.target, e.source});
  }
  return DirectedGraph::from_edges(n, std::move(edges));
}

inline EdgeSet edge_set(const DirectedGraph& g) {
  EdgeSet s;
  g.for_each_edge([&](NodeId u, NodeId v) { s.insert({u, v}); });
  return s;
}

/// E ∩ E^T by set operations.
inline EdgeSet transpose_intersection(const EdgeSet& e) {
  EdgeSet out;
  for (const auto& [u, v] : e) {
    if (e.count({v, u})) out.insert({u, v});
  }
  return out;
}

/// Two-pass Pearson correlation over paired samples; nullopt on zero variance.
inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

/// r(alpha, beta) by explicit per-edge degree lists. alpha/beta: true = in-degree.
inline std::optional<double> naive_assortativity(const std::vector<Edge>& edges, std::size_t n, bool source_in,
                                                 bool target_in) {
  std::vector<double> indeg(n, 0), outdeg(n, 0);
  for (const Edge& e : edges) {
    outdeg[e.source] += 1;
    indeg[e.target] += 1;
  }
  std::vector<double> s, t;
  for (const Edge& e : edges) {
    s.push_back(source_in ? indeg[e.source] : outdeg[e.source]);
    t.push_back(target_in ? indeg[e.target] : outdeg[e.target]);
  }
  return pearson(s, t);
}

/// All-pairs hop distances by Floyd-Warshall over the undirected adjacency.
/// Returns distance -> ordered pair count (u != v, reachable only).
inline std::map<std::uint32_t, std::uint64_t> floyd_warshall_histogram(const DirectedGraph& g) {
  const std::size_t n = g.node_count();
  constexpr std::uint32_t inf = std::numeric_limits<std::uint32_t>::max() / 4;
  std::vector<std::uint32_t> d(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    d[u * n + v] = 1;
    d[v * n + u] = 1;
  });
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
  std::map<std::uint32_t, std::uint64_t> h;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && d[i * n + j] < inf) ++h[d[i * n + j]];
  return h;
}

/// Dense Google-matrix power iteration for a fixed number of sweeps.
inline Eigen::VectorXd dense_pagerank(const DirectedGraph& g, double damping, int sweeps) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd google = Eigen::MatrixXd::Constant(n, n, (1.0 - damping) / static_cast<double>(n));
  for (Eigen::Index u = 0; u < n; ++u) {
    const auto out = g.out_neighbors(static_cast<NodeId>(u));
    if (out.empty()) {
      google.col(u).array() += damping / static_cast<double>(n);
    } else {
      for (NodeId v : out) google(v, u) += damping / static_cast<double>(out.size());
    }
  }
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int i = 0; i < sweeps; ++i) x = google * x;
  return x / x.sum();
}

/// Generalised Kendall distance by explicit enumeration of unordered pairs of
/// the union, applying the four case rules literally.
inline std::uint64_t kendall_pairs(const std::vector<NodeId>& t1, const std::vector<NodeId>& t2) {
  auto rank = [](const std::vector<NodeId>& t, NodeId x) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] == x) return i;
    return std::nullopt;
  };
  std::vector<NodeId> uni(t1);
  for (NodeId x : t2)
    if (!rank(t1, x)) uni.push_back(x);
  std::uint64_t total = 0;
  for (std::size_t a = 0; a < uni.size(); ++a) {
    for (std::size_t b = a + 1; b < uni.size(); ++b) {
      const NodeId i = uni[a], j = uni[b];
      const auto i1 = rank(t1, i), j1 = rank(t1, j), i2 = rank(t2, i), j2 = rank(t2, j);
      const bool i_both = i1 && i2, j_both = j1 && j2;
      if (i_both && j_both) {
        total += ((*i1 < *j1) != (*i2 < *j2)) ? 1 : 0;  // case 1
      } else if (i_both || j_both) {
        // Case 2 when both share a list; otherwise the exclusive one sits
        // alone in its list together with the shared id.
        const NodeId shared = i_both ? i : j;
        const NodeId lone = i_both ? j : i;
        const auto& holder = rank(t1, lone) ? t1 : t2;
        total += (*rank(holder, shared) < *rank(holder, lone)) ? 0 : 1;
      } else {
        const bool same_list = (i1 && j1) || (i2 && j2);
        total += same_list ? 0 : 1;  // case 4 : case 3
      }
    }
  }
  return total;
}

/// Recursive depth from parent pointers (-1 = root).
inline std::uint32_t recursive_depth(const std::vector<std::int64_t>& parent, std::size_t i) {
  return parent[i] < 0 ? 0 : 1 + recursive_depth(parent, static_cast<std::size_t>(parent[i]));
}

/// Continuity-corrected power-law log-likelihood (the closed-form fit's objective).
inline double corrected_log_likelihood(const std::map<std::uint64_t, std::uint64_t>& h, std::uint64_t xmin,
                                       double alpha) {
  const double s = static_cast<double>(xmin) - 0.5;
  double ll = 0.0;
  for (const auto& [x, c] : h) {
    if (x < xmin) continue;
    ll += static_cast<double>(c) *
          (std::log(alpha - 1.0) - std::log(s) - alpha * std::log(static_cast<double>(x) / s));
  }
  return ll;
}

/// Exhaustive refinement of a 1-D maximiser: coarse grid, then repeated
/// finer grids around the best point.
inline double grid_argmax(const std::function<double(double)>& f, double lo, double hi) {
  double best = lo;
  for (int level = 0; level < 12; ++level) {
    const int steps = 200;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
      const double x = lo + (hi - lo) * i / steps;
      const double v = f(x);
      if (v > best_val) {
        best_val = v;
        best = x;
      }
    }
    const double width = (hi - lo) / steps;
    lo = best - width;
    hi = best + width;
  }
  return best;
}

} // namespace follownet::oracle
