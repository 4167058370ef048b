#include "follownet/separation.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "follownet/error.hpp"
#include "follownet/parallel.hpp"
#include "follownet/random.hpp"

namespace follownet {

namespace {

constexpr const char* kModule = "separation";

constexpr NodeId kIsolated = ~NodeId{0};

/// Non-isolated nodes relabelled in BFS visiting order so that traversals
/// touch nearby memory. Distances are unchanged by the relabelling.
struct LocalGraph {
  std::vector<std::uint64_t> offsets;
  std::vector<NodeId> targets;
  std::vector<NodeId> local;  // global id -> local id or kIsolated
  std::size_t size() const { return offsets.size() - 1; }
};

LocalGraph localize(const DirectedGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<NodeId> by_degree;
  for (NodeId u = 0; u < n; ++u) {
    if (g.out_degree(u) > 0) by_degree.push_back(u);
  }
  std::stable_sort(by_degree.begin(), by_degree.end(),
                   [&](NodeId a, NodeId b) { return g.out_degree(a) > g.out_degree(b); });
  LocalGraph lg;
  lg.local.assign(n, kIsolated);
  std::vector<NodeId> order;
  order.reserve(by_degree.size());
  for (NodeId root : by_degree) {
    if (lg.local[root] != kIsolated) continue;
    lg.local[root] = static_cast<NodeId>(order.size());
    order.push_back(root);
    for (std::size_t head = order.size() - 1; head < order.size(); ++head) {
      for (NodeId v : g.out_neighbors(order[head])) {
        if (lg.local[v] == kIsolated) {
          lg.local[v] = static_cast<NodeId>(order.size());
          order.push_back(v);
        }
      }
    }
  }
  lg.offsets.assign(order.size() + 1, 0);
  lg.targets.reserve(g.edge_count());
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (NodeId v : g.out_neighbors(order[i])) lg.targets.push_back(lg.local[v]);
    lg.offsets[i + 1] = lg.targets.size();
  }
  return lg;
}

/// Reusable BFS state; `stamp` avoids clearing the visited array between runs.
class Bfs {
public:
  explicit Bfs(std::size_t n) : mark_(n, 0), frontier_(), next_() {}

  /// Adds distance counts from `source` into `per_distance` (index = distance).
  /// Returns the number of nodes reached, source excluded.
  std::uint64_t run(const LocalGraph& g, NodeId source, std::vector<std::uint64_t>& per_distance) {
    ++stamp_;
    mark_[source] = stamp_;
    frontier_.assign(1, source);
    std::uint64_t reached = 0;
    for (std::uint32_t depth = 1; !frontier_.empty(); ++depth) {
      next_.clear();
      for (NodeId u : frontier_) {
        for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
          const NodeId v = g.targets[e];
          if (mark_[v] != stamp_) {
            mark_[v] = stamp_;
            next_.push_back(v);
          }
        }
      }
      if (!next_.empty()) {
        if (per_distance.size() <= depth) {
          per_distance.resize(depth + 1, 0);
        }
        per_distance[depth] += next_.size();
        reached += next_.size();
      }
      frontier_.swap(next_);
    }
    return reached;
  }

private:
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<NodeId> frontier_;
  std::vector<NodeId> next_;
};

DistanceHistogram run_from(const DirectedGraph& g, const std::vector<NodeId>& seeds, unsigned threads) {
  const std::size_t n = g.node_count();
  const LocalGraph lg = localize(g);
  const std::size_t blocks = std::min<std::size_t>(seeds.size(), std::max(1u, threads) * 8u);
  std::vector<std::vector<std::uint64_t>> per_block(blocks);
  std::vector<std::uint64_t> reached(blocks, 0);
  parallel_for_blocks(blocks, threads, [&](std::size_t b) {
    Bfs bfs(lg.size());
    const std::size_t begin = seeds.size() * b / blocks;
    const std::size_t end = seeds.size() * (b + 1) / blocks;
    for (std::size_t i = begin; i < end; ++i) {
      if (lg.local[seeds[i]] != kIsolated) {
        reached[b] += bfs.run(lg, lg.local[seeds[i]], per_block[b]);
      }
    }
  });

  DistanceHistogram h;
  h.seed_count = seeds.size();
  std::uint64_t total_reached = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    total_reached += reached[b];
    for (std::size_t d = 1; d < per_block[b].size(); ++d) {
      if (per_block[b][d] != 0) {
        h.counts[static_cast<std::uint32_t>(d)] += per_block[b][d];
      }
    }
  }
  h.unreachable_count = seeds.size() * (n - 1) - total_reached;
  return h;
}

} // namespace

std::uint64_t DistanceHistogram::reachable_pairs() const noexcept {
  std::uint64_t total = 0;
  for (const auto& [d, c] : counts) {
    total += c;
  }
  return total;
}

DistanceHistogram snowball_distances(const DirectedGraph& g, const SnowballOptions& options) {
  const std::size_t n = g.node_count();
  if (options.seed_count < 1 || options.seed_count > n) {
    throw Error(ErrorKind::invalid_argument, kModule,
                "seed count " + std::to_string(options.seed_count) + " must be in [1, " + std::to_string(n) + "]");
  }
  if (!is_symmetric(g)) {
    throw Error(ErrorKind::invalid_structure, kModule,
                "snowball sampling needs a symmetric (mutual-follow) graph");
  }
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  Rng rng(options.rng_seed);
  for (std::size_t i = 0; i < options.seed_count; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(options.seed_count);
  return run_from(g, pool, options.threads);
}

DistanceHistogram all_pairs_distances(const DirectedGraph& g, unsigned threads) {
  if (!is_symmetric(g)) {
    throw Error(ErrorKind::invalid_structure, kModule, "distance histogram needs a symmetric graph");
  }
  std::vector<NodeId> all(g.node_count());
  std::iota(all.begin(), all.end(), NodeId{0});
  if (all.empty()) {
    return {};
  }
  return run_from(g, all, threads);
}

double average_distance(const DistanceHistogram& h) {
  if (h.empty()) {
    throw Error(ErrorKind::empty_input, kModule, "average distance of an empty histogram");
  }
  std::uint64_t weighted = 0;
  std::uint64_t total = 0;
  for (const auto& [d, c] : h.counts) {
    weighted += d * c;
    total += c;
  }
  return static_cast<double>(weighted) / static_cast<double>(total);
}

double effective_diameter(const DistanceHistogram& h, double percentile) {
  if (h.empty()) {
    throw Error(ErrorKind::empty_input, kModule, "effective diameter of an empty histogram");
  }
  if (!(percentile > 0.0 && percentile < 1.0)) {
    throw Error(ErrorKind::invalid_argument, kModule, "percentile must lie in (0, 1)");
  }
  // Work in pair counts: target = p * total, C(d) = pairs at distance <= d.
  const double target = percentile * static_cast<double>(h.reachable_pairs());
  std::uint64_t cumulative = 0;
  for (const auto& [d, c] : h.counts) {
    const std::uint64_t before = cumulative;
    cumulative += c;
    if (static_cast<double>(cumulative) >= target) {
      // Distances missing from the histogram carry the previous cumulative
      // value, so F(d* - 1) is always `before`.
      const double d_interp =
          static_cast<double>(d) - 1.0 + (target - static_cast<double>(before)) / static_cast<double>(c);
      // No pair lies closer than the smallest observed distance.
      return std::max(d_interp, static_cast<double>(h.counts.begin()->first));
    }
  }
  return static_cast<double>(h.counts.rbegin()->first);
}

} // namespace follownet
