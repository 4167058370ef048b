#pragma once

#include <cstdint>
#include <map>

#include "follownet/graph.hpp"

namespace follownet {

/// Distances from sampled seeds to the nodes they reach.
struct DistanceHistogram {
  /// distance (>= 1) -> number of (seed, target) pairs at that distance
  std::map<std::uint32_t, std::uint64_t> counts;
  std::uint64_t seed_count = 0;
  /// (seed, target) pairs with no path, target != seed
  std::uint64_t unreachable_count = 0;

  std::uint64_t reachable_pairs() const noexcept;
  bool empty() const noexcept { return counts.empty(); }
  friend bool operator==(const DistanceHistogram&, const DistanceHistogram&) = default;
};

inline constexpr std::uint32_t kDefaultSeedCount = 8000;

struct SnowballOptions {
  std::uint32_t seed_count = kDefaultSeedCount;
  std::uint64_t rng_seed = 0;
  unsigned threads = 1;
};

/// Breadth-first search from `seed_count` distinct uniformly chosen seeds.
///
/// `g` must be symmetric (the mutual-follow graph); its out-adjacency is
/// traversed as an undirected graph. Seeds are drawn without replacement
/// with a partial Fisher-Yates shuffle driven by `rng_seed`, and every
/// ordered (seed, target) pair with target != seed is counted, seeds
/// included as targets. The result does not depend on `threads`.
DistanceHistogram snowball_distances(const DirectedGraph& g, const SnowballOptions& options);

/// Exact distances from every node (all seeds, no sampling).
DistanceHistogram all_pairs_distances(const DirectedGraph& g, unsigned threads = 1);

/// Mean distance over reachable pairs.
double average_distance(const DistanceHistogram& h);

/// Linearly interpolated percentile of the distance distribution:
/// d = d* - 1 + (p - F(d* - 1)) / (F(d*) - F(d* - 1)), d* the smallest
/// integer with F(d*) >= p, F(0) = 0. Never below the smallest observed
/// distance.
double effective_diameter(const DistanceHistogram& h, double percentile = 0.9);

} // namespace follownet
