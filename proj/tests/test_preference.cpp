#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "follownet/error.hpp"
#include "follownet/preference.hpp"
#include "follownet/synthgen.hpp"
#include "support/oracles.hpp"

using namespace follownet;

namespace {

ScoreVector in_degrees(const DirectedGraph& g, double offset = 0.0) {
  ScoreVector s(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) s[u] = g.in_degree(u) + offset;
  return s;
}

DirectedGraph reversed(const DirectedGraph& g) {
  std::vector<Edge> edges;
  g.for_each_edge([&](NodeId u, NodeId v) { edges.push_back({v, u}); });
  return DirectedGraph::from_edges(g.node_count(), std::move(edges));
}

std::vector<std::uint64_t> follower_counts(const DirectedGraph& g) {
  std::vector<std::uint64_t> f(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) f[u] = g.in_degree(u);
  return f;
}

} // namespace

TEST(Assortativity, ZeroVarianceSourceOutDegree) {
  const auto g = DirectedGraph::from_edges(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}});
  const auto p = assortativity_profile(g);
  EXPECT_FALSE(p.out_in.has_value());
  EXPECT_FALSE(p.out_out.has_value());
  EXPECT_FALSE(p.r(Direction::out, Direction::in).has_value());
}

TEST(Assortativity, ThreeCycleAllUndefined) {
  const auto p = assortativity_profile(DirectedGraph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}}));
  EXPECT_FALSE(p.in_in || p.in_out || p.out_in || p.out_out);
}

TEST(Assortativity, TooFewEdges) {
  EXPECT_THROW(assortativity_profile(DirectedGraph::from_edges(3, {{0, 1}})), Error);
}

TEST(Assortativity, MatchesNaivePearsonOnRandomGraphs) {
  std::mt19937_64 eng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + eng() % 181;
    const std::size_t m = n + eng() % (4 * n);
    const auto edges = oracle::random_edges(n, m, 1000 + trial);
    const auto g = DirectedGraph::from_edges(n, edges);
    const auto p = assortativity_profile(g);
    for (bool src_in : {true, false}) {
      for (bool dst_in : {true, false}) {
        const auto expected = oracle::naive_assortativity(edges, n, src_in, dst_in);
        const auto got = p.r(src_in ? Direction::in : Direction::out, dst_in ? Direction::in : Direction::out);
        ASSERT_EQ(got.has_value(), expected.has_value());
        if (got) {
          EXPECT_NEAR(*got, *expected, 1e-9);
          EXPECT_GE(*got, -1.0);
          EXPECT_LE(*got, 1.0);
        }
      }
    }
  }
}

TEST(Assortativity, PermutationInvariant) {
  const std::size_t n = 150;
  const auto edges = oracle::random_edges(n, 900, 5);
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(6));
  std::vector<Edge> relabelled;
  for (const Edge& e : edges) relabelled.push_back({perm[e.source], perm[e.target]});
  const auto a = assortativity_profile(DirectedGraph::from_edges(n, edges));
  const auto b = assortativity_profile(DirectedGraph::from_edges(n, relabelled));
  EXPECT_DOUBLE_EQ(*a.in_in, *b.in_in);
  EXPECT_DOUBLE_EQ(*a.in_out, *b.in_out);
  EXPECT_DOUBLE_EQ(*a.out_in, *b.out_in);
  EXPECT_DOUBLE_EQ(*a.out_out, *b.out_out);
}

TEST(Ebr, RatioOfTwo) {
  // in-degrees: node 0 has 4 followers, node 1 has 8.
  std::vector<Edge> edges{{0, 1}};
  for (NodeId f = 2; f < 6; ++f) edges.push_back({f, 0});
  for (NodeId f = 2; f < 9; ++f) edges.push_back({f, 1});
  const auto g = DirectedGraph::from_edges(9, edges);
  ASSERT_EQ(g.in_degree(0), 4u);
  ASSERT_EQ(g.in_degree(1), 8u);
  const auto h = edge_balance_histogram(g, EbrMetric::in_degree);
  const auto k = ebr_bin_index(2.0, 10);
  EXPECT_EQ(k, 3);  // log10(2) * 10 = 3.01
  EXPECT_EQ(h.bins.at(k), 1u);
  EXPECT_LE(h.bin_low(k), 2.0);
  EXPECT_GT(h.bin_high(k), 2.0);
  // Edges from the zero-follower nodes 2..8.
  EXPECT_EQ(h.infinite_count, 11u);
  EXPECT_EQ(h.total(), g.edge_count());
}

TEST(Ebr, MutualPairInUnitBin) {
  const auto h = edge_balance_histogram(DirectedGraph::from_edges(2, {{0, 1}, {1, 0}}), EbrMetric::in_degree);
  EXPECT_EQ(h.bins, (std::map<std::int64_t, std::uint64_t>{{0, 2}}));
  EXPECT_EQ(h.infinite_count, 0u);
}

TEST(Ebr, ZeroAndInfiniteBins) {
  // Edge targets always have a follower, so a zero ratio needs an explicit metric.
  const auto g = DirectedGraph::from_edges(3, {{1, 0}, {2, 1}});
  const ScoreVector metric = (ScoreVector(3) << 0.0, 2.0, 0.0).finished();
  const auto h = edge_balance_histogram(g, EbrMetric::pagerank, &metric);
  EXPECT_EQ(h.zero_count, 1u);      // 1 -> 0: d(0) = 0 < d(1)
  EXPECT_EQ(h.infinite_count, 1u);  // 2 -> 1: d(2) = 0
  EXPECT_EQ(h.total(), 2u);
}

TEST(Ebr, PagerankNeedsScores) {
  const auto g = DirectedGraph::from_edges(2, {{0, 1}});
  EXPECT_THROW(edge_balance_histogram(g, EbrMetric::pagerank), Error);
  ScoreVector wrong_size = ScoreVector::Ones(1);
  EXPECT_THROW(edge_balance_histogram(g, EbrMetric::pagerank, &wrong_size), Error);
}

TEST(Ebr, MassesSumToEdgeCount) {
  const auto g = gen_graph({.node_count = 5000, .rng_seed = 2});
  const auto h = edge_balance_histogram(g, EbrMetric::in_degree);
  EXPECT_EQ(h.total(), g.edge_count());
}

TEST(Ebr, ScaleInvariant) {
  const auto g = oracle::random_graph(300, 3000, 12);
  const ScoreVector base = in_degrees(g);
  for (double c : {0.001, 0.37, 3.0, 1e6}) {
    const ScoreVector scaled = base * c;
    EXPECT_EQ(edge_balance_histogram(g, EbrMetric::in_degree, &scaled), edge_balance_histogram(g, EbrMetric::in_degree))
        << "c = " << c;
  }
}

TEST(Ebr, ReversalMirrorsBins) {
  const auto g = oracle::random_graph(300, 3000, 13);
  const ScoreVector metric = in_degrees(g, 1.0);  // strictly positive
  const auto forward = edge_balance_histogram(g, EbrMetric::pagerank, &metric);
  const auto backward = edge_balance_histogram(reversed(g), EbrMetric::pagerank, &metric);
  EXPECT_EQ(forward.zero_count, backward.infinite_count);
  EXPECT_EQ(forward.infinite_count, backward.zero_count);
  ASSERT_EQ(forward.bins.size(), backward.bins.size());
  for (const auto& [k, c] : forward.bins) EXPECT_EQ(backward.bins.at(-k), c) << "bin " << k;
}

TEST(FollowingMatrix, SingleEdge) {
  const auto m = following_matrix(DirectedGraph::from_edges(2, {{0, 1}}));
  EXPECT_EQ(m.cells(0, 0), 1);
  EXPECT_EQ(m.cells.sum(), 1);
}

TEST(FollowingMatrix, StarWithCustomBounds) {
  const FollowingBounds bounds{0, 1, 2, 3, 4, 5, 6, kUnboundedFollowers};
  const auto m = following_matrix(DirectedGraph::from_edges(3, {{0, 1}, {0, 2}}), bounds);
  EXPECT_EQ(m.group_of(1), 1);
  EXPECT_EQ(m.cells(0, 1), 2);
  EXPECT_EQ(m.cells.sum(), 2);
}

TEST(FollowingMatrix, InvalidBounds) {
  const auto g = DirectedGraph::from_edges(2, {{0, 1}});
  EXPECT_THROW(following_matrix(g, {1, 10, 100, 1000, 10000, 100000, 1000000, kUnboundedFollowers}), Error);
  EXPECT_THROW(following_matrix(g, {0, 10, 10, 1000, 10000, 100000, 1000000, kUnboundedFollowers}), Error);
  EXPECT_THROW(following_matrix(g, {0, 10, 100, 1000, 10000, 100000, 1000000, 5000000}), Error);
}

TEST(FollowingMatrix, MatchesPerEdgeRecount) {
  const auto g = gen_graph({.node_count = 20'000, .rng_seed = 4, .min_in_degree = 2});
  const FollowingBounds bounds{0, 2, 4, 8, 16, 64, 256, kUnboundedFollowers};
  const auto m = following_matrix(g, bounds);
  auto group = [&](std::uint64_t f) {
    int i = 0;
    while (!(f >= bounds[i] && (bounds[i + 1] == kUnboundedFollowers || f < bounds[i + 1]))) ++i;
    return i;
  };
  Eigen::Matrix<std::int64_t, 7, 7> expected = Eigen::Matrix<std::int64_t, 7, 7>::Zero();
  g.for_each_edge([&](NodeId u, NodeId v) { ++expected(group(g.in_degree(u)), group(g.in_degree(v))); });
  EXPECT_EQ(m.cells, expected);
  EXPECT_EQ(static_cast<EdgeCount>(m.cells.sum()), g.edge_count());
}

TEST(FriendSimilarity, MedianOfThree) {
  // Node 0 befriends 1, 2, 3 with follower counts 3, 5, 100.
  const auto g = DirectedGraph::from_edges(4, {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {0, 3}, {3, 0}});
  const std::vector<std::uint64_t> followers{42, 3, 5, 100};
  const auto c = friend_similarity_curve(g, followers);
  const auto it = std::find_if(c.buckets.begin(), c.buckets.end(), [](const Bucket& b) { return b.center == 42.0; });
  ASSERT_NE(it, c.buckets.end());
  EXPECT_EQ(it->median, 5.0);
  std::vector<std::uint64_t> v{100, 3, 5};
  EXPECT_EQ(lower_median(v), 5u);
  std::vector<std::uint64_t> even{4, 1, 3, 2};
  EXPECT_EQ(lower_median(even), 2u);
}

TEST(FriendSimilarity, SymmetricPair) {
  const auto c = friend_similarity_curve(DirectedGraph::from_edges(2, {{0, 1}, {1, 0}}), std::vector<std::uint64_t>{10, 10});
  for (const Bucket& b : c.buckets) EXPECT_EQ(b.median, 10.0);
}

TEST(FriendSimilarity, Errors) {
  EXPECT_THROW(friend_similarity_curve(DirectedGraph::from_edges(2, {{0, 1}}), std::vector<std::uint64_t>{1, 1}), Error);
  EXPECT_THROW(friend_similarity_curve(DirectedGraph::from_edges(2, {}), std::vector<std::uint64_t>{1, 1}), Error);
}

TEST(FriendSimilarity, MatchesDirectMedianOracle) {
  const auto mutual = mutual_subgraph(gen_graph({.node_count = 1000, .reciprocity_target = 0.4, .rng_seed = 6, .min_in_degree = 3}));
  const auto followers = follower_counts(mutual);
  std::map<std::uint64_t, std::vector<std::uint64_t>> by_own;
  for (NodeId u = 0; u < mutual.node_count(); ++u) {
    std::vector<std::uint64_t> f;
    for (NodeId v : mutual.out_neighbors(u)) f.push_back(followers[v]);
    if (f.empty()) continue;
    std::sort(f.begin(), f.end());
    by_own[followers[u]].push_back(f[(f.size() - 1) / 2]);
  }
  const auto c = friend_similarity_curve(mutual, followers);
  ASSERT_EQ(c.buckets.size(), by_own.size());
  std::size_t i = 0;
  for (auto& [own, ms] : by_own) {
    std::sort(ms.begin(), ms.end());
    const std::size_t n = ms.size();
    const double median = n % 2 ? ms[n / 2] : (ms[n / 2 - 1] + ms[n / 2]) / 2.0;
    EXPECT_EQ(c.buckets[i].center, static_cast<double>(own));
    EXPECT_EQ(c.buckets[i].count, n);
    EXPECT_EQ(c.buckets[i].median, median);
    ++i;
  }
}

TEST(FriendSimilarity, InvariantUnderDisjointDuplication) {
  const auto mutual = oracle::random_mutual_graph(300, 700, 21);
  const auto followers = follower_counts(mutual);
  std::vector<Edge> doubled;
  const auto n = static_cast<NodeId>(mutual.node_count());
  mutual.for_each_edge([&](NodeId u, NodeId v) {
    doubled.push_back({u, v});
    doubled.push_back({u + n, v + n});
  });
  std::vector<std::uint64_t> doubled_followers(followers);
  doubled_followers.insert(doubled_followers.end(), followers.begin(), followers.end());
  const auto a = friend_similarity_curve(mutual, followers);
  const auto b = friend_similarity_curve(DirectedGraph::from_edges(2 * n, doubled), doubled_followers);
  ASSERT_EQ(a.buckets.size(), b.buckets.size());
  for (std::size_t i = 0; i < a.buckets.size(); ++i) {
    EXPECT_EQ(a.buckets[i].center, b.buckets[i].center);
    EXPECT_EQ(a.buckets[i].median, b.buckets[i].median);
    EXPECT_EQ(2 * a.buckets[i].count, b.buckets[i].count);
    ASSERT_EQ(a.buckets[i].geometric_mean.has_value(), b.buckets[i].geometric_mean.has_value());
    if (a.buckets[i].geometric_mean) {
      EXPECT_NEAR(*a.buckets[i].geometric_mean, *b.buckets[i].geometric_mean, 1e-12 * *a.buckets[i].geometric_mean);
    }
  }
}

namespace {

ProfileTable regions(const std::vector<std::string>& r) {
  ProfileTable t;
  t.mark_column(ProfileColumn::region);
  for (std::size_t i = 0; i < r.size(); ++i) {
    UserProfile p;
    p.region = r[i];
    t.set(static_cast<NodeId>(i), p);
  }
  return t;
}

} // namespace

TEST(SameRegion, HalfAndFull) {
  // Pairs (0,1) and (0,2): BJ-BJ and BJ-SH.
  const auto g = DirectedGraph::from_edges(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}});
  const auto half = same_region_fraction(g, regions({"BJ", "BJ", "SH"}));
  EXPECT_EQ(half.fraction, 0.5);
  EXPECT_EQ(half.eligible_pairs, 2u);
  EXPECT_EQ(same_region_fraction(g, regions({"BJ", "BJ", "BJ"})).fraction, 1.0);
}

TEST(SameRegion, UnknownExcludedAndNoEligiblePairs) {
  const auto g = DirectedGraph::from_edges(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}});
  const auto r = same_region_fraction(g, regions({"BJ", "", "BJ"}));
  EXPECT_EQ(r.eligible_pairs, 1u);
  EXPECT_EQ(r.excluded_pairs, 1u);
  EXPECT_EQ(r.fraction, 1.0);
  EXPECT_THROW(same_region_fraction(g, regions({"", "BJ", "BJ"})), Error);
  EXPECT_THROW(same_region_fraction(DirectedGraph::from_edges(2, {{0, 1}}), regions({"A", "A"})), Error);
}

TEST(SameRegion, MatchesPairEnumeration) {
  const auto mutual = mutual_subgraph(gen_graph({.node_count = 3000, .reciprocity_target = 0.3, .rng_seed = 14}));
  const auto profiles = gen_profiles(mutual, 14);
  std::uint64_t eligible = 0, same = 0;
  for (NodeId u = 0; u < mutual.node_count(); ++u) {
    for (NodeId v = u + 1; v < mutual.node_count(); ++v) {
      if (!mutual.has_edge(u, v)) continue;
      const auto& ru = profiles.find(u)->region;
      const auto& rv = profiles.find(v)->region;
      if (ru.empty() || rv.empty()) continue;
      ++eligible;
      same += ru == rv;
    }
  }
  const auto r = same_region_fraction(mutual, profiles);
  EXPECT_EQ(r.eligible_pairs, eligible);
  EXPECT_EQ(r.same_region_pairs, same);
  EXPECT_DOUBLE_EQ(r.fraction, static_cast<double>(same) / eligible);
}
