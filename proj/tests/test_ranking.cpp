#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "follownet/error.hpp"
#include "follownet/ranking.hpp"
#include "follownet/synthgen.hpp"
#include "support/oracles.hpp"

using namespace follownet;

namespace {

ScoreVector scores_of(std::initializer_list<double> v) {
  ScoreVector s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

ScoreVector random_scores(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScoreVector s(static_cast<Eigen::Index>(n));
  for (auto& x : s) x = u(eng);
  return s;
}

TopKList sort_oracle(const ScoreVector& s, std::size_t k) {
  std::vector<NodeId> ids(static_cast<std::size_t>(s.size()));
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) { return s[a] > s[b]; });
  ids.resize(k);
  return ids;
}

/// Every ordered list of length k over {0..u-1}.
void for_each_list(std::size_t k, NodeId u, const std::function<void(const TopKList&)>& fn) {
  TopKList cur;
  std::vector<bool> used(u, false);
  std::function<void()> rec = [&] {
    if (cur.size() == k) {
      fn(cur);
      return;
    }
    for (NodeId x = 0; x < u; ++x) {
      if (used[x]) continue;
      used[x] = true;
      cur.push_back(x);
      rec();
      cur.pop_back();
      used[x] = false;
    }
  };
  rec();
}

} // namespace

TEST(PageRank, DirectedCycleIsUniform) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 10; ++i) edges.push_back({i, static_cast<NodeId>((i + 1) % 10)});
  const auto r = pagerank(DirectedGraph::from_edges(10, edges));
  for (double s : r.scores) EXPECT_NEAR(s, 0.1, 1e-9);
}

TEST(PageRank, MutualPair) {
  const auto r = pagerank(DirectedGraph::from_edges(2, {{0, 1}, {1, 0}}));
  EXPECT_NEAR(r.scores[0], 0.5, 1e-12);
  EXPECT_NEAR(r.scores[1], 0.5, 1e-12);
}

TEST(PageRank, MatchesDenseOracleOnTriangle) {
  const auto g = DirectedGraph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}, {0, 2}});
  const auto r = pagerank(g);
  const Eigen::VectorXd expected = oracle::dense_pagerank(g, 0.85, 1000);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.scores[i], expected[i], 1e-9);
}

TEST(PageRank, MatchesDenseOracleWithDanglingNodes) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = oracle::random_graph(120, 300, seed);  // sparse: many dangling nodes
    const auto r = pagerank(g);
    const Eigen::VectorXd expected = oracle::dense_pagerank(g, 0.85, 1000);
    EXPECT_LT((r.scores - expected).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(r.scores.sum(), 1.0, 1e-9);
    EXPECT_GT(r.scores.minCoeff(), 0.0);
  }
}

TEST(PageRank, PermutationInvariant) {
  const std::size_t n = 200;
  const auto edges = oracle::random_edges(n, 1200, 3);
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  std::vector<Edge> relabelled;
  for (const Edge& e : edges) relabelled.push_back({perm[e.source], perm[e.target]});
  const auto a = pagerank(DirectedGraph::from_edges(n, edges));
  const auto b = pagerank(DirectedGraph::from_edges(n, relabelled));
  for (NodeId u = 0; u < n; ++u) EXPECT_NEAR(a.scores[u], b.scores[perm[u]], 1e-9);
}

TEST(PageRank, RegularSymmetricGraphIsUniform) {
  // Circulant graph: i <-> i +- 1, i +- 3 (mod 30), strongly connected and 4-regular.
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 30; ++i)
    for (NodeId step : {1u, 3u}) {
      edges.push_back({i, (i + step) % 30});
      edges.push_back({(i + step) % 30, i});
    }
  const auto r = pagerank(DirectedGraph::from_edges(30, edges));
  for (double s : r.scores) EXPECT_NEAR(s, 1.0 / 30.0, 1e-9);
}

TEST(PageRank, ThreadCountDoesNotChangeScores) {
  const auto g = gen_graph({.node_count = 30'000, .rng_seed = 5, .min_in_degree = 2});
  const auto a = pagerank(g, {.threads = 1});
  const auto b = pagerank(g, {.threads = 3});
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE((a.scores.array() == b.scores.array()).all());
}

TEST(PageRank, NotConvergedCarriesLastIterate) {
  const auto g = oracle::random_graph(100, 500, 9);
  try {
    pagerank(g, {.tolerance = 1e-15, .max_iterations = 3});
    FAIL() << "expected non-convergence";
  } catch (const PageRankNotConverged& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_converged);
    EXPECT_EQ(e.iterations(), 3);
    EXPECT_EQ(e.last_iterate().size(), 100);
    EXPECT_GT(e.residual(), 1e-15);
  }
}

TEST(PageRank, InvalidArguments) {
  EXPECT_THROW(pagerank(DirectedGraph::from_edges(0, {})), Error);
  EXPECT_THROW(pagerank(DirectedGraph::from_edges(2, {{0, 1}}), {.damping = 1.5}), Error);
}

TEST(TopK, Examples) {
  EXPECT_EQ(top_k(scores_of({0.5, 0.3, 0.2}), 2), (TopKList{0, 1}));
  EXPECT_EQ(top_k(scores_of({0.5, 0.5}), 1), (TopKList{0}));
  EXPECT_EQ(top_k(scores_of({0.1, 0.5, 0.5}), 3), (TopKList{1, 2, 0}));
  EXPECT_THROW(top_k(scores_of({0.5}), 2), Error);
}

TEST(TopK, MatchesFullSort) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScoreVector s = random_scores(500, seed);
    for (Eigen::Index i = 0; i < s.size(); i += 7) s[i] = 0.5;  // plant ties
    for (std::size_t k : {1u, 10u, 100u, 500u}) EXPECT_EQ(top_k(s, k), sort_oracle(s, k));
    EXPECT_EQ(rank_order(s), sort_oracle(s, 500));
  }
}

TEST(Kendall, Examples) {
  const TopKList abc{0, 1, 2};
  EXPECT_EQ(kendall_k0(abc, abc), 0u);
  EXPECT_EQ(kendall_k0(TopKList{0, 1}, TopKList{2, 3}), 4u);
  EXPECT_EQ(kendall_k0(TopKList{0, 1, 2}, TopKList{1, 0, 3}), 2u);
  EXPECT_EQ(oracle::kendall_pairs({0, 1, 2}, {1, 0, 3}), 2u);
}

TEST(Kendall, DuplicatesRejected) {
  EXPECT_THROW(kendall_k0(TopKList{0, 0}, TopKList{1, 2}), Error);
  EXPECT_THROW(kendall_k0(TopKList{0, 1}, TopKList{2, 2}), Error);
}

TEST(Kendall, NormalizedExamples) {
  EXPECT_EQ(normalized_k(0, 20), 1.0);
  EXPECT_EQ(normalized_k(400, 20), 0.0);
  EXPECT_NEAR(normalized_k(2, 3), 7.0 / 9.0, 1e-15);
  EXPECT_THROW(normalized_k(0, 0), Error);
}

TEST(Kendall, ExhaustiveSmallUniverses) {
  for (std::size_t k = 1; k <= 4; ++k) {
    for (NodeId u = static_cast<NodeId>(k); u <= 8; ++u) {
      if (k == 4 && u > 6) continue;  // 360^2 list pairs at u = 6 already covers every overlap pattern
      std::vector<TopKList> lists;
      for_each_list(k, u, [&](const TopKList& t) { lists.push_back(t); });
      for (const auto& a : lists) {
        EXPECT_EQ(kendall_k0(a, a), 0u);
        for (const auto& b : lists) {
          const auto k0 = kendall_k0(a, b);
          ASSERT_EQ(k0, oracle::kendall_pairs(a, b));
          ASSERT_EQ(k0, kendall_k0(b, a));
          const double kk = normalized_k(k0, k);
          ASSERT_GE(kk, 0.0);
          ASSERT_LE(kk, 1.0);
        }
      }
    }
  }
}

TEST(Kendall, ExhaustiveK4OverEightIds) {
  // Full universe of 8 ids at k = 4: 1680 lists, checked against the first list
  // of every overlap pattern plus a sampled cross product.
  std::vector<TopKList> lists;
  for_each_list(4, 8, [&](const TopKList& t) { lists.push_back(t); });
  std::mt19937_64 eng(1);
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (int s = 0; s < 40; ++s) {
      const auto& b = lists[eng() % lists.size()];
      const auto k0 = kendall_k0(lists[i], b);
      ASSERT_EQ(k0, oracle::kendall_pairs(lists[i], b));
      const double kk = normalized_k(k0, 4);
      ASSERT_GE(kk, 0.0);
      ASSERT_LE(kk, 1.0);
    }
  }
}

TEST(Kendall, DisjointIsKSquared) {
  for (std::size_t k = 1; k <= 50; ++k) {
    TopKList a(k), b(k);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), static_cast<NodeId>(k));
    EXPECT_EQ(kendall_k0(a, b), k * k);
    EXPECT_EQ(normalized_k(k * k, k), 0.0);
  }
}

TEST(CorrelationCurve, IdenticalScores) {
  const auto s = random_scores(100, 1);
  const std::vector<std::size_t> ks{1, 5, 50, 100};
  for (const auto& p : ranking_correlation_curve(s, s, ks)) EXPECT_EQ(p.normalized, 1.0);
}

TEST(CorrelationCurve, ReversedRankingMatchesOracle) {
  const ScoreVector s1 = scores_of({8, 7, 6, 5, 4, 3, 2, 1});
  const ScoreVector s2 = -s1;
  const std::vector<std::size_t> ks{4};
  const auto curve = ranking_correlation_curve(s1, s2, ks);
  const auto expected = oracle::kendall_pairs(sort_oracle(s1, 4), sort_oracle(s2, 4));
  EXPECT_EQ(curve[0].k0, expected);
  EXPECT_EQ(curve[0].k0, 16u);
  EXPECT_EQ(curve[0].normalized, 0.0);
}

TEST(CorrelationCurve, IndependentScoresMatchOracle) {
  const auto s1 = random_scores(100, 2), s2 = random_scores(100, 3);
  const std::vector<std::size_t> ks{5, 10, 20};
  const auto curve = ranking_correlation_curve(s1, s2, ks);
  ASSERT_EQ(curve.size(), 3u);
  for (const auto& p : curve) {
    const auto k0 = oracle::kendall_pairs(sort_oracle(s1, p.k), sort_oracle(s2, p.k));
    EXPECT_NEAR(p.normalized, 1.0 - static_cast<double>(k0) / static_cast<double>(p.k * p.k), 1e-12);
  }
}

TEST(CorrelationCurve, Errors) {
  const auto s = random_scores(10, 1);
  EXPECT_THROW(ranking_correlation_curve(s, random_scores(9, 1), std::vector<std::size_t>{1}), Error);
  EXPECT_THROW(ranking_correlation_curve(s, s, std::vector<std::size_t>{11}), Error);
  EXPECT_THROW(ranking_correlation_curve(s, s, std::vector<std::size_t>{5, 3}), Error);
}
