#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "follownet/error.hpp"
#include "follownet/graph.hpp"

namespace follownet {

/// One real score per node, indexed by NodeId.
template <class Scalar>
using ScoreVectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using ScoreVector = ScoreVectorT<double>;

/// Ordered node ids, rank 1 (best) first.
using TopKList = std::vector<NodeId>;

struct PageRankOptions {
  double damping = 0.85;
  /// Converged when the L1 change between sweeps drops below this.
  double tolerance = 1e-10;
  int max_iterations = 200;
  unsigned threads = 1;
};

struct PageRankResult {
  ScoreVector scores;
  int iterations = 0;
  double residual = 0.0;
};

/// Raised when power iteration hits the iteration cap. Carries the last iterate.
class PageRankNotConverged : public Error {
public:
  PageRankNotConverged(ScoreVector last, double residual, int iterations);
  const ScoreVector& last_iterate() const noexcept { return last_; }
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

private:
  ScoreVector last_;
  double residual_;
  int iterations_;
};

/// Power iteration x' = (1-d)/N + d (P^T x + D/N), where P moves a node's score
/// evenly over its out-edges (u -> v sends score to the followed node v) and D
/// is the total score sitting on nodes without out-edges.
///
/// Sweeps pull over in-neighbours, so each entry is written by exactly one
/// worker; residual and dangling-mass reductions run over fixed node blocks
/// in block order, making the result independent of the thread count.
PageRankResult pagerank(const DirectedGraph& g, const PageRankOptions& options = {});

/// The k highest scores, ties broken by ascending node id.
TopKList top_k(const ScoreVector& scores, std::size_t k);

/// Full ranking (same order as top_k with k = N).
TopKList rank_order(const ScoreVector& scores);

/// Optimistic generalised Kendall distance between two top-k lists.
///
/// Pair penalties over the union of both lists:
///  - both ids in both lists: 1 if their relative order differs;
///  - both in one list, only i in the other: 1 if j is ranked above i in the
///    list holding both;
///  - i only in one list and j only in the other: 1;
///  - both only in the same single list: 0.
///
/// Computed without enumerating pairs: an inversion count over the shared ids,
/// a per-id count of shared ids ranked below each exclusive id, and the
/// product of the two exclusive-set sizes.
std::uint64_t kendall_k0(std::span<const NodeId> first, std::span<const NodeId> second);

/// K = 1 - k0 / k^2.
double normalized_k(std::uint64_t k0, std::uint64_t k);

struct CorrelationPoint {
  std::size_t k;
  std::uint64_t k0;
  double normalized;
};

/// K for top-k lists of both score vectors at each k in `ks` (ascending).
std::vector<CorrelationPoint> ranking_correlation_curve(const ScoreVector& first, const ScoreVector& second,
                                                        std::span<const std::size_t> ks);

} // namespace follownet
