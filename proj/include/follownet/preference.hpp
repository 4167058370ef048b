#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "follownet/degree_stats.hpp"
#include "follownet/graph.hpp"
#include "follownet/profiles.hpp"
#include "follownet/ranking.hpp"

namespace follownet {

/// The four directed degree correlations r(alpha, beta). A component is
/// nullopt when the source or target degree has zero variance.
struct AssortativityProfile {
  std::optional<double> in_in;
  std::optional<double> in_out;
  std::optional<double> out_in;
  std::optional<double> out_out;

  std::optional<double> r(Direction source, Direction target) const noexcept {
    if (source == Direction::in) return target == Direction::in ? in_in : in_out;
    return target == Direction::in ? out_in : out_out;
  }
};

/// Pearson correlation over edges between the source's `alpha`-degree and the
/// target's `beta`-degree, for all four (alpha, beta).
///
/// Moments are accumulated as exact 128-bit integer sums (edge-endpoint
/// degrees are integers), so the result is independent of summation order and
/// the only rounding happens in the final division.
AssortativityProfile assortativity_profile(const DirectedGraph& g);

enum class EbrMetric { in_degree, pagerank };

/// Distribution of R = d(target) / d(source) over edges.
///
/// Bin k is centred on 10^(k/b) and spans [10^((k-1/2)/b), 10^((k+1/2)/b)),
/// b = bins_per_decade, so R = 1 sits at the centre of bin 0 and R, 1/R land
/// in bins k, -k. Edges with d(source) = 0 are counted in `infinite_count`;
/// edges with d(target) = 0 < d(source) in `zero_count`.
struct EbrHistogram {
  int bins_per_decade = 10;
  EbrMetric metric = EbrMetric::in_degree;
  std::map<std::int64_t, std::uint64_t> bins;
  std::uint64_t zero_count = 0;
  std::uint64_t infinite_count = 0;

  std::uint64_t total() const noexcept;
  double bin_low(std::int64_t k) const noexcept;
  double bin_high(std::int64_t k) const noexcept;
  friend bool operator==(const EbrHistogram&, const EbrHistogram&) = default;
};

std::int64_t ebr_bin_index(double ratio, int bins_per_decade) noexcept;

/// `scores` is required for EbrMetric::pagerank and must cover every node.
/// For EbrMetric::in_degree the node metric is the in-degree of `g`, unless
/// `scores` is given, in which case it is used as the metric.
EbrHistogram edge_balance_histogram(const DirectedGraph& g, EbrMetric metric,
                                    const ScoreVector* scores = nullptr, int bins_per_decade = 10);

inline constexpr std::uint64_t kUnboundedFollowers = std::numeric_limits<std::uint64_t>::max();

/// Seven follower-count groups [bounds[i], bounds[i+1]).
using FollowingBounds = std::array<std::uint64_t, 8>;
inline constexpr FollowingBounds kDecadeBounds{0, 10, 100, 1000, 10000, 100000, 1000000, kUnboundedFollowers};

struct FollowingMatrix {
  /// cells(i, j): edges from group i to group j.
  Eigen::Matrix<std::int64_t, 7, 7> cells = Eigen::Matrix<std::int64_t, 7, 7>::Zero();
  FollowingBounds bounds = kDecadeBounds;

  /// Group of a follower count.
  int group_of(std::uint64_t followers) const noexcept;
};

/// Edge counts by (source group, target group); groups by in-degree.
FollowingMatrix following_matrix(const DirectedGraph& g, const FollowingBounds& bounds = kDecadeBounds);
/// Same, grouping by an explicit per-node follower count.
FollowingMatrix following_matrix(const DirectedGraph& g, const FollowingBounds& bounds,
                                 std::span<const std::uint64_t> follower_counts);

/// Lower-middle median (element (n-1)/2 of the sorted values).
std::uint64_t lower_median(std::span<std::uint64_t> values);

/// For each user with at least one friend, m(u) = lower median of the friends'
/// follower counts. Users are bucketed by their own follower count (exact
/// count by default) and each bucket reports the median and geometric mean of
/// m(u).
BucketCurve friend_similarity_curve(const DirectedGraph& mutual, std::span<const std::uint64_t> follower_counts,
                                    Bucketing bucketing = Bucketing::exact());

struct RegionAgreement {
  double fraction = 0.0;
  std::uint64_t eligible_pairs = 0;
  std::uint64_t same_region_pairs = 0;
  /// Friend pairs skipped because a profile or region is unknown.
  std::uint64_t excluded_pairs = 0;
};

/// Over unordered friend pairs with both regions known, the fraction sharing a region.
RegionAgreement same_region_fraction(const DirectedGraph& mutual, const ProfileTable& profiles);

} // namespace follownet
