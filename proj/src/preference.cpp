#include "follownet/preference.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "follownet/error.hpp"

namespace follownet {

namespace {

constexpr const char* kModule = "preference";

using Int128 = __int128;

std::uint64_t degree(const DirectedGraph& g, NodeId u, Direction d) noexcept {
  return d == Direction::in ? g.in_degree(u) : g.out_degree(u);
}

struct EndpointMoments {
  Int128 sum = 0;
  Int128 sum_sq = 0;
};

std::optional<double> correlation(const DirectedGraph& g, Direction alpha, Direction beta,
                                  const EndpointMoments& s, const EndpointMoments& t) {
  const Int128 m = static_cast<Int128>(g.edge_count());
  Int128 sum_st = 0;
  const std::size_t n = g.node_count();
  for (std::size_t u = 0; u < n; ++u) {
    const auto id = static_cast<NodeId>(u);
    std::uint64_t target_sum = 0;
    for (NodeId v : g.out_neighbors(id)) {
      target_sum += degree(g, v, beta);
    }
    sum_st += static_cast<Int128>(degree(g, id, alpha)) * target_sum;
  }
  const Int128 var_s = m * s.sum_sq - s.sum * s.sum;
  const Int128 var_t = m * t.sum_sq - t.sum * t.sum;
  if (var_s == 0 || var_t == 0) {
    return std::nullopt;
  }
  const Int128 cov = m * sum_st - s.sum * t.sum;
  const long double r = static_cast<long double>(cov) /
                        (std::sqrt(static_cast<long double>(var_s)) * std::sqrt(static_cast<long double>(var_t)));
  return static_cast<double>(std::clamp(r, -1.0L, 1.0L));
}

void validate_bounds(const FollowingBounds& bounds) {
  if (bounds.front() != 0 || bounds.back() != kUnboundedFollowers) {
    throw Error(ErrorKind::invalid_argument, kModule,
                "following-matrix bounds must start at 0 and end with the unbounded sentinel");
  }
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    if (bounds[i] >= bounds[i + 1]) {
      throw Error(ErrorKind::invalid_argument, kModule, "following-matrix bounds must be strictly increasing");
    }
  }
}

void require_symmetric(const DirectedGraph& g) {
  if (!is_symmetric(g)) {
    throw Error(ErrorKind::invalid_structure, kModule, "expected a symmetric mutual-follow graph");
  }
}

} // namespace

AssortativityProfile assortativity_profile(const DirectedGraph& g) {
  if (g.edge_count() < 2) {
    throw Error(ErrorKind::insufficient_data, kModule, "assortativity needs at least two edges");
  }
  // Source moments weight each node by its out-degree, target moments by its in-degree.
  EndpointMoments source[2], target[2];
  const std::size_t n = g.node_count();
  for (std::size_t u = 0; u < n; ++u) {
    const auto id = static_cast<NodeId>(u);
    const Int128 out_w = g.out_degree(id);
    const Int128 in_w = g.in_degree(id);
    for (int d = 0; d < 2; ++d) {
      const Int128 value = degree(g, id, d == 0 ? Direction::in : Direction::out);
      source[d].sum += out_w * value;
      source[d].sum_sq += out_w * value * value;
      target[d].sum += in_w * value;
      target[d].sum_sq += in_w * value * value;
    }
  }
  AssortativityProfile p;
  p.in_in = correlation(g, Direction::in, Direction::in, source[0], target[0]);
  p.in_out = correlation(g, Direction::in, Direction::out, source[0], target[1]);
  p.out_in = correlation(g, Direction::out, Direction::in, source[1], target[0]);
  p.out_out = correlation(g, Direction::out, Direction::out, source[1], target[1]);
  return p;
}

std::uint64_t EbrHistogram::total() const noexcept {
  std::uint64_t t = zero_count + infinite_count;
  for (const auto& [k, c] : bins) {
    t += c;
  }
  return t;
}

double EbrHistogram::bin_low(std::int64_t k) const noexcept {
  return std::pow(10.0, (static_cast<double>(k) - 0.5) / bins_per_decade);
}

double EbrHistogram::bin_high(std::int64_t k) const noexcept {
  return std::pow(10.0, (static_cast<double>(k) + 0.5) / bins_per_decade);
}

std::int64_t ebr_bin_index(double ratio, int bins_per_decade) noexcept {
  return static_cast<std::int64_t>(std::floor(std::log10(ratio) * bins_per_decade + 0.5));
}

EbrHistogram edge_balance_histogram(const DirectedGraph& g, EbrMetric metric, const ScoreVector* scores,
                                    int bins_per_decade) {
  if (bins_per_decade < 1) {
    throw Error(ErrorKind::invalid_argument, kModule, "bins per decade must be positive");
  }
  const std::size_t n = g.node_count();
  if (metric == EbrMetric::pagerank && scores == nullptr) {
    throw Error(ErrorKind::invalid_argument, kModule, "PageRank edge balance needs a score vector");
  }
  std::vector<double> value(n);
  if (scores != nullptr) {
    if (static_cast<std::size_t>(scores->size()) != n) {
      throw Error(ErrorKind::invalid_argument, kModule,
                  "score vector covers " + std::to_string(scores->size()) + " nodes, graph has " +
                      std::to_string(n));
    }
    for (std::size_t u = 0; u < n; ++u) {
      const double s = (*scores)(static_cast<Eigen::Index>(u));
      if (!std::isfinite(s) || s < 0.0) {
        throw Error(ErrorKind::invalid_argument, kModule, "node metric must be finite and non-negative");
      }
      value[u] = s;
    }
  } else {
    for (std::size_t u = 0; u < n; ++u) {
      value[u] = g.in_degree(static_cast<NodeId>(u));
    }
  }

  EbrHistogram h;
  h.bins_per_decade = bins_per_decade;
  h.metric = metric;
  g.for_each_edge([&](NodeId a, NodeId b) {
    if (value[a] == 0.0) {
      ++h.infinite_count;
    } else if (value[b] == 0.0) {
      ++h.zero_count;
    } else {
      ++h.bins[ebr_bin_index(value[b] / value[a], bins_per_decade)];
    }
  });
  return h;
}

int FollowingMatrix::group_of(std::uint64_t followers) const noexcept {
  const auto it = std::upper_bound(bounds.begin(), bounds.end(), followers);
  return static_cast<int>(it - bounds.begin()) - 1;
}

FollowingMatrix following_matrix(const DirectedGraph& g, const FollowingBounds& bounds) {
  std::vector<std::uint64_t> followers(g.node_count());
  for (std::size_t u = 0; u < followers.size(); ++u) {
    followers[u] = g.in_degree(static_cast<NodeId>(u));
  }
  return following_matrix(g, bounds, followers);
}

FollowingMatrix following_matrix(const DirectedGraph& g, const FollowingBounds& bounds,
                                 std::span<const std::uint64_t> follower_counts) {
  validate_bounds(bounds);
  if (follower_counts.size() != g.node_count()) {
    throw Error(ErrorKind::invalid_argument, kModule, "follower counts must cover every node");
  }
  FollowingMatrix fm;
  fm.bounds = bounds;
  std::vector<int> group(g.node_count());
  for (std::size_t u = 0; u < group.size(); ++u) {
    group[u] = fm.group_of(follower_counts[u]);
  }
  g.for_each_edge([&](NodeId a, NodeId b) { ++fm.cells(group[a], group[b]); });
  return fm;
}

std::uint64_t lower_median(std::span<std::uint64_t> values) {
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  return values[mid];
}

BucketCurve friend_similarity_curve(const DirectedGraph& mutual, std::span<const std::uint64_t> follower_counts,
                                    Bucketing bucketing) {
  require_symmetric(mutual);
  if (follower_counts.size() != mutual.node_count()) {
    throw Error(ErrorKind::invalid_argument, kModule, "follower counts must cover every node");
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> points;
  std::vector<std::uint64_t> scratch;
  const std::size_t n = mutual.node_count();
  for (std::size_t u = 0; u < n; ++u) {
    const auto friends = mutual.out_neighbors(static_cast<NodeId>(u));
    if (friends.empty()) {
      continue;
    }
    scratch.clear();
    for (NodeId f : friends) {
      scratch.push_back(follower_counts[f]);
    }
    points.emplace_back(follower_counts[u], lower_median(scratch));
  }
  if (points.empty()) {
    throw Error(ErrorKind::insufficient_data, kModule, "no user has a friend");
  }
  return bucket_curve(points, bucketing);
}

RegionAgreement same_region_fraction(const DirectedGraph& mutual, const ProfileTable& profiles) {
  require_symmetric(mutual);
  RegionAgreement r;
  mutual.for_each_edge([&](NodeId u, NodeId v) {
    if (u >= v) {
      return;
    }
    const UserProfile* pu = profiles.find(u);
    const UserProfile* pv = profiles.find(v);
    if (!pu || !pv || pu->region.empty() || pv->region.empty()) {
      ++r.excluded_pairs;
      return;
    }
    ++r.eligible_pairs;
    if (pu->region == pv->region) {
      ++r.same_region_pairs;
    }
  });
  if (r.eligible_pairs == 0) {
    throw Error(ErrorKind::insufficient_data, kModule, "no friend pair has both regions known");
  }
  r.fraction = static_cast<double>(r.same_region_pairs) / static_cast<double>(r.eligible_pairs);
  return r;
}

} // namespace follownet
