#include "follownet/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "follownet/parallel.hpp"

namespace follownet {

namespace {

constexpr const char* kModule = "ranking";
constexpr std::size_t kBlockSize = 4096;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

/// Sums per-block partials in block order.
double ordered_sum(const std::vector<double>& partials) {
  double total = 0.0;
  for (double p : partials) {
    total += p;
  }
  return total;
}

std::uint64_t count_inversions(std::vector<std::size_t>& values, std::vector<std::size_t>& scratch,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) {
    return 0;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(values, scratch, lo, mid) + count_inversions(values, scratch, mid, hi);
  std::size_t i = lo, j = mid, out = lo;
  while (i < mid && j < hi) {
    if (values[i] <= values[j]) {
      scratch[out++] = values[i++];
    } else {
      inv += mid - i;
      scratch[out++] = values[j++];
    }
  }
  while (i < mid) scratch[out++] = values[i++];
  while (j < hi) scratch[out++] = values[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            values.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

std::unordered_map<NodeId, std::size_t> positions(std::span<const NodeId> list, const char* which) {
  std::unordered_map<NodeId, std::size_t> pos;
  pos.reserve(list.size());
  for (std::size_t r = 0; r < list.size(); ++r) {
    if (!pos.emplace(list[r], r).second) {
      fail(ErrorKind::invalid_argument,
           std::string(which) + " top-k list repeats node " + std::to_string(list[r]));
    }
  }
  return pos;
}

/// Sum over ids exclusive to `list` of the number of shared ids ranked below them.
std::uint64_t exclusive_above_shared(std::span<const NodeId> list,
                                     const std::unordered_map<NodeId, std::size_t>& other) {
  std::uint64_t penalty = 0;
  std::uint64_t shared_below = 0;
  for (std::size_t r = list.size(); r-- > 0;) {
    if (other.contains(list[r])) {
      ++shared_below;
    } else {
      penalty += shared_below;
    }
  }
  return penalty;
}

bool ranks_before(const ScoreVector& s, NodeId a, NodeId b) {
  const double sa = s(a), sb = s(b);
  return sa > sb || (sa == sb && a < b);
}

void require_finite(const ScoreVector& s) {
  if (!s.allFinite()) {
    fail(ErrorKind::invalid_argument, "scores must be finite");
  }
}

} // namespace

PageRankNotConverged::PageRankNotConverged(ScoreVector last, double residual, int iterations)
    : Error(ErrorKind::not_converged, kModule,
            "PageRank did not converge in " + std::to_string(iterations) +
                " iterations (L1 residual " + std::to_string(residual) + ")"),
      last_(std::move(last)),
      residual_(residual),
      iterations_(iterations) {}

PageRankResult pagerank(const DirectedGraph& g, const PageRankOptions& options) {
  const std::size_t n = g.node_count();
  if (n == 0) {
    fail(ErrorKind::empty_input, "PageRank of an empty graph");
  }
  if (!(options.damping >= 0.0 && options.damping < 1.0)) {
    fail(ErrorKind::invalid_argument, "damping must lie in [0, 1)");
  }
  if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
    fail(ErrorKind::invalid_argument, "tolerance must be positive and max_iterations at least 1");
  }

  const double nd = static_cast<double>(n);
  const double d = options.damping;
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;

  ScoreVector x = ScoreVector::Constant(static_cast<Eigen::Index>(n), 1.0 / nd);
  ScoreVector next(static_cast<Eigen::Index>(n));
  ScoreVector share(static_cast<Eigen::Index>(n));
  std::vector<double> dangling_part(blocks), residual_part(blocks);

  double residual = 0.0;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    parallel_for_blocks(blocks, options.threads, [&](std::size_t b) {
      const std::size_t end = std::min(n, (b + 1) * kBlockSize);
      double dangling = 0.0;
      for (std::size_t u = b * kBlockSize; u < end; ++u) {
        const auto id = static_cast<NodeId>(u);
        const auto deg = g.out_degree(id);
        const auto i = static_cast<Eigen::Index>(u);
        if (deg == 0) {
          dangling += x(i);
          share(i) = 0.0;
        } else {
          share(i) = x(i) / deg;
        }
      }
      dangling_part[b] = dangling;
    });
    const double base = (1.0 - d) / nd + d * ordered_sum(dangling_part) / nd;

    parallel_for_blocks(blocks, options.threads, [&](std::size_t b) {
      const std::size_t end = std::min(n, (b + 1) * kBlockSize);
      double change = 0.0;
      for (std::size_t v = b * kBlockSize; v < end; ++v) {
        double incoming = 0.0;
        for (NodeId u : g.in_neighbors(static_cast<NodeId>(v))) {
          incoming += share(u);
        }
        const auto i = static_cast<Eigen::Index>(v);
        next(i) = base + d * incoming;
        change += std::abs(next(i) - x(i));
      }
      residual_part[b] = change;
    });
    residual = ordered_sum(residual_part);
    x.swap(next);

    if (residual < options.tolerance) {
      std::vector<double> sums(blocks);
      for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t begin = b * kBlockSize;
        const std::size_t len = std::min(n, begin + kBlockSize) - begin;
        sums[b] = x.segment(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(len)).sum();
      }
      x /= ordered_sum(sums);
      return {std::move(x), iter, residual};
    }
  }
  throw PageRankNotConverged(std::move(x), residual, options.max_iterations);
}

TopKList rank_order(const ScoreVector& scores) {
  require_finite(scores);
  TopKList order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return ranks_before(scores, a, b); });
  return order;
}

TopKList top_k(const ScoreVector& scores, std::size_t k) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (k > n) {
    fail(ErrorKind::invalid_argument, "k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " scored nodes");
  }
  require_finite(scores);
  TopKList order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](NodeId a, NodeId b) { return ranks_before(scores, a, b); });
  order.resize(k);
  return order;
}

std::uint64_t kendall_k0(std::span<const NodeId> first, std::span<const NodeId> second) {
  const auto pos1 = positions(first, "first");
  const auto pos2 = positions(second, "second");

  // Shared ids in first-list order, replaced by their rank in the second list.
  std::vector<std::size_t> second_ranks;
  for (NodeId id : first) {
    if (auto it = pos2.find(id); it != pos2.end()) {
      second_ranks.push_back(it->second);
    }
  }
  const std::uint64_t shared = second_ranks.size();
  std::vector<std::size_t> scratch(second_ranks.size());
  const std::uint64_t discordant = count_inversions(second_ranks, scratch, 0, second_ranks.size());

  const std::uint64_t only_first = first.size() - shared;
  const std::uint64_t only_second = second.size() - shared;
  return discordant + exclusive_above_shared(first, pos2) + exclusive_above_shared(second, pos1) +
         only_first * only_second;
}

double normalized_k(std::uint64_t k0, std::uint64_t k) {
  if (k < 1) {
    fail(ErrorKind::invalid_argument, "list length must be at least 1");
  }
  const double kd = static_cast<double>(k);
  return 1.0 - static_cast<double>(k0) / (kd * kd);
}

std::vector<CorrelationPoint> ranking_correlation_curve(const ScoreVector& first, const ScoreVector& second,
                                                        std::span<const std::size_t> ks) {
  if (first.size() != second.size()) {
    fail(ErrorKind::invalid_argument, "score vectors cover different node sets");
  }
  const auto n = static_cast<std::size_t>(first.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1 || ks[i] > n || (i > 0 && ks[i] <= ks[i - 1])) {
      fail(ErrorKind::invalid_argument, "k values must be ascending and within [1, N]");
    }
  }
  const TopKList order1 = rank_order(first);
  const TopKList order2 = rank_order(second);
  std::vector<CorrelationPoint> curve;
  curve.reserve(ks.size());
  for (std::size_t k : ks) {
    const std::uint64_t k0 =
        kendall_k0(std::span(order1).first(k), std::span(order2).first(k));
    curve.push_back({k, k0, normalized_k(k0, k)});
  }
  return curve;
}

} // namespace follownet
