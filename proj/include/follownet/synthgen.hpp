#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "follownet/graph.hpp"
#include "follownet/profiles.hpp"
#include "follownet/propagation.hpp"
#include "follownet/random.hpp"

namespace follownet {

/// Exact sampler for the discrete power law P(X = x) ∝ x^-alpha on
/// [xmin, xmax] (xmax inclusive, unbounded when nullopt).
///
/// Unbounded: rejection from floor(Y), Y continuous Pareto on [xmin, inf),
/// accepting with probability (x^-a / integral_x^{x+1} y^-a dy) / (same at
/// xmin); the ratio is decreasing in x so this is exact. Bounded: inverse
/// transform over a tabulated CDF when the range has at most 2^22 values,
/// otherwise the unbounded sampler with rejection of values above xmax.
class DiscretePowerLaw {
public:
  DiscretePowerLaw(double alpha, std::uint64_t xmin, std::optional<std::uint64_t> xmax = std::nullopt);

  std::uint64_t operator()(Rng& rng) const;

  double alpha() const noexcept { return alpha_; }
  std::uint64_t xmin() const noexcept { return xmin_; }

private:
  std::uint64_t sample_unbounded(Rng& rng) const;

  double alpha_;
  std::uint64_t xmin_;
  std::optional<std::uint64_t> xmax_;
  double ratio_at_min_ = 1.0;
  std::vector<double> cdf_;
};

struct GraphSpec {
  std::size_t node_count = 1000;
  double target_in_exponent = 2.3336;
  double reciprocity_target = 0.203;
  std::uint64_t rng_seed = 1;
  /// Smallest sampled in-degree; raises the mean degree without changing the tail exponent.
  std::uint64_t min_in_degree = 1;
};

inline constexpr double kReciprocityTolerance = 0.02;

/// Configuration-model digraph with a power-law in-degree sequence.
///
/// Every node draws an in-degree (capped at N - 1) and receives that many
/// distinct followers chosen uniformly (Floyd's sampling), which makes the
/// graph simple and preserves the drawn in-degrees exactly. A post-pass then
/// adds the reverse of uniformly chosen one-way edges until reciprocity is
/// within kReciprocityTolerance of the target. Bit-stable for a fixed seed.
DirectedGraph gen_graph(const GraphSpec& spec);

struct CascadeSpec {
  NodeId source = 0;
  double forward_probability = 0.1;
  std::uint32_t max_depth = 10;
  double mean_delay_seconds = 1800.0;
  std::int64_t start_timestamp = 0;
  std::uint64_t rng_seed = 1;
};

/// Level-by-level spread: each follower of a participating author that has not
/// yet forwarded does so with `forward_probability`, up to `max_depth` levels.
/// Delays are exponential (rounded down to whole seconds) and accumulate along
/// the forwarding path. Message ids are "m0", "m1", ... in creation order.
Cascade gen_cascade(const DirectedGraph& g, const CascadeSpec& spec);

/// Same spread, returned as records (creation order).
std::vector<ForwardRecord> gen_cascade_records(const DirectedGraph& g, const CascadeSpec& spec);

/// Synthetic profiles consistent with `g`: followers and followings are the
/// node's in- and out-degree; posts grow with followers under multiplicative
/// noise; gender, verification, region and registration month are drawn
/// independently.
ProfileTable gen_profiles(const DirectedGraph& g, std::uint64_t rng_seed);

} // namespace follownet
