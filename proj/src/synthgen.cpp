#include "follownet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "follownet/error.hpp"

namespace follownet {

namespace {

constexpr const char* kModule = "synthgen";
constexpr std::uint64_t kMaxTableRange = std::uint64_t{1} << 22;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

/// x^-a divided by the Pareto mass on [x, x+1), up to the constant (a - 1).
double mass_ratio(double x, double a) {
  return 1.0 / (x * -std::expm1((1.0 - a) * std::log1p(1.0 / x)));
}

double standard_normal(Rng& rng) {
  // Box-Muller; 1 - u keeps the logarithm finite.
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace

DiscretePowerLaw::DiscretePowerLaw(double alpha, std::uint64_t xmin, std::optional<std::uint64_t> xmax)
    : alpha_(alpha), xmin_(xmin), xmax_(xmax) {
  if (xmin < 1 || (xmax && *xmax < xmin)) {
    fail(ErrorKind::invalid_argument, "power-law support must satisfy 1 <= xmin <= xmax");
  }
  if (!xmax && !(alpha > 1.0)) {
    fail(ErrorKind::invalid_argument, "unbounded power law needs alpha > 1");
  }
  if (xmax && *xmax - xmin < kMaxTableRange) {
    cdf_.resize(*xmax - xmin + 1);
    double acc = 0.0;
    for (std::uint64_t x = xmin; x <= *xmax; ++x) {
      acc += std::pow(static_cast<double>(x), -alpha);
      cdf_[x - xmin] = acc;
    }
  } else if (!(alpha > 1.0)) {
    fail(ErrorKind::invalid_argument, "power-law range too wide for alpha <= 1");
  } else {
    ratio_at_min_ = mass_ratio(static_cast<double>(xmin), alpha);
  }
}

std::uint64_t DiscretePowerLaw::sample_unbounded(Rng& rng) const {
  const double inv = -1.0 / (alpha_ - 1.0);
  const double start = static_cast<double>(xmin_);
  while (true) {
    const double y = start * std::pow(1.0 - rng.uniform01(), inv);
    if (!(y < 1.8e19)) {
      continue;
    }
    const auto x = static_cast<std::uint64_t>(y);
    if (rng.uniform01() * ratio_at_min_ <= mass_ratio(static_cast<double>(x), alpha_)) {
      return x;
    }
  }
}

std::uint64_t DiscretePowerLaw::operator()(Rng& rng) const {
  if (!cdf_.empty()) {
    const double u = rng.uniform01() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto offset = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                                            static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
    return xmin_ + offset;
  }
  while (true) {
    const std::uint64_t x = sample_unbounded(rng);
    if (!xmax_ || x <= *xmax_) {
      return x;
    }
  }
}

DirectedGraph gen_graph(const GraphSpec& spec) {
  const std::size_t n = spec.node_count;
  if (n < 10) {
    fail(ErrorKind::invalid_argument, "synthetic graphs need at least 10 nodes");
  }
  if (n > std::numeric_limits<NodeId>::max()) {
    fail(ErrorKind::invalid_argument, "node count exceeds the 32-bit id space");
  }
  if (!(spec.target_in_exponent > 1.0)) {
    fail(ErrorKind::invalid_argument, "in-degree exponent must exceed 1");
  }
  if (!(spec.reciprocity_target >= 0.0 && spec.reciprocity_target <= 1.0)) {
    fail(ErrorKind::invalid_argument, "reciprocity target must lie in [0, 1]");
  }
  if (spec.min_in_degree < 1 || spec.min_in_degree > n - 1) {
    fail(ErrorKind::invalid_argument, "minimum in-degree must lie in [1, N - 1]");
  }

  Rng rng(spec.rng_seed);
  const DiscretePowerLaw in_degree(spec.target_in_exponent, spec.min_in_degree, n - 1);

  std::vector<Edge> edges;
  std::vector<std::uint32_t> chosen(n, 0);  // stamp == target + 1 marks a chosen source
  for (std::size_t v = 0; v < n; ++v) {
    const std::uint64_t d = in_degree(rng);
    const auto stamp = static_cast<std::uint32_t>(v + 1);
    // Floyd's sampling of d distinct values from the N - 1 candidates != v.
    const std::uint64_t candidates = n - 1;
    for (std::uint64_t j = candidates - d; j < candidates; ++j) {
      std::uint64_t t = rng.uniform_below(j + 1);
      auto to_node = [&](std::uint64_t c) { return static_cast<NodeId>(c >= v ? c + 1 : c); };
      NodeId u = to_node(t);
      if (chosen[u] == stamp) {
        u = to_node(j);
      }
      chosen[u] = stamp;
      edges.push_back({u, static_cast<NodeId>(v)});
    }
  }
  DirectedGraph g = DirectedGraph::from_edges(n, std::move(edges));

  // Reciprocity post-pass: reversing a one-way edge adds one edge and two reciprocated ones.
  std::vector<Edge> one_way;
  EdgeCount mutual = 0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    if (g.has_edge(v, u)) {
      ++mutual;
    } else {
      one_way.push_back({u, v});
    }
  });
  const double m = static_cast<double>(g.edge_count());
  const double t = spec.reciprocity_target;
  const double current = m > 0 ? static_cast<double>(mutual) / m : 0.0;
  if (current > t + kReciprocityTolerance) {
    fail(ErrorKind::invalid_argument, "reciprocity target " + std::to_string(t) +
                                          " unattainable: base graph already has " + std::to_string(current));
  }
  const double needed = std::ceil((t * m - static_cast<double>(mutual)) / (2.0 - t));
  const auto additions = static_cast<std::size_t>(std::clamp(needed, 0.0, static_cast<double>(one_way.size())));
  if (additions > 0) {
    std::vector<Edge> all = g.edges();
    for (std::size_t i = 0; i < additions; ++i) {
      const std::size_t j = i + rng.uniform_below(one_way.size() - i);
      std::swap(one_way[i], one_way[j]);
      all.push_back({one_way[i].target, one_way[i].source});
    }
    g = DirectedGraph::from_edges(n, std::move(all));
  }
  const double achieved = g.edge_count() ? reciprocity(g) : 0.0;
  if (std::abs(achieved - t) > kReciprocityTolerance) {
    fail(ErrorKind::invalid_argument, "reciprocity target " + std::to_string(t) +
                                          " unattainable; achieved " + std::to_string(achieved));
  }
  return g;
}

std::vector<ForwardRecord> gen_cascade_records(const DirectedGraph& g, const CascadeSpec& spec) {
  if (spec.source >= g.node_count()) {
    fail(ErrorKind::invalid_argument, "cascade source is not a node of the graph");
  }
  if (!(spec.forward_probability > 0.0 && spec.forward_probability <= 1.0)) {
    fail(ErrorKind::invalid_argument, "forward probability must lie in (0, 1]");
  }
  if (spec.max_depth < 1) {
    fail(ErrorKind::invalid_argument, "max depth must be at least 1");
  }
  if (!(spec.mean_delay_seconds >= 0.0)) {
    fail(ErrorKind::invalid_argument, "mean delay must be non-negative");
  }

  Rng rng(spec.rng_seed);
  std::vector<ForwardRecord> records;
  std::vector<std::uint32_t> depth;
  std::vector<bool> participated(g.node_count(), false);
  records.push_back({"m0", spec.source, std::nullopt, spec.start_timestamp});
  depth.push_back(0);
  participated[spec.source] = true;

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (depth[i] >= spec.max_depth) {
      continue;
    }
    const NodeId author = records[i].author;
    const std::int64_t parent_time = records[i].timestamp;
    for (NodeId follower : g.in_neighbors(author)) {
      if (participated[follower] || !rng.bernoulli(spec.forward_probability)) {
        continue;
      }
      participated[follower] = true;
      const auto delay = static_cast<std::int64_t>(std::floor(rng.exponential(spec.mean_delay_seconds)));
      records.push_back({"m" + std::to_string(records.size()), follower, records[i].message_id,
                         parent_time + delay});
      depth.push_back(depth[i] + 1);
    }
  }
  return records;
}

Cascade gen_cascade(const DirectedGraph& g, const CascadeSpec& spec) {
  const auto records = gen_cascade_records(g, spec);
  return build_cascade(records);
}

ProfileTable gen_profiles(const DirectedGraph& g, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  ProfileTable table;
  for (auto c : {ProfileColumn::followers, ProfileColumn::followings, ProfileColumn::posts, ProfileColumn::verified,
                 ProfileColumn::gender, ProfileColumn::region, ProfileColumn::reg_month}) {
    table.mark_column(c);
  }
  const std::size_t n = g.node_count();
  for (std::size_t u = 0; u < n; ++u) {
    const auto id = static_cast<NodeId>(u);
    UserProfile p;
    p.follower_count = g.in_degree(id);
    p.following_count = g.out_degree(id);
    const double scale = 3.0 * std::pow(static_cast<double>(p.follower_count) + 1.0, 0.6);
    p.post_count = static_cast<std::int64_t>(std::floor(scale * std::exp(standard_normal(rng))));
    p.verified = rng.bernoulli(0.01);
    const double g_draw = rng.uniform01();
    p.gender = g_draw < 0.45 ? Gender::male : g_draw < 0.9 ? Gender::female : Gender::unknown;
    if (!rng.bernoulli(0.05)) {
      p.region = "R" + std::to_string(rng.uniform_below(34));
    }
    p.registered_month = static_cast<std::int32_t>(rng.uniform_below(36));
    table.set(id, std::move(p));
  }
  return table;
}

} // namespace follownet
