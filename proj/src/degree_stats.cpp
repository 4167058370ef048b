#include "follownet/degree_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "follownet/error.hpp"

namespace follownet {

namespace {

constexpr const char* kModule = "degree_stats";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

/// Moments of x^-alpha over an integer range: sum of x^-a * ln(x)^j for j = 0, 1, 2.
struct PowerSums {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
};

constexpr std::uint64_t kDirectTerms = 2000;

/// Antiderivative of x^-a ln(x)^j, j = 0..2, for the unbounded tail (a > 1).
void power_log_integral(double x, double a, double (&out)[3]) {
  const double l = std::log(x);
  const double b = 1.0 - a;
  const double p = std::pow(x, b);
  out[0] = p / b;
  out[1] = p * (l / b - 1.0 / (b * b));
  out[2] = p * (l * l / b - 2.0 * l / (b * b) + 2.0 / (b * b * b));
}

/// Integral of x^-a ln(x)^j over [lo, hi], j = 0..2, by composite
/// Gauss-Legendre in t = ln x. The closed form cancels badly near a = 1.
void power_log_integral_between(double lo, double hi, double a, double (&out)[3]) {
  static constexpr double nodes[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                      0.8611363115940526};
  static constexpr double weights[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                        0.3478548451374538};
  constexpr int panels = 256;
  const double t0 = std::log(lo);
  const double width = (std::log(hi) - t0) / panels;
  out[0] = out[1] = out[2] = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double mid = t0 + (i + 0.5) * width;
    for (int q = 0; q < 4; ++q) {
      const double t = mid + 0.5 * width * nodes[q];
      // dx = x dt, so the integrand is x^(1-a) t^j.
      const double w = 0.5 * width * weights[q] * std::exp((1.0 - a) * t);
      out[0] += w;
      out[1] += w * t;
      out[2] += w * t * t;
    }
  }
}

/// f(x) and f'(x) for f = x^-a ln(x)^j, j = 0..2.
void power_log_terms(double x, double a, double (&f)[3], double (&df)[3]) {
  const double l = std::log(x);
  const double p = std::pow(x, -a);
  f[0] = p;
  f[1] = p * l;
  f[2] = p * l * l;
  const double q = p / x;
  df[0] = -a * q;
  df[1] = q * (1.0 - a * l);
  df[2] = q * (2.0 * l - a * l * l);
}

/// Sums over x in [lo, hi) (hi == nullopt means unbounded; requires a > 1).
PowerSums power_sums(double a, std::uint64_t lo, std::optional<std::uint64_t> hi) {
  PowerSums s;
  const std::uint64_t direct_end =
      hi ? std::min<std::uint64_t>(*hi, lo + kDirectTerms) : lo + kDirectTerms;
  for (std::uint64_t x = lo; x < direct_end; ++x) {
    const double xd = static_cast<double>(x);
    const double l = std::log(xd);
    const double p = std::pow(xd, -a);
    s.s0 += p;
    s.s1 += p * l;
    s.s2 += p * l * l;
  }
  if (hi && direct_end >= *hi) {
    return s;
  }
  // Euler-Maclaurin for x in [A, B]: integral + (f(A) + f(B))/2 + (f'(B) - f'(A))/12.
  const double A = static_cast<double>(direct_end);
  double integral[3], fa[3], dfa[3];
  power_log_terms(A, a, fa, dfa);
  double fb[3] = {0, 0, 0}, dfb[3] = {0, 0, 0};
  if (hi) {
    const double B = static_cast<double>(*hi - 1);
    power_log_integral_between(A, B, a, integral);
    power_log_terms(B, a, fb, dfb);
  } else {
    power_log_integral(A, a, integral);
    for (double& v : integral) v = -v;
  }
  double tail[3];
  for (int j = 0; j < 3; ++j) {
    tail[j] = integral[j] + (fa[j] + fb[j]) / 2.0 + (dfb[j] - dfa[j]) / 12.0;
  }
  s.s0 += tail[0];
  s.s1 += tail[1];
  s.s2 += tail[2];
  return s;
}

struct RangeSample {
  std::uint64_t n = 0;
  double sum_log = 0.0;
  bool all_at_min = true;
  bool all_at_max = true;
};

RangeSample collect(const DegreeHistogram& h, std::uint64_t lo, std::optional<std::uint64_t> hi) {
  RangeSample r;
  for (auto it = h.counts().lower_bound(lo); it != h.counts().end(); ++it) {
    const auto [x, c] = *it;
    if (hi && x >= *hi) {
      break;
    }
    r.n += c;
    r.sum_log += static_cast<double>(c) * std::log(static_cast<double>(x));
    if (x != lo) r.all_at_min = false;
    if (!hi || x + 1 != *hi) r.all_at_max = false;
  }
  return r;
}

double bucket_lower(std::int64_t k, int per_decade) {
  return std::pow(10.0, static_cast<double>(k) / per_decade);
}

double median_of_sorted(const std::vector<std::uint64_t>& ys) {
  const std::size_t n = ys.size();
  if (n % 2 == 1) {
    return static_cast<double>(ys[n / 2]);
  }
  return (static_cast<double>(ys[n / 2 - 1]) + static_cast<double>(ys[n / 2])) / 2.0;
}

Bucket summarize(std::vector<std::uint64_t>& ys) {
  std::sort(ys.begin(), ys.end());
  Bucket b;
  b.count = ys.size();
  b.median = median_of_sorted(ys);
  double sum_log = 0.0;
  std::uint64_t positive = 0;
  for (auto y : ys) {
    if (y == 0) {
      ++b.zero_count;
    } else {
      sum_log += std::log(static_cast<double>(y));
      ++positive;
    }
  }
  if (positive > 0) {
    b.geometric_mean = std::exp(sum_log / static_cast<double>(positive));
  }
  return b;
}

} // namespace

DegreeHistogram DegreeHistogram::from_samples(std::span<const std::uint64_t> samples) {
  DegreeHistogram h;
  for (auto s : samples) {
    h.add(s);
  }
  return h;
}

DegreeHistogram degree_histogram(const DirectedGraph& g, Direction direction) {
  std::vector<std::uint64_t> per_degree;
  const std::size_t n = g.node_count();
  for (std::size_t u = 0; u < n; ++u) {
    const auto id = static_cast<NodeId>(u);
    const std::uint64_t d = direction == Direction::in ? g.in_degree(id) : g.out_degree(id);
    if (d >= per_degree.size()) {
      per_degree.resize(d + 1, 0);
    }
    ++per_degree[d];
  }
  DegreeHistogram h;
  for (std::size_t d = 0; d < per_degree.size(); ++d) {
    h.add(d, per_degree[d]);
  }
  return h;
}

CcdfSeries ccdf(const DegreeHistogram& h) {
  if (h.empty()) {
    fail(ErrorKind::empty_input, "CCDF of an empty histogram");
  }
  CcdfSeries out;
  out.reserve(h.counts().size());
  const double total = static_cast<double>(h.total());
  std::uint64_t at_least = h.total();
  for (const auto& [value, count] : h.counts()) {
    out.push_back({value, static_cast<double>(at_least) / total});
    at_least -= count;
  }
  return out;
}

PowerLawFit fit_power_law(const DegreeHistogram& samples, std::uint64_t xmin) {
  if (xmin < 1) {
    fail(ErrorKind::invalid_argument, "xmin must be at least 1");
  }
  const double shift = static_cast<double>(xmin) - 0.5;
  std::uint64_t n = 0;
  double log_sum = 0.0;
  bool all_at_min = true;
  for (auto it = samples.counts().lower_bound(xmin); it != samples.counts().end(); ++it) {
    n += it->second;
    log_sum += static_cast<double>(it->second) * std::log(static_cast<double>(it->first) / shift);
    if (it->first != xmin) {
      all_at_min = false;
    }
  }
  if (n < kMinFitSamples) {
    fail(ErrorKind::insufficient_data, "power-law fit needs at least " + std::to_string(kMinFitSamples) +
                                           " samples >= xmin, got " + std::to_string(n));
  }
  if (all_at_min) {
    fail(ErrorKind::degenerate, "every sample equals xmin; exponent is undefined");
  }
  const double nd = static_cast<double>(n);
  PowerLawFit fit;
  fit.alpha = 1.0 + nd / log_sum;
  fit.xmin = xmin;
  fit.sample_count = n;
  fit.log_likelihood = nd * std::log(fit.alpha - 1.0) - nd * std::log(shift) - fit.alpha * log_sum;
  fit.standard_error = (fit.alpha - 1.0) / std::sqrt(nd);
  return fit;
}

double bounded_power_law_log_likelihood(const DegreeHistogram& samples, double alpha, std::uint64_t xmin,
                                        std::optional<std::uint64_t> xmax) {
  const RangeSample r = collect(samples, xmin, xmax);
  const PowerSums s = power_sums(alpha, xmin, xmax);
  return -alpha * r.sum_log - static_cast<double>(r.n) * std::log(s.s0);
}

PowerLawFit fit_bounded_power_law(const DegreeHistogram& samples, std::uint64_t xmin,
                                  std::optional<std::uint64_t> xmax) {
  if (xmin < 1 || (xmax && *xmax <= xmin + 1)) {
    fail(ErrorKind::invalid_argument, "fit range must contain at least two integers starting at 1 or above");
  }
  const RangeSample r = collect(samples, xmin, xmax);
  if (r.n < kMinFitSamples) {
    fail(ErrorKind::insufficient_data, "power-law fit needs at least " + std::to_string(kMinFitSamples) +
                                           " samples in range, got " + std::to_string(r.n));
  }
  if (r.all_at_min || (xmax && r.all_at_max)) {
    fail(ErrorKind::degenerate, "every sample sits on a range boundary; exponent is undefined");
  }
  const double mean_log = r.sum_log / static_cast<double>(r.n);
  // Score: E_alpha[ln x] - mean_log, strictly decreasing in alpha.
  auto score = [&](double a) {
    const PowerSums s = power_sums(a, xmin, xmax);
    return s.s1 / s.s0 - mean_log;
  };
  double lo = 1.0 + 1e-9;
  double hi = 50.0;
  if (score(lo) <= 0.0) {
    fail(ErrorKind::degenerate, "maximum-likelihood exponent is not above 1");
  }
  if (score(hi) >= 0.0) {
    fail(ErrorKind::degenerate, "maximum-likelihood exponent exceeds 50");
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (score(mid) > 0.0 ? lo : hi) = mid;
  }
  PowerLawFit fit;
  fit.alpha = 0.5 * (lo + hi);
  fit.xmin = xmin;
  fit.xmax = xmax;
  fit.sample_count = r.n;
  const PowerSums s = power_sums(fit.alpha, xmin, xmax);
  fit.log_likelihood = -fit.alpha * r.sum_log - static_cast<double>(r.n) * std::log(s.s0);
  const double mean = s.s1 / s.s0;
  const double variance = s.s2 / s.s0 - mean * mean;
  fit.standard_error = 1.0 / std::sqrt(static_cast<double>(r.n) * variance);
  return fit;
}

TwoStageFit fit_two_stage_power_law(const DegreeHistogram& samples, Breakpoints breakpoints,
                                    std::uint64_t xmin) {
  if (!(xmin < breakpoints.first && breakpoints.first < breakpoints.second)) {
    fail(ErrorKind::invalid_argument, "two-stage fit needs xmin < first breakpoint < second breakpoint");
  }
  TwoStageFit result;
  auto stage = [&](const char* name, std::uint64_t lo, std::uint64_t hi) {
    try {
      return fit_bounded_power_law(samples, lo, hi);
    } catch (const Error& e) {
      throw Error(e.kind(), kModule, std::string(name) + ": " + e.what());
    }
  };
  result.lower = stage("stage 1", xmin, breakpoints.first);
  result.upper = stage("stage 2", breakpoints.first, breakpoints.second);
  std::uint64_t qualifying = 0;
  for (auto it = samples.counts().lower_bound(xmin); it != samples.counts().end(); ++it) {
    qualifying += it->second;
    if (it->first >= breakpoints.second) {
      result.tail_count += it->second;
    }
  }
  result.tail_fraction = static_cast<double>(result.tail_count) / static_cast<double>(qualifying);
  return result;
}

std::int64_t log_bucket_index(double x, int bins_per_decade) noexcept {
  // The small offset keeps exact bucket boundaries (e.g. x = 10) in the upper bucket.
  return static_cast<std::int64_t>(std::floor(std::log10(x) * bins_per_decade + 1e-9));
}

BucketCurve bucket_curve(std::span<const std::pair<std::uint64_t, std::uint64_t>> points,
                         Bucketing bucketing) {
  if (bucketing.mode == Bucketing::Mode::logarithmic && bucketing.bins_per_decade < 1) {
    fail(ErrorKind::invalid_argument, "bins per decade must be positive");
  }
  std::vector<std::pair<std::int64_t, std::uint64_t>> keyed;
  keyed.reserve(points.size());
  BucketCurve curve;
  for (const auto& [x, y] : points) {
    if (bucketing.mode == Bucketing::Mode::exact) {
      keyed.emplace_back(static_cast<std::int64_t>(x), y);
    } else if (x == 0) {
      ++curve.excluded_count;
    } else {
      keyed.emplace_back(log_bucket_index(static_cast<double>(x), bucketing.bins_per_decade), y);
    }
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::uint64_t> ys;
  for (std::size_t i = 0; i < keyed.size();) {
    const std::int64_t key = keyed[i].first;
    ys.clear();
    for (; i < keyed.size() && keyed[i].first == key; ++i) {
      ys.push_back(keyed[i].second);
    }
    Bucket b = summarize(ys);
    if (bucketing.mode == Bucketing::Mode::exact) {
      b.low = b.high = b.center = static_cast<double>(key);
    } else {
      b.low = bucket_lower(key, bucketing.bins_per_decade);
      b.high = bucket_lower(key + 1, bucketing.bins_per_decade);
      b.center = std::sqrt(b.low * b.high);
    }
    curve.buckets.push_back(b);
  }
  return curve;
}

BucketCurve activeness_curve(const ProfileTable& profiles, ActivenessAxis x_axis, Bucketing bucketing) {
  if (profiles.empty()) {
    fail(ErrorKind::empty_input, "activeness curve needs at least one profile");
  }
  const ProfileColumn x_col =
      x_axis == ActivenessAxis::followers ? ProfileColumn::followers : ProfileColumn::followings;
  if (!profiles.has_column(x_col) || !profiles.has_column(ProfileColumn::posts)) {
    fail(ErrorKind::invalid_argument, "activeness curve needs the posts and x-axis profile columns");
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> points;
  bool any_positive = false;
  profiles.for_each([&](NodeId, const UserProfile& p) {
    const auto x = static_cast<std::uint64_t>(x_axis == ActivenessAxis::followers ? p.follower_count
                                                                                  : p.following_count);
    any_positive = any_positive || x > 0;
    points.emplace_back(x, static_cast<std::uint64_t>(p.post_count));
  });
  if (!any_positive) {
    fail(ErrorKind::insufficient_data, "no user has a positive x value");
  }
  return bucket_curve(points, bucketing);
}

CohortSeries cohort_curve(const ProfileTable& profiles) {
  std::map<std::int32_t, std::pair<std::uint64_t, std::int64_t>> months;
  profiles.for_each([&](NodeId, const UserProfile& p) {
    if (p.registered_month) {
      auto& [count, sum] = months[*p.registered_month];
      ++count;
      sum += p.follower_count;
    }
  });
  CohortSeries out;
  out.reserve(months.size());
  for (const auto& [month, agg] : months) {
    out.push_back({month, agg.first, static_cast<double>(agg.second) / static_cast<double>(agg.first)});
  }
  return out;
}

std::map<std::string, GroupStat> group_stats(const ProfileTable& profiles, GroupKey key) {
  if (profiles.empty()) {
    fail(ErrorKind::empty_input, "group statistics need at least one profile");
  }
  std::map<std::string, std::pair<std::uint64_t, std::int64_t>> groups;
  profiles.for_each([&](NodeId, const UserProfile& p) {
    std::string label;
    if (key == GroupKey::verified) {
      label = p.verified ? "verified" : "unverified";
    } else {
      label = p.gender == Gender::male ? "male" : p.gender == Gender::female ? "female" : "unknown";
    }
    auto& [count, sum] = groups[label];
    ++count;
    sum += p.follower_count;
  });
  std::map<std::string, GroupStat> out;
  for (const auto& [label, agg] : groups) {
    out[label] = {agg.first, static_cast<double>(agg.second) / static_cast<double>(agg.first)};
  }
  return out;
}

} // namespace follownet
