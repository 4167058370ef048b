#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "follownet/graph.hpp"
#include "follownet/profiles.hpp"

namespace follownet {

enum class Direction { in, out };

/// value -> number of samples with that value. Only positive counts are stored.
class DegreeHistogram {
public:
  DegreeHistogram() = default;

  void add(std::uint64_t value, std::uint64_t count = 1) {
    if (count == 0) return;
    counts_[value] += count;
    total_ += count;
  }
  static DegreeHistogram from_samples(std::span<const std::uint64_t> samples);

  const std::map<std::uint64_t, std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }

  friend bool operator==(const DegreeHistogram&, const DegreeHistogram&) = default;

private:
  std::map<std::uint64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Histogram over all N nodes, degree-0 nodes included.
DegreeHistogram degree_histogram(const DirectedGraph& g, Direction direction);

struct CcdfPoint {
  std::uint64_t value;
  /// P[X >= value]
  double probability;
};
using CcdfSeries = std::vector<CcdfPoint>;

CcdfSeries ccdf(const DegreeHistogram& h);

struct PowerLawFit {
  double alpha = 0.0;
  std::uint64_t xmin = 1;
  /// Exclusive upper bound for range-restricted fits; nullopt for the open tail.
  std::optional<std::uint64_t> xmax;
  std::uint64_t sample_count = 0;
  double log_likelihood = 0.0;
  /// Asymptotic standard error from the Fisher information.
  double standard_error = 0.0;
};

inline constexpr std::uint64_t kDefaultXmin = 10;
inline constexpr std::uint64_t kMinFitSamples = 100;

/// Discrete power-law fit above xmin with the (xmin - 1/2) continuity correction:
///
///   alpha = 1 + n / sum_{x_i >= xmin} ln(x_i / (xmin - 1/2))
///
/// `log_likelihood` is that of the continuity-corrected density
/// (alpha-1)/(xmin-1/2) * (x/(xmin-1/2))^-alpha evaluated at the samples, which
/// the closed form maximises.
PowerLawFit fit_power_law(const DegreeHistogram& samples, std::uint64_t xmin = kDefaultXmin);

/// Maximum-likelihood exponent of the discrete power law restricted to
/// [xmin, xmax), normalised over exactly that integer range. The score
/// equation is solved by bisection; the normaliser is summed directly for the
/// first terms and by Euler-Maclaurin beyond.
PowerLawFit fit_bounded_power_law(const DegreeHistogram& samples, std::uint64_t xmin,
                                  std::optional<std::uint64_t> xmax);

struct Breakpoints {
  std::uint64_t first = 1000;
  std::uint64_t second = 10000;
};

struct TwoStageFit {
  PowerLawFit lower;  // [xmin, first)
  PowerLawFit upper;  // [first, second)
  std::uint64_t tail_count = 0;  // samples >= second, excluded from both fits
  double tail_fraction = 0.0;    // tail_count / samples >= xmin
};

/// Fits separate exponents below and above the first breakpoint. Each stage is
/// a range-restricted fit (`fit_bounded_power_law`) so truncation at the
/// breakpoints does not bias the exponents.
TwoStageFit fit_two_stage_power_law(const DegreeHistogram& samples, Breakpoints breakpoints = {},
                                    std::uint64_t xmin = kDefaultXmin);

/// Log-likelihood of the discrete power law on [xmin, xmax) at `alpha`.
double bounded_power_law_log_likelihood(const DegreeHistogram& samples, double alpha, std::uint64_t xmin,
                                        std::optional<std::uint64_t> xmax);

/// Bucketing of the x-axis for bucket curves.
struct Bucketing {
  enum class Mode { logarithmic, exact };
  Mode mode = Mode::logarithmic;
  int bins_per_decade = 10;

  static Bucketing exact() { return {Mode::exact, 0}; }
  static Bucketing logarithmic(int per_decade = 10) { return {Mode::logarithmic, per_decade}; }
};

struct Bucket {
  /// Logarithmic mode: bucket k spans [10^(k/b), 10^((k+1)/b)) and the centre is
  /// the geometric midpoint. Exact mode: low == high == centre == the x value.
  double low = 0.0;
  double high = 0.0;
  double center = 0.0;
  std::uint64_t count = 0;
  /// Median of y (mean of the two middle values for even counts).
  double median = 0.0;
  /// exp(mean ln y) over y > 0; nullopt when every y in the bucket is zero.
  std::optional<double> geometric_mean;
  /// Members with y == 0 (excluded from the geometric mean).
  std::uint64_t zero_count = 0;
};

struct BucketCurve {
  std::vector<Bucket> buckets;
  /// Points whose x cannot be placed (x == 0 under logarithmic bucketing).
  std::uint64_t excluded_count = 0;
};

/// Groups (x, y) points by x and summarises y per bucket. Buckets are ordered
/// by x and only non-empty buckets are emitted.
BucketCurve bucket_curve(std::span<const std::pair<std::uint64_t, std::uint64_t>> points,
                         Bucketing bucketing);

/// Index of the logarithmic bucket holding x > 0.
std::int64_t log_bucket_index(double x, int bins_per_decade) noexcept;

enum class ActivenessAxis { followers, followings };

/// Posts against follower (or following) count.
BucketCurve activeness_curve(const ProfileTable& profiles, ActivenessAxis x_axis,
                             Bucketing bucketing = Bucketing::logarithmic());

struct CohortPoint {
  std::int32_t month;
  std::uint64_t registered_count;
  double avg_followers;
};
using CohortSeries = std::vector<CohortPoint>;

/// Per registration month: number of users and their mean follower count.
CohortSeries cohort_curve(const ProfileTable& profiles);

enum class GroupKey { gender, verified };

struct GroupStat {
  std::uint64_t count = 0;
  double avg_followers = 0.0;
};

/// Group label -> (count, mean followers). Labels: "male", "female", "unknown"
/// for gender; "verified", "unverified" for verification.
std::map<std::string, GroupStat> group_stats(const ProfileTable& profiles, GroupKey key);

} // namespace follownet
