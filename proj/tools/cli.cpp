#include "cli.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "follownet/degree_stats.hpp"
#include "follownet/error.hpp"
#include "follownet/graph.hpp"
#include "follownet/parallel.hpp"
#include "follownet/preference.hpp"
#include "follownet/profiles.hpp"
#include "follownet/propagation.hpp"
#include "follownet/ranking.hpp"
#include "follownet/separation.hpp"
#include "follownet/synthgen.hpp"

namespace follownet::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kModule = "cli";
constexpr const char* kToolVersion = "1.0.0";
constexpr int kSchemaVersion = 1;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t peak_rss_bytes() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<std::uint64_t>(usage.ru_maxrss) * 1024;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorKind::io, "cannot open input file '" + path + "'");
  }
  return in;
}

/// Output directory, artifact hashes and the run manifest.
class Run {
public:
  Run(std::string command, std::string out_dir) : command_(std::move(command)), dir_(std::move(out_dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      fail(ErrorKind::io, "cannot create output directory '" + dir_.string() + "'");
    }
    start_ = std::chrono::steady_clock::now();
  }

  json& params() { return params_; }

  void input(const std::string& role, const std::string& path) {
    std::ifstream in = open_input(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::uint64_t size = 0;
    std::vector<char> buf(1 << 20);
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      const auto got = static_cast<std::size_t>(in.gcount());
      h = fnv1a({buf.data(), got}, h);
      size += got;
    }
    inputs_.push_back({{"role", role}, {"path", path}, {"bytes", size}, {"fnv1a64", hex64(h)}});
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      fail(ErrorKind::io, "cannot write '" + path.string() + "'");
    }
    outputs_[name] = {{"bytes", content.size()}, {"fnv1a64", hex64(fnv1a(content))}};
  }

  void write_json(const std::string& name, json body) {
    json doc{{"schema_version", kSchemaVersion}};
    for (auto& [k, v] : body.items()) doc[k] = v;
    write(name, doc.dump(2) + "\n");
  }

  void note_skipped(const std::string& what, const Error& e) {
    skipped_.push_back({{"measurement", what}, {"kind", to_string(e.kind())}, {"module", e.module()},
                        {"message", e.what()}});
  }
  const json& skipped() const { return skipped_; }

  void finish(std::ostream& out) {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json outputs = json::array();
    for (const auto& [name, info] : outputs_) {
      json entry{{"file", name}};
      for (auto& [k, v] : info.items()) entry[k] = v;
      outputs.push_back(entry);
    }
    json manifest{{"schema_version", kSchemaVersion},
                  {"tool", "follownet"},
                  {"version", kToolVersion},
                  {"command", command_},
                  {"parameters", params_},
                  {"inputs", inputs_},
                  {"outputs", outputs},
                  {"skipped", skipped_},
                  {"versions",
                   {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
                    {"compiler", __VERSION__}}},
                  {"wall_time_seconds", seconds},
                  {"peak_rss_bytes", peak_rss_bytes()}};
    const std::string text = manifest.dump(2) + "\n";
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << text;
    out << "wrote " << outputs_.size() << " artifacts to " << dir_.string() << " in " << num(seconds) << " s\n";
  }

private:
  std::string command_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  json params_ = json::object();
  json inputs_ = json::array();
  json skipped_ = json::array();
  std::map<std::string, json> outputs_;
};

/// CSV text with the schema comment and a header row.
class Csv {
public:
  explicit Csv(std::initializer_list<std::string_view> columns) {
    s_ << "# schema_version: " << kSchemaVersion << "\n";
    row_of(columns);
  }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((s_ << (first ? "" : ",") << cell(cells), first = false), ...);
    s_ << "\n";
  }
  std::string str() const { return s_.str(); }

private:
  void row_of(std::initializer_list<std::string_view> cells) {
    bool first = true;
    for (auto c : cells) {
      s_ << (first ? "" : ",") << c;
      first = false;
    }
    s_ << "\n";
  }
  static std::string cell(double v) { return num(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(std::string_view v) { return std::string(v); }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) { return std::to_string(v); }
  static std::string cell(const std::optional<double>& v) { return v ? num(*v) : ""; }

  std::ostringstream s_;
};

// ---------------------------------------------------------------------------
// Options

struct Common {
  std::string edges;
  std::string profiles;
  std::string cascade;
  std::string out;
  unsigned threads = 0;
  std::uint64_t seed = 1;
  bool strict = false;
  std::uint64_t max_memory_mb = 0;
};

struct Params {
  std::uint32_t seeds = kDefaultSeedCount;
  double damping = 0.85;
  double tol = 1e-10;
  int max_iter = 200;
  std::vector<std::size_t> ks;
  std::string ebr_metric = "followers";
  int buckets = 10;
  std::uint64_t xmin = kDefaultXmin;
  std::vector<std::uint64_t> breakpoints{1000, 10000};
  std::string direction = "both";
  std::size_t k = 20;
  std::string scores;
  std::string first;
  std::string second;
  std::uint64_t threshold = kDefaultCriticalThreshold;
  std::int64_t bin = kDefaultDelayBinSeconds;
  bool similarity_log = false;
  // synth
  std::size_t nodes = 1000;
  double exponent = 2.3336;
  double reciprocity = 0.203;
  std::uint64_t min_in_degree = 1;
  std::string source;
  double prob = 0.1;
  std::uint32_t max_depth = 10;
  double mean_delay = 1800.0;
  std::int64_t start = 0;
};

unsigned thread_count(const Common& c) {
  return c.threads == 0 ? default_thread_count() : c.threads;
}

std::vector<std::size_t> default_ks() {
  std::vector<std::size_t> ks;
  for (std::size_t k = 10; k <= 1000; k += 10) ks.push_back(k);
  return ks;
}

// ---------------------------------------------------------------------------
// Loading

struct LoadedGraph {
  DirectedGraph graph;
  IdMap ids;
};

LoadedGraph load_graph(const Common& c, Run& run, json* ingest_report = nullptr) {
  if (c.edges.empty()) {
    fail(ErrorKind::invalid_argument, "--edges is required");
  }
  run.input("edges", c.edges);
  const std::uint64_t budget = c.max_memory_mb * 1024 * 1024;
  LoadedGraph lg;
  if (fs::path(c.edges).extension() == ".fng") {
    std::ifstream in = open_input(c.edges);
    lg.graph = read_snapshot(in);
    if (budget != 0 && graph_memory_bytes(lg.graph.node_count(), lg.graph.edge_count()) > budget) {
      fail(ErrorKind::resource_limit, "snapshot exceeds memory budget of " + std::to_string(c.max_memory_mb) + " MB");
    }
    const std::string ids_path = c.edges + ".ids";
    if (fs::exists(ids_path)) {
      std::ifstream ids_in = open_input(ids_path);
      lg.ids = IdMap::read(ids_in);
      if (lg.ids.size() != lg.graph.node_count()) {
        fail(ErrorKind::malformed_input, "id file '" + ids_path + "' does not match the snapshot node count");
      }
    } else {
      lg.ids = IdMap::sequential(lg.graph.node_count());
    }
    return lg;
  }
  std::ifstream in = open_input(c.edges);
  IngestResult r = ingest_edges(in, {.strict = c.strict, .memory_budget_bytes = budget});
  if (ingest_report) {
    const auto& s = r.summary;
    *ingest_report = {{"lines_read", s.lines_read},
                      {"comment_lines", s.comment_lines},
                      {"blank_lines", s.blank_lines},
                      {"malformed_lines", s.malformed_lines},
                      {"malformed_line_numbers", s.malformed_line_numbers},
                      {"duplicates_dropped", s.duplicates_dropped},
                      {"self_loops_dropped", s.self_loops_dropped},
                      {"node_count", s.node_count},
                      {"edge_count", s.edge_count}};
  }
  lg.graph = std::move(r.graph);
  lg.ids = std::move(r.ids);
  return lg;
}

std::optional<ProfileTable> load_profiles(const Common& c, Run& run, IdMap& ids, json* report = nullptr) {
  if (c.profiles.empty()) {
    return std::nullopt;
  }
  run.input("profiles", c.profiles);
  std::ifstream in = open_input(c.profiles);
  auto r = ingest_profiles(in, ids, {.strict = c.strict});
  if (report) {
    const auto& s = r.summary;
    *report = {{"rows_read", s.rows_read},           {"rows_accepted", s.rows_accepted},
               {"duplicate_ids", s.duplicate_ids},   {"orphans_skipped", s.orphans_skipped},
               {"rejected_rows", s.rejected_rows},   {"rejected_line_numbers", s.rejected_line_numbers}};
  }
  return std::move(r.table);
}

/// Reads `node,score` rows (extra columns ignored, '#' comments and a header
/// starting with "node" skipped).
ScoreVector read_scores(const std::string& path, Run& run, const std::string& role, IdMap& ids, bool extend) {
  run.input(role, path);
  std::ifstream in = open_input(path);
  std::vector<std::optional<double>> values(ids.size());
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("node", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      fail(ErrorKind::malformed_input, path + ": line " + std::to_string(line_no) + " is not 'node,score'");
    }
    const std::string name = line.substr(0, comma);
    const auto end = line.find(',', comma + 1);
    const std::string value = line.substr(comma + 1, end == std::string::npos ? std::string::npos : end - comma - 1);
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
      fail(ErrorKind::malformed_input, path + ": line " + std::to_string(line_no) + " has a non-numeric score");
    }
    std::optional<NodeId> id = ids.find(name);
    if (!id) {
      if (!extend) {
        fail(ErrorKind::invalid_argument, path + ": node '" + name + "' is not in the node set");
      }
      id = ids.intern(name);
      values.resize(ids.size());
    }
    values[*id] = v;
  }
  ScoreVector s(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) {
      fail(ErrorKind::invalid_argument, path + ": no score for node '" + ids.name(static_cast<NodeId>(i)) + "'");
    }
    s[static_cast<Eigen::Index>(i)] = *values[i];
  }
  return s;
}

ScoreVector in_degree_scores(const DirectedGraph& g) {
  ScoreVector s(static_cast<Eigen::Index>(g.node_count()));
  for (NodeId u = 0; u < g.node_count(); ++u) s[u] = static_cast<double>(g.in_degree(u));
  return s;
}

std::vector<std::uint64_t> in_degrees(const DirectedGraph& g) {
  std::vector<std::uint64_t> d(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) d[u] = g.in_degree(u);
  return d;
}

// ---------------------------------------------------------------------------
// Measurement writers

std::string histogram_csv(const DegreeHistogram& h) {
  Csv csv{"value", "count"};
  for (const auto& [v, c] : h.counts()) csv.row(v, c);
  return csv.str();
}

std::string ccdf_csv(const CcdfSeries& s) {
  Csv csv{"value", "ccdf"};
  for (const auto& p : s) csv.row(p.value, p.probability);
  return csv.str();
}

json fit_json(const PowerLawFit& f) {
  json j{{"alpha", f.alpha}, {"xmin", f.xmin}};
  j["xmax"] = f.xmax ? json(*f.xmax) : json(nullptr);
  j["sample_count"] = f.sample_count;
  j["log_likelihood"] = f.log_likelihood;
  j["standard_error"] = f.standard_error;
  return j;
}

json error_json(const Error& e) {
  return {{"error", {{"kind", to_string(e.kind())}, {"module", e.module()}, {"message", e.what()}}}};
}

std::string curve_csv(const BucketCurve& c) {
  Csv csv{"center", "low", "high", "count", "median", "geometric_mean", "zero_count"};
  for (const auto& b : c.buckets) csv.row(b.center, b.low, b.high, b.count, b.median, b.geometric_mean, b.zero_count);
  return csv.str();
}

Bucketing log_buckets(const Params& p) {
  if (p.buckets < 1) {
    fail(ErrorKind::invalid_argument, "--buckets must be at least 1");
  }
  return Bucketing::logarithmic(p.buckets);
}

void write_stats(Run& run, const DirectedGraph& g, const std::optional<ProfileTable>& profiles, const Params& p) {
  if (p.breakpoints.size() != 2) {
    fail(ErrorKind::invalid_argument, "--breakpoints takes exactly two values");
  }
  if (p.direction != "in" && p.direction != "out" && p.direction != "both") {
    fail(ErrorKind::invalid_argument, "--direction must be in, out or both");
  }
  json fits = json::object();
  for (const auto& [dir, name] : {std::pair{Direction::in, "in"}, std::pair{Direction::out, "out"}}) {
    if (p.direction != "both" && p.direction != name) continue;
    const DegreeHistogram h = degree_histogram(g, dir);
    run.write(std::string("degree_") + name + ".csv", histogram_csv(h));
    run.write(std::string("ccdf_") + name + ".csv", ccdf_csv(ccdf(h)));
    json entry;
    try {
      entry["single"] = fit_json(fit_power_law(h, p.xmin));
    } catch (const Error& e) {
      entry["single"] = error_json(e);
    }
    try {
      const auto two = fit_two_stage_power_law(h, {p.breakpoints[0], p.breakpoints[1]}, p.xmin);
      entry["two_stage"] = {{"lower", fit_json(two.lower)},
                            {"upper", fit_json(two.upper)},
                            {"tail_count", two.tail_count},
                            {"tail_fraction", two.tail_fraction}};
    } catch (const Error& e) {
      entry["two_stage"] = error_json(e);
    }
    fits[name] = entry;
  }
  run.write_json("fits.json", {{"fits", fits}});

  if (!profiles) return;
  const Bucketing b = log_buckets(p);
  for (const auto& [axis, name] : {std::pair{ActivenessAxis::followers, "followers"},
                                   std::pair{ActivenessAxis::followings, "followings"}}) {
    try {
      run.write(std::string("activeness_") + name + ".csv", curve_csv(activeness_curve(*profiles, axis, b)));
    } catch (const Error& e) {
      run.note_skipped(std::string("activeness_") + name, e);
    }
  }
  if (profiles->has_column(ProfileColumn::reg_month)) {
    Csv csv{"month", "registered_count", "avg_followers"};
    for (const auto& c : cohort_curve(*profiles)) csv.row(c.month, c.registered_count, c.avg_followers);
    run.write("cohort.csv", csv.str());
  }
  json groups = json::object();
  for (const auto& [key, name] : {std::pair{GroupKey::gender, "gender"}, std::pair{GroupKey::verified, "verified"}}) {
    if (!profiles->has_column(key == GroupKey::gender ? ProfileColumn::gender : ProfileColumn::verified)) continue;
    json g2 = json::object();
    for (const auto& [label, stat] : group_stats(*profiles, key)) {
      g2[label] = {{"count", stat.count}, {"avg_followers", stat.avg_followers}};
    }
    groups[name] = g2;
  }
  if (!groups.empty()) run.write_json("groups.json", {{"groups", groups}});
}

json separation_json(const DistanceHistogram& h, const DirectedGraph& mutual) {
  return {{"seed_count", h.seed_count},
          {"reachable_pairs", h.reachable_pairs()},
          {"unreachable_pairs", h.unreachable_count},
          {"average_distance", average_distance(h)},
          {"effective_diameter", effective_diameter(h, 0.9)},
          {"mutual_edges", mutual.edge_count()}};
}

void write_separation(Run& run, const DirectedGraph& g, const Common& c, const Params& p, bool clamp_seeds) {
  const DirectedGraph mutual = mutual_subgraph(g);
  std::uint32_t seeds = p.seeds;
  if (clamp_seeds) seeds = static_cast<std::uint32_t>(std::min<std::size_t>(seeds, mutual.node_count()));
  run.params()["seeds_used"] = seeds;
  const auto h = snowball_distances(mutual, {.seed_count = seeds, .rng_seed = c.seed, .threads = thread_count(c)});
  Csv csv{"distance", "count", "fraction", "cumulative"};
  const double total = static_cast<double>(h.reachable_pairs());
  std::uint64_t cumulative = 0;
  for (const auto& [d, n] : h.counts) {
    cumulative += n;
    csv.row(d, n, static_cast<double>(n) / total, static_cast<double>(cumulative) / total);
  }
  run.write("distance_histogram.csv", csv.str());
  if (h.empty()) {
    run.write_json("separation.json", {{"seed_count", h.seed_count}, {"reachable_pairs", 0},
                                       {"unreachable_pairs", h.unreachable_count}});
    return;
  }
  run.write_json("separation.json", separation_json(h, mutual));
}

std::string ebr_csv(const EbrHistogram& h) {
  Csv csv{"bin", "bin_low", "bin_high", "count", "fraction"};
  const double total = static_cast<double>(h.total());
  csv.row("ZERO", 0.0, 0.0, h.zero_count, static_cast<double>(h.zero_count) / total);
  for (const auto& [k, n] : h.bins) csv.row(k, h.bin_low(k), h.bin_high(k), n, static_cast<double>(n) / total);
  csv.row("INF", "inf", "inf", h.infinite_count, static_cast<double>(h.infinite_count) / total);
  return csv.str();
}

std::string bound_label(std::uint64_t b) {
  return b == kUnboundedFollowers ? "inf" : std::to_string(b);
}

std::string matrix_csv(const FollowingMatrix& m) {
  std::ostringstream s;
  s << "# schema_version: " << kSchemaVersion << "\n";
  s << "source_group";
  for (int j = 0; j < 7; ++j) s << ",[" << bound_label(m.bounds[j]) << ";" << bound_label(m.bounds[j + 1]) << ")";
  s << "\n";
  for (int i = 0; i < 7; ++i) {
    s << "[" << bound_label(m.bounds[i]) << ";" << bound_label(m.bounds[i + 1]) << ")";
    for (int j = 0; j < 7; ++j) s << "," << m.cells(i, j);
    s << "\n";
  }
  return s.str();
}

json assortativity_json(const AssortativityProfile& a) {
  auto v = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  return {{"r_in_in", v(a.in_in)}, {"r_in_out", v(a.in_out)}, {"r_out_in", v(a.out_in)}, {"r_out_out", v(a.out_out)}};
}

PageRankResult run_pagerank(const DirectedGraph& g, const Common& c, const Params& p) {
  return pagerank(g, {.damping = p.damping, .tolerance = p.tol, .max_iterations = p.max_iter,
                      .threads = thread_count(c)});
}

/// Preference measurements. `pr` is used for the pagerank EBR when given.
void write_preference(Run& run, const DirectedGraph& g, const std::optional<ProfileTable>& profiles,
                      const Params& p, const ScoreVector* pr, bool both_metrics, bool tolerate) {
  auto guarded = [&](const std::string& what, const std::function<void()>& fn) {
    if (!tolerate) return fn();
    try {
      fn();
    } catch (const Error& e) {
      run.note_skipped(what, e);
    }
  };
  guarded("assortativity", [&] { run.write_json("assortativity.json", assortativity_json(assortativity_profile(g))); });
  if (p.buckets < 1) fail(ErrorKind::invalid_argument, "--buckets must be at least 1");
  if (both_metrics || p.ebr_metric == "followers") {
    run.write(both_metrics ? "ebr_followers.csv" : "ebr.csv",
              ebr_csv(edge_balance_histogram(g, EbrMetric::in_degree, nullptr, p.buckets)));
  }
  if (both_metrics || p.ebr_metric == "pagerank") {
    run.write(both_metrics ? "ebr_pagerank.csv" : "ebr.csv",
              ebr_csv(edge_balance_histogram(g, EbrMetric::pagerank, pr, p.buckets)));
  }
  run.write("following_matrix.csv", matrix_csv(following_matrix(g)));
  const DirectedGraph mutual = mutual_subgraph(g);
  guarded("friend_similarity", [&] {
    const Bucketing b = p.similarity_log ? log_buckets(p) : Bucketing::exact();
    run.write("friend_similarity.csv", curve_csv(friend_similarity_curve(mutual, in_degrees(g), b)));
  });
  if (profiles && profiles->has_column(ProfileColumn::region)) {
    guarded("same_region", [&] {
      const auto r = same_region_fraction(mutual, *profiles);
      run.write_json("same_region.json", {{"fraction", r.fraction},
                                          {"eligible_pairs", r.eligible_pairs},
                                          {"same_region_pairs", r.same_region_pairs},
                                          {"excluded_pairs", r.excluded_pairs}});
    });
  }
}

std::string scores_csv(const ScoreVector& s, const IdMap& ids) {
  const TopKList order = rank_order(s);
  std::vector<std::size_t> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
  Csv csv{"node", "score", "rank"};
  for (NodeId u = 0; u < s.size(); ++u) csv.row(ids.name(u), s[u], rank[u]);
  return csv.str();
}

std::string topk_csv(const ScoreVector& s, const IdMap& ids, std::size_t k) {
  Csv csv{"rank", "node", "score"};
  const TopKList top = top_k(s, k);
  for (std::size_t r = 0; r < top.size(); ++r) csv.row(r + 1, ids.name(top[r]), s[top[r]]);
  return csv.str();
}

std::string correlation_csv(const std::vector<CorrelationPoint>& curve) {
  Csv csv{"k", "K0", "K"};
  for (const auto& p : curve) csv.row(p.k, p.k0, p.normalized);
  return csv.str();
}

std::vector<std::size_t> clamp_ks(std::vector<std::size_t> ks, std::size_t n) {
  ks.erase(std::remove_if(ks.begin(), ks.end(), [&](std::size_t k) { return k > n; }), ks.end());
  return ks;
}

std::vector<std::int64_t> follower_counts(std::size_t n, const DirectedGraph* g, const std::optional<ProfileTable>& profiles) {
  std::vector<std::int64_t> f(n, kMissingCount);
  if (g) {
    for (NodeId u = 0; u < g->node_count() && u < n; ++u) f[u] = static_cast<std::int64_t>(g->in_degree(u));
  }
  if (profiles && profiles->has_column(ProfileColumn::followers)) {
    profiles->for_each([&](NodeId u, const UserProfile& row) {
      if (u < n) f[u] = row.follower_count;
    });
  }
  return f;
}

void write_cascade_outputs(Run& run, const Cascade& c, const IdMap& ids, std::span<const std::int64_t> followers,
                           const Params& p, const std::string& which, bool tolerate) {
  const bool all = which == "all";
  if (all || which == "build") {
    const auto fwd = forwarding_numbers(c);
    Csv csv{"message_id", "author", "parent_message_id", "timestamp", "depth", "delay", "forwarding_number"};
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto& m = c.messages()[i];
      csv.row(m.id, ids.name(m.author), m.parent < 0 ? std::string("-") : c.messages()[m.parent].id, m.timestamp,
              m.depth, m.delay, fwd[i]);
    }
    run.write("cascade.csv", csv.str());
    run.write_json("cascade.json", {{"size", c.size()},
                                    {"source", c.source().id},
                                    {"max_depth", c.max_depth()},
                                    {"rejected_orphans", c.rejected_orphans()}});
  }
  if (all || which == "hist") {
    Csv csv{"level", "delay_bin", "count"};
    for (const auto& [key, n] : level_delay_histogram(c, p.bin)) csv.row(key.first, key.second, n);
    run.write("level_delay.csv", csv.str());
  }
  if (all || which == "coverage") {
    try {
      run.write_json("coverage.json", {{"coverage", coverage(c, followers)}});
    } catch (const Error& e) {
      if (!tolerate) throw;
      run.note_skipped("coverage", e);
    }
  }
  if (all || which == "critical") {
    Csv csv{"user", "direct_forwards", "followers"};
    for (const auto& u : critical_users(c, p.threshold, followers)) {
      if (u.follower_count == kMissingCount) {
        csv.row(ids.name(u.author), u.direct_forwards, "");
      } else {
        csv.row(ids.name(u.author), u.direct_forwards, u.follower_count);
      }
    }
    run.write("critical_users.csv", csv.str());
  }
}

// ---------------------------------------------------------------------------
// Commands

void record_common(Run& run, const Common& c) {
  auto& j = run.params();
  j["edges"] = c.edges;
  j["profiles"] = c.profiles;
  j["cascade"] = c.cascade;
  j["out"] = c.out;
  j["threads"] = thread_count(c);
  j["seed"] = c.seed;
  j["strict"] = c.strict;
  j["max_memory_mb"] = c.max_memory_mb;
}

void cmd_ingest(const Common& c, std::ostream& out) {
  Run run("ingest", c.out);
  record_common(run, c);
  json report;
  LoadedGraph lg = load_graph(c, run, &report);
  std::ostringstream snap, ids;
  write_snapshot(snap, lg.graph);
  lg.ids.write(ids);
  run.write("graph.fng", snap.str());
  run.write("graph.fng.ids", ids.str());
  if (report.is_null()) report = {{"node_count", lg.graph.node_count()}, {"edge_count", lg.graph.edge_count()}};
  if (lg.graph.edge_count() > 0) {
    report["reciprocity"] = reciprocity(lg.graph);
    report["mutual_edges"] = mutual_subgraph(lg.graph).edge_count();
  }
  run.write_json("ingest.json", report);
  run.finish(out);
}

void cmd_stats(const Common& c, const Params& p, std::ostream& out) {
  Run run("stats", c.out);
  record_common(run, c);
  run.params()["direction"] = p.direction;
  run.params()["xmin"] = p.xmin;
  run.params()["breakpoints"] = p.breakpoints;
  run.params()["buckets"] = p.buckets;
  LoadedGraph lg = load_graph(c, run);
  const auto profiles = load_profiles(c, run, lg.ids);
  write_stats(run, lg.graph, profiles, p);
  run.finish(out);
}

void cmd_separation(const Common& c, const Params& p, std::ostream& out) {
  Run run("separation", c.out);
  record_common(run, c);
  run.params()["seeds"] = p.seeds;
  LoadedGraph lg = load_graph(c, run);
  write_separation(run, lg.graph, c, p, false);
  run.finish(out);
}

void cmd_preference(const Common& c, const Params& p, std::ostream& out) {
  if (p.ebr_metric != "followers" && p.ebr_metric != "pagerank") {
    fail(ErrorKind::invalid_argument, "--ebr-metric must be followers or pagerank");
  }
  Run run("preference", c.out);
  record_common(run, c);
  run.params()["ebr_metric"] = p.ebr_metric;
  run.params()["buckets"] = p.buckets;
  run.params()["scores"] = p.scores;
  run.params()["similarity_log"] = p.similarity_log;
  LoadedGraph lg = load_graph(c, run);
  const auto profiles = load_profiles(c, run, lg.ids);
  std::optional<ScoreVector> pr;
  if (p.ebr_metric == "pagerank") {
    if (!p.scores.empty()) {
      pr = read_scores(p.scores, run, "scores", lg.ids, false);
    } else {
      run.params()["damping"] = p.damping;
      run.params()["tol"] = p.tol;
      run.params()["max_iter"] = p.max_iter;
      pr = run_pagerank(lg.graph, c, p).scores;
    }
  }
  write_preference(run, lg.graph, profiles, p, pr ? &*pr : nullptr, false, false);
  run.finish(out);
}

void cmd_rank(const std::string& which, const Common& c, const Params& p, std::ostream& out) {
  Run run("rank " + which, c.out);
  record_common(run, c);
  auto record_pr = [&] {
    run.params()["damping"] = p.damping;
    run.params()["tol"] = p.tol;
    run.params()["max_iter"] = p.max_iter;
  };
  if (which == "pagerank") {
    record_pr();
    LoadedGraph lg = load_graph(c, run);
    const auto r = run_pagerank(lg.graph, c, p);
    run.write("pagerank.csv", scores_csv(r.scores, lg.ids));
    run.write_json("pagerank.json", {{"iterations", r.iterations}, {"residual", r.residual}, {"sum", r.scores.sum()}});
  } else if (which == "topk") {
    run.params()["k"] = p.k;
    run.params()["scores"] = p.scores;
    IdMap ids;
    ScoreVector s;
    if (!p.scores.empty()) {
      if (!c.edges.empty()) {
        LoadedGraph lg = load_graph(c, run);
        ids = std::move(lg.ids);
        s = read_scores(p.scores, run, "scores", ids, false);
      } else {
        s = read_scores(p.scores, run, "scores", ids, true);
      }
    } else {
      record_pr();
      LoadedGraph lg = load_graph(c, run);
      s = run_pagerank(lg.graph, c, p).scores;
      ids = std::move(lg.ids);
    }
    run.write("topk.csv", topk_csv(s, ids, p.k));
  } else {
    const std::vector<std::size_t> ks = p.ks.empty() ? default_ks() : p.ks;
    run.params()["ks"] = ks;
    run.params()["first"] = p.first;
    run.params()["second"] = p.second;
    IdMap ids;
    ScoreVector s1, s2;
    if (!p.first.empty() || !p.second.empty()) {
      if (p.first.empty() || p.second.empty()) {
        fail(ErrorKind::invalid_argument, "rank correlate needs both --first and --second score files");
      }
      if (!c.edges.empty()) {
        LoadedGraph lg = load_graph(c, run);
        ids = std::move(lg.ids);
      }
      s1 = read_scores(p.first, run, "first", ids, c.edges.empty());
      s2 = read_scores(p.second, run, "second", ids, false);
    } else {
      record_pr();
      LoadedGraph lg = load_graph(c, run);
      s1 = in_degree_scores(lg.graph);
      s2 = run_pagerank(lg.graph, c, p).scores;
      ids = std::move(lg.ids);
    }
    run.write("correlation.csv", correlation_csv(ranking_correlation_curve(s1, s2, ks)));
  }
  run.finish(out);
}

void cmd_cascade(const std::string& which, const Common& c, const Params& p, std::ostream& out) {
  if (c.cascade.empty()) {
    fail(ErrorKind::invalid_argument, "--cascade is required");
  }
  Run run("cascade " + which, c.out);
  record_common(run, c);
  run.params()["bin"] = p.bin;
  run.params()["threshold"] = p.threshold;
  std::optional<LoadedGraph> lg;
  IdMap ids;
  if (!c.edges.empty()) {
    lg = load_graph(c, run);
    ids = lg->ids;
  }
  run.input("cascade", c.cascade);
  std::ifstream in = open_input(c.cascade);
  const auto records = read_cascade_records(in, ids);
  const auto profiles = load_profiles(c, run, ids);
  const Cascade cascade = build_cascade(records);
  const auto followers = follower_counts(ids.size(), lg ? &lg->graph : nullptr, profiles);
  write_cascade_outputs(run, cascade, ids, followers, p, which, false);
  run.finish(out);
}

void cmd_synth(const std::string& which, const Common& c, const Params& p, std::ostream& out) {
  Run run("synth " + which, c.out);
  record_common(run, c);
  if (which == "graph") {
    run.params()["nodes"] = p.nodes;
    run.params()["exponent"] = p.exponent;
    run.params()["reciprocity"] = p.reciprocity;
    run.params()["min_in_degree"] = p.min_in_degree;
    const std::uint64_t budget = c.max_memory_mb * 1024 * 1024;
    const DirectedGraph g = gen_graph({.node_count = p.nodes,
                                       .target_in_exponent = p.exponent,
                                       .reciprocity_target = p.reciprocity,
                                       .rng_seed = c.seed,
                                       .min_in_degree = p.min_in_degree});
    if (budget != 0 && graph_memory_bytes(g.node_count(), g.edge_count()) > budget) {
      fail(ErrorKind::resource_limit, "generated graph exceeds memory budget of " + std::to_string(c.max_memory_mb) + " MB");
    }
    std::ostringstream edges;
    write_edges(edges, g, IdMap::sequential(g.node_count()));
    run.write("edges.txt", edges.str());
    run.write_json("synth_graph.json", {{"node_count", g.node_count()},
                                        {"edge_count", g.edge_count()},
                                        {"reciprocity", g.edge_count() ? reciprocity(g) : 0.0}});
  } else if (which == "cascade") {
    run.params()["source"] = p.source;
    run.params()["prob"] = p.prob;
    run.params()["max_depth"] = p.max_depth;
    run.params()["mean_delay"] = p.mean_delay;
    run.params()["start"] = p.start;
    LoadedGraph lg = load_graph(c, run);
    NodeId source = 0;
    if (p.source.empty()) {
      for (NodeId u = 0; u < lg.graph.node_count(); ++u)
        if (lg.graph.in_degree(u) > lg.graph.in_degree(source)) source = u;
    } else {
      const auto id = lg.ids.find(p.source);
      if (!id) fail(ErrorKind::invalid_argument, "cascade source '" + p.source + "' is not a node of the graph");
      source = *id;
    }
    run.params()["source_used"] = lg.ids.name(source);
    const auto records = gen_cascade_records(lg.graph, {.source = source,
                                                        .forward_probability = p.prob,
                                                        .max_depth = p.max_depth,
                                                        .mean_delay_seconds = p.mean_delay,
                                                        .start_timestamp = p.start,
                                                        .rng_seed = c.seed});
    std::ostringstream s;
    write_cascade_records(s, records, lg.ids);
    run.write("cascade.csv", s.str());
  } else {
    LoadedGraph lg = load_graph(c, run);
    std::ostringstream s;
    write_profiles(s, gen_profiles(lg.graph, c.seed), lg.ids);
    run.write("profiles.csv", s.str());
  }
  run.finish(out);
}

void cmd_pipeline(const Common& c, const Params& p, std::ostream& out) {
  Run run("pipeline", c.out);
  record_common(run, c);
  auto& j = run.params();
  const std::vector<std::size_t> ks = p.ks.empty() ? default_ks() : p.ks;
  j["seeds"] = p.seeds;
  j["damping"] = p.damping;
  j["tol"] = p.tol;
  j["max_iter"] = p.max_iter;
  j["ks"] = ks;
  j["buckets"] = p.buckets;
  j["xmin"] = p.xmin;
  j["breakpoints"] = p.breakpoints;
  j["k"] = p.k;
  j["threshold"] = p.threshold;
  j["bin"] = p.bin;
  j["similarity_log"] = p.similarity_log;

  json ingest_report;
  LoadedGraph lg = load_graph(c, run, &ingest_report);
  json profile_report;
  auto profiles = load_profiles(c, run, lg.ids, &profile_report);
  const DirectedGraph& g = lg.graph;
  if (ingest_report.is_null()) ingest_report = {{"node_count", g.node_count()}, {"edge_count", g.edge_count()}};
  if (g.edge_count() > 0) ingest_report["reciprocity"] = reciprocity(g);
  if (!profile_report.is_null()) ingest_report["profiles"] = profile_report;
  run.write_json("ingest.json", ingest_report);

  write_stats(run, g, profiles, p);
  try {
    write_separation(run, g, c, p, true);
  } catch (const Error& e) {
    run.note_skipped("separation", e);
  }
  const PageRankResult pr = run_pagerank(g, c, p);
  run.write("pagerank.csv", scores_csv(pr.scores, lg.ids));
  run.write_json("pagerank.json", {{"iterations", pr.iterations}, {"residual", pr.residual}});
  const ScoreVector followers = in_degree_scores(g);
  const std::size_t k = std::min(p.k, g.node_count());
  run.write("topk_pagerank.csv", topk_csv(pr.scores, lg.ids, k));
  run.write("topk_followers.csv", topk_csv(followers, lg.ids, k));
  run.write("correlation.csv",
            correlation_csv(ranking_correlation_curve(followers, pr.scores, clamp_ks(ks, g.node_count()))));
  write_preference(run, g, profiles, p, &pr.scores, true, true);

  if (!c.cascade.empty()) {
    run.input("cascade", c.cascade);
    std::ifstream in = open_input(c.cascade);
    IdMap ids = lg.ids;
    const auto records = read_cascade_records(in, ids);
    const Cascade cascade = build_cascade(records);
    const auto counts = follower_counts(ids.size(), &g, profiles);
    write_cascade_outputs(run, cascade, ids, counts, p, "all", true);
  }
  run.finish(out);
}

// ---------------------------------------------------------------------------
// Argument wiring

void add_common(CLI::App* app, Common& c, bool needs_edges, bool needs_out = true) {
  auto* e = app->add_option("--edges", c.edges, "Edge list (follower followed per line) or .fng snapshot")
                ->envname("FOLLOWNET_EDGES");
  if (needs_edges) e->required();
  app->add_option("--profiles", c.profiles, "Profile CSV with a header row")->envname("FOLLOWNET_PROFILES");
  auto* o = app->add_option("--out", c.out, "Output directory")->envname("FOLLOWNET_OUT");
  if (needs_out) o->required();
  app->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->envname("FOLLOWNET_THREADS");
  app->add_option("--seed", c.seed, "Random seed")->envname("FOLLOWNET_SEED");
  app->add_flag("--strict", c.strict, "Abort on the first malformed input line")->envname("FOLLOWNET_STRICT");
  app->add_option("--max-memory-mb", c.max_memory_mb, "Refuse graphs larger than this (0 = unlimited)")
      ->envname("FOLLOWNET_MAX_MEMORY_MB");
}

void add_pagerank(CLI::App* app, Params& p) {
  app->add_option("--damping", p.damping, "PageRank damping factor")->envname("FOLLOWNET_DAMPING");
  app->add_option("--tol", p.tol, "PageRank L1 tolerance")->envname("FOLLOWNET_TOL");
  app->add_option("--max-iter", p.max_iter, "PageRank iteration cap")->envname("FOLLOWNET_MAX_ITER");
}

void add_ks(CLI::App* app, Params& p) {
  app->add_option("--ks", p.ks, "Comma-separated list lengths (default 10,20,...,1000)")
      ->delimiter(',')
      ->envname("FOLLOWNET_KS");
}

void add_stats_params(CLI::App* app, Params& p) {
  app->add_option("--xmin", p.xmin, "Power-law lower cutoff")->envname("FOLLOWNET_XMIN");
  app->add_option("--breakpoints", p.breakpoints, "Two-stage breakpoints b1,b2")
      ->delimiter(',')
      ->envname("FOLLOWNET_BREAKPOINTS");
  app->add_option("--buckets", p.buckets, "Logarithmic bins per decade")->envname("FOLLOWNET_BUCKETS");
}

void add_cascade_params(CLI::App* app, Params& p) {
  app->add_option("--bin", p.bin, "Delay bin width in seconds")->envname("FOLLOWNET_BIN");
  app->add_option("--threshold", p.threshold, "Critical-user direct forward threshold")->envname("FOLLOWNET_THRESHOLD");
}

void print_error(std::ostream& err, std::string_view kind, std::string_view module, std::string_view message) {
  const json record{{"schema_version", kSchemaVersion},
                    {"error", {{"kind", kind}, {"module", module}, {"message", message}}}};
  err << record.dump() << "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"follownet: directed social-graph measurements", "follownet"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Common c;
  Params p;

  auto* ingest = app.add_subcommand("ingest", "Parse an edge list into a binary snapshot");
  add_common(ingest, c, true);

  auto* stats = app.add_subcommand("stats", "Degree distributions, fits, activeness, cohorts, groups");
  add_common(stats, c, true);
  add_stats_params(stats, p);
  stats->add_option("--direction", p.direction, "in, out or both")->envname("FOLLOWNET_DIRECTION");

  auto* sep = app.add_subcommand("separation", "Snowball-sampled distance distribution of the mutual graph");
  add_common(sep, c, true);
  sep->add_option("--seeds", p.seeds, "Number of BFS seeds")->envname("FOLLOWNET_SEEDS");

  auto* pref = app.add_subcommand("preference", "Assortativity, EBR, following matrix, friend similarity, region");
  add_common(pref, c, true);
  pref->add_option("--ebr-metric", p.ebr_metric, "followers or pagerank")->envname("FOLLOWNET_EBR_METRIC");
  pref->add_option("--scores", p.scores, "Score CSV used as the pagerank metric")->envname("FOLLOWNET_SCORES");
  pref->add_option("--buckets", p.buckets, "EBR bins per decade")->envname("FOLLOWNET_BUCKETS");
  pref->add_flag("--similarity-log", p.similarity_log, "Log-bucket the friend-similarity x axis");
  add_pagerank(pref, p);

  auto* rank = app.add_subcommand("rank", "PageRank, top-k lists and ranking correlation");
  rank->require_subcommand(1);
  auto* rank_pr = rank->add_subcommand("pagerank", "PageRank scores");
  add_common(rank_pr, c, true);
  add_pagerank(rank_pr, p);
  auto* rank_topk = rank->add_subcommand("topk", "Top-k list from a score file or PageRank");
  add_common(rank_topk, c, false);
  add_pagerank(rank_topk, p);
  rank_topk->add_option("--scores", p.scores, "Score CSV (node,score)")->envname("FOLLOWNET_SCORES");
  rank_topk->add_option("--k", p.k, "List length")->envname("FOLLOWNET_K");
  auto* rank_corr = rank->add_subcommand("correlate", "K versus k between two rankings");
  add_common(rank_corr, c, false);
  add_pagerank(rank_corr, p);
  add_ks(rank_corr, p);
  rank_corr->add_option("--first", p.first, "First score CSV (default: follower counts)");
  rank_corr->add_option("--second", p.second, "Second score CSV (default: PageRank)");

  auto* casc = app.add_subcommand("cascade", "Forwarding-cascade analysis");
  casc->require_subcommand(1);
  std::map<CLI::App*, std::string> cascade_cmds;
  for (const char* name : {"build", "hist", "coverage", "critical"}) {
    auto* sub = casc->add_subcommand(name, std::string("cascade ") + name);
    add_common(sub, c, false);
    sub->add_option("--cascade", c.cascade, "Cascade records file")->required()->envname("FOLLOWNET_CASCADE");
    add_cascade_params(sub, p);
    cascade_cmds[sub] = name;
  }

  auto* synth = app.add_subcommand("synth", "Synthetic graphs, cascades and profiles");
  synth->require_subcommand(1);
  auto* synth_graph = synth->add_subcommand("graph", "Power-law digraph with target reciprocity");
  add_common(synth_graph, c, false);
  synth_graph->add_option("--nodes", p.nodes, "Node count")->envname("FOLLOWNET_NODES");
  synth_graph->add_option("--exponent", p.exponent, "In-degree power-law exponent")->envname("FOLLOWNET_EXPONENT");
  synth_graph->add_option("--reciprocity", p.reciprocity, "Target reciprocity")->envname("FOLLOWNET_RECIPROCITY");
  synth_graph->add_option("--min-in-degree", p.min_in_degree, "Smallest sampled in-degree")
      ->envname("FOLLOWNET_MIN_IN_DEGREE");
  auto* synth_cascade = synth->add_subcommand("cascade", "Stochastic forwarding cascade over a graph");
  add_common(synth_cascade, c, true);
  synth_cascade->add_option("--source", p.source, "Source node id (default: most-followed node)");
  synth_cascade->add_option("--prob", p.prob, "Forward probability")->envname("FOLLOWNET_PROB");
  synth_cascade->add_option("--max-depth", p.max_depth, "Maximum cascade depth")->envname("FOLLOWNET_MAX_DEPTH");
  synth_cascade->add_option("--mean-delay", p.mean_delay, "Mean forwarding delay in seconds")
      ->envname("FOLLOWNET_MEAN_DELAY");
  synth_cascade->add_option("--start", p.start, "Source timestamp");
  auto* synth_profiles = synth->add_subcommand("profiles", "Synthetic profiles consistent with a graph");
  add_common(synth_profiles, c, true);

  auto* pipeline = app.add_subcommand("pipeline", "Ingest plus every measurement in one run");
  add_common(pipeline, c, true);
  pipeline->add_option("--cascade", c.cascade, "Optional cascade records file")->envname("FOLLOWNET_CASCADE");
  pipeline->add_option("--seeds", p.seeds, "Number of BFS seeds")->envname("FOLLOWNET_SEEDS");
  pipeline->add_option("--k", p.k, "Top-k list length")->envname("FOLLOWNET_K");
  pipeline->add_flag("--similarity-log", p.similarity_log, "Log-bucket the friend-similarity x axis");
  add_pagerank(pipeline, p);
  add_ks(pipeline, p);
  add_stats_params(pipeline, p);
  add_cascade_params(pipeline, p);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      cmd_ingest(c, out);
    } else if (stats->parsed()) {
      cmd_stats(c, p, out);
    } else if (sep->parsed()) {
      cmd_separation(c, p, out);
    } else if (pref->parsed()) {
      cmd_preference(c, p, out);
    } else if (rank->parsed()) {
      cmd_rank(rank_pr->parsed() ? "pagerank" : rank_topk->parsed() ? "topk" : "correlate", c, p, out);
    } else if (casc->parsed()) {
      for (const auto& [sub, name] : cascade_cmds) {
        if (sub->parsed()) cmd_cascade(name, c, p, out);
      }
    } else if (synth->parsed()) {
      cmd_synth(synth_graph->parsed() ? "graph" : synth_cascade->parsed() ? "cascade" : "profiles", c, p, out);
    } else if (pipeline->parsed()) {
      cmd_pipeline(c, p, out);
    }
  } catch (const Error& e) {
    print_error(err, to_string(e.kind()), e.module(), e.what());
    return kExitDataError;
  } catch (const std::bad_alloc&) {
    print_error(err, "resource_limit", kModule, "out of memory");
    return kExitDataError;
  } catch (const std::exception& e) {
    print_error(err, "io", kModule, e.what());
    return kExitDataError;
  }
  return kExitOk;
}

} // namespace follownet::cli
