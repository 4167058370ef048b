#include "follownet/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "follownet/error.hpp"

namespace follownet {

namespace {

constexpr const char* kModule = "graph_core";
constexpr char kMagic[8] = {'F', 'N', 'G', 'R', 'A', 'P', 'H', '\0'};
constexpr std::size_t kMaxRecordedLines = 100;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

bool is_separator(char c) noexcept { return c == '\t' || c == ',' || c == ' ' || c == '\r'; }

/// Splits on separator runs. Returns the number of tokens found (up to 3).
int tokenize(std::string_view line, std::string_view (&tokens)[3]) noexcept {
  int count = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_separator(line[i])) {
      ++i;
    }
    if (i == line.size()) {
      break;
    }
    std::size_t j = i;
    while (j < line.size() && !is_separator(line[j])) {
      ++j;
    }
    if (count == 3) {
      return 4;
    }
    tokens[count++] = line.substr(i, j - i);
    i = j;
  }
  return count;
}

template <class T>
T byteswap(T value) noexcept {
  T out{};
  auto* src = reinterpret_cast<const unsigned char*>(&value);
  auto* dst = reinterpret_cast<unsigned char*>(&out);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = src[sizeof(T) - 1 - i];
  }
  return out;
}

template <class T>
void put_le(std::ostream& out, T value) {
  if constexpr (std::endian::native == std::endian::big) {
    value = byteswap(value);
  }
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
void put_le_array(std::ostream& out, const std::vector<T>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(T)));
  } else {
    for (T v : values) {
      put_le(out, v);
    }
  }
}

template <class T>
T get_le(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    fail(ErrorKind::malformed_input, "snapshot truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    value = byteswap(value);
  }
  return value;
}

template <class T>
std::vector<T> get_le_array(std::istream& in, std::uint64_t count) {
  std::vector<T> values(count);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(count * sizeof(T)))) {
    fail(ErrorKind::malformed_input, "snapshot truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : values) {
      v = byteswap(v);
    }
  }
  return values;
}

void validate_csr(const std::vector<EdgeCount>& offsets, const std::vector<NodeId>& adj,
                  std::size_t n, const char* which) {
  if (offsets.size() != n + 1 || offsets.front() != 0 || offsets.back() != adj.size()) {
    fail(ErrorKind::malformed_input, std::string("inconsistent ") + which + " offsets");
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (offsets[u] > offsets[u + 1]) {
      fail(ErrorKind::malformed_input, std::string(which) + " offsets not monotone");
    }
    for (EdgeCount e = offsets[u]; e < offsets[u + 1]; ++e) {
      if (adj[e] >= n || adj[e] == u || (e > offsets[u] && adj[e - 1] >= adj[e])) {
        fail(ErrorKind::malformed_input,
             std::string(which) + " adjacency of node " + std::to_string(u) + " is not a sorted simple list");
      }
    }
  }
}

} // namespace

NodeId IdMap::intern(std::string_view name) {
  if (auto it = index_.find(name); it != index_.end()) {
    return it->second;
  }
  if (names_.size() >= std::numeric_limits<NodeId>::max()) {
    throw Error(ErrorKind::resource_limit, kModule, "node id space exhausted");
  }
  const auto id = static_cast<NodeId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<NodeId> IdMap::find(std::string_view name) const {
  if (auto it = index_.find(name); it != index_.end()) {
    return it->second;
  }
  return std::nullopt;
}

void IdMap::write(std::ostream& out) const {
  for (const auto& n : names_) {
    out << n << '\n';
  }
}

IdMap IdMap::read(std::istream& in) {
  IdMap ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::size_t before = ids.size();
    ids.intern(line);
    if (ids.size() == before) {
      fail(ErrorKind::malformed_input, "duplicate id in id map: " + line);
    }
  }
  return ids;
}

IdMap IdMap::sequential(std::size_t n) {
  IdMap ids;
  ids.names_.reserve(n);
  ids.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids.intern(std::to_string(i));
  }
  return ids;
}

DirectedGraph DirectedGraph::from_edges(std::size_t node_count, std::vector<Edge> edges,
                                        EdgeCount* duplicates_dropped,
                                        EdgeCount* self_loops_dropped) {
  if (node_count > std::numeric_limits<NodeId>::max()) {
    fail(ErrorKind::resource_limit, "node count exceeds 32-bit id space");
  }
  std::vector<std::uint64_t> keys;
  keys.reserve(edges.size());
  EdgeCount loops = 0;
  for (const Edge& e : edges) {
    if (e.source >= node_count || e.target >= node_count) {
      fail(ErrorKind::invalid_argument, "edge endpoint out of range");
    }
    if (e.source == e.target) {
      ++loops;
      continue;
    }
    keys.push_back((std::uint64_t{e.source} << 32) | e.target);
  }
  edges.clear();
  edges.shrink_to_fit();

  std::sort(keys.begin(), keys.end());
  const auto unique_end = std::unique(keys.begin(), keys.end());
  const EdgeCount dups = static_cast<EdgeCount>(keys.end() - unique_end);
  keys.erase(unique_end, keys.end());
  if (duplicates_dropped) *duplicates_dropped = dups;
  if (self_loops_dropped) *self_loops_dropped = loops;

  DirectedGraph g;
  const EdgeCount m = keys.size();
  g.out_offsets_.assign(node_count + 1, 0);
  g.in_offsets_.assign(node_count + 1, 0);
  g.out_targets_.resize(m);
  g.in_sources_.resize(m);
  for (EdgeCount i = 0; i < m; ++i) {
    const auto u = static_cast<NodeId>(keys[i] >> 32);
    const auto v = static_cast<NodeId>(keys[i]);
    ++g.out_offsets_[u + 1];
    ++g.in_offsets_[v + 1];
    g.out_targets_[i] = v;
  }
  for (std::size_t u = 0; u < node_count; ++u) {
    g.out_offsets_[u + 1] += g.out_offsets_[u];
    g.in_offsets_[u + 1] += g.in_offsets_[u];
  }
  // Filling in source order keeps every in-list sorted.
  std::vector<EdgeCount> cursor(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  for (EdgeCount i = 0; i < m; ++i) {
    const auto u = static_cast<NodeId>(keys[i] >> 32);
    const auto v = static_cast<NodeId>(keys[i]);
    g.in_sources_[cursor[v]++] = u;
  }
  return g;
}

DirectedGraph DirectedGraph::from_csr(std::vector<EdgeCount> out_offsets, std::vector<NodeId> out_targets,
                                      std::vector<EdgeCount> in_offsets, std::vector<NodeId> in_sources) {
  if (out_offsets.empty()) {
    fail(ErrorKind::malformed_input, "missing offsets");
  }
  const std::size_t n = out_offsets.size() - 1;
  validate_csr(out_offsets, out_targets, n, "out");
  validate_csr(in_offsets, in_sources, n, "in");

  // The in-lists must be exactly the transpose of the out-lists.
  std::vector<EdgeCount> cursor(in_offsets.begin(), in_offsets.end() - 1);
  for (std::size_t u = 0; u < n; ++u) {
    for (EdgeCount e = out_offsets[u]; e < out_offsets[u + 1]; ++e) {
      const NodeId v = out_targets[e];
      if (cursor[v] >= in_offsets[v + 1] || in_sources[cursor[v]] != u) {
        fail(ErrorKind::malformed_input, "in-adjacency is not the transpose of out-adjacency");
      }
      ++cursor[v];
    }
  }

  DirectedGraph g;
  g.out_offsets_ = std::move(out_offsets);
  g.out_targets_ = std::move(out_targets);
  g.in_offsets_ = std::move(in_offsets);
  g.in_sources_ = std::move(in_sources);
  return g;
}

bool DirectedGraph::has_edge(NodeId u, NodeId v) const noexcept {
  const auto adj = out_neighbors(u);
  return std::binary_search(adj.begin(), adj.end(), v);
}

std::vector<Edge> DirectedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for_each_edge([&](NodeId u, NodeId v) { out.push_back({u, v}); });
  return out;
}

std::uint64_t graph_memory_bytes(std::size_t node_count, EdgeCount edge_count) noexcept {
  return 2 * (node_count + 1) * sizeof(EdgeCount) + 2 * edge_count * sizeof(NodeId);
}

IngestResult ingest_edges(std::istream& in, const IngestOptions& options) {
  return ingest_edges(in, IdMap{}, options);
}

IngestResult ingest_edges(std::istream& in, IdMap ids, const IngestOptions& options) {
  IngestResult result;
  IngestSummary& summary = result.summary;
  std::vector<Edge> edges;
  std::string line;
  std::uint64_t data_lines = 0;

  while (std::getline(in, line)) {
    ++summary.lines_read;
    std::string_view view(line);
    std::size_t start = 0;
    while (start < view.size() && is_separator(view[start])) {
      ++start;
    }
    view.remove_prefix(start);
    if (view.empty()) {
      ++summary.blank_lines;
      continue;
    }
    if (view.front() == '#') {
      ++summary.comment_lines;
      continue;
    }
    ++data_lines;
    std::string_view tokens[3];
    if (tokenize(view, tokens) != 2) {
      if (options.strict) {
        fail(ErrorKind::malformed_input,
             "malformed edge at line " + std::to_string(summary.lines_read) + ": expected two ids");
      }
      ++summary.malformed_lines;
      if (summary.malformed_line_numbers.size() < kMaxRecordedLines) {
        summary.malformed_line_numbers.push_back(summary.lines_read);
      }
      continue;
    }
    const NodeId u = ids.intern(tokens[0]);
    const NodeId v = ids.intern(tokens[1]);
    edges.push_back({u, v});

    if (options.memory_budget_bytes != 0 && (edges.size() & 0xFFFFF) == 0) {
      const auto projected = graph_memory_bytes(ids.size(), edges.size()) + edges.size() * sizeof(Edge) * 2;
      if (projected > options.memory_budget_bytes) {
        fail(ErrorKind::resource_limit,
             "graph exceeds memory budget of " + std::to_string(options.memory_budget_bytes) +
                 " bytes after " + std::to_string(edges.size()) + " edges");
      }
    }
  }
  if (in.bad()) {
    fail(ErrorKind::io, "read error while ingesting edges");
  }
  if (data_lines == 0) {
    fail(ErrorKind::empty_input, "edge input contains no edge lines");
  }
  if (options.memory_budget_bytes != 0 &&
      graph_memory_bytes(ids.size(), edges.size()) + edges.size() * sizeof(Edge) * 2 >
          options.memory_budget_bytes) {
    fail(ErrorKind::resource_limit,
         "graph exceeds memory budget of " + std::to_string(options.memory_budget_bytes) + " bytes");
  }

  result.graph = DirectedGraph::from_edges(ids.size(), std::move(edges), &summary.duplicates_dropped,
                                           &summary.self_loops_dropped);
  summary.node_count = result.graph.node_count();
  summary.edge_count = result.graph.edge_count();
  result.ids = std::move(ids);
  return result;
}

void write_edges(std::ostream& out, const DirectedGraph& g, const IdMap& ids) {
  g.for_each_edge([&](NodeId u, NodeId v) { out << ids.name(u) << '\t' << ids.name(v) << '\n'; });
}

double reciprocity(const DirectedGraph& g) {
  if (g.edge_count() == 0) {
    fail(ErrorKind::empty_input, "reciprocity of a graph without edges is undefined");
  }
  EdgeCount reciprocated = 0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    if (g.has_edge(v, u)) {
      ++reciprocated;
    }
  });
  return static_cast<double>(reciprocated) / static_cast<double>(g.edge_count());
}

DirectedGraph mutual_subgraph(const DirectedGraph& g) {
  std::vector<Edge> kept;
  g.for_each_edge([&](NodeId u, NodeId v) {
    if (g.has_edge(v, u)) {
      kept.push_back({u, v});
    }
  });
  return DirectedGraph::from_edges(g.node_count(), std::move(kept));
}

bool is_symmetric(const DirectedGraph& g) {
  const std::size_t n = g.node_count();
  for (std::size_t u = 0; u < n; ++u) {
    const auto id = static_cast<NodeId>(u);
    if (g.out_degree(id) != g.in_degree(id)) {
      return false;
    }
    const auto out = g.out_neighbors(id);
    const auto in = g.in_neighbors(id);
    if (!std::equal(out.begin(), out.end(), in.begin())) {
      return false;
    }
  }
  return true;
}

void write_snapshot(std::ostream& out, const DirectedGraph& g) {
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kSnapshotVersion);
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, g.node_count());
  put_le<std::uint64_t>(out, g.edge_count());
  put_le_array(out, g.out_offsets());
  put_le_array(out, g.out_targets());
  put_le_array(out, g.in_offsets());
  put_le_array(out, g.in_sources());
  if (!out) {
    fail(ErrorKind::io, "failed to write snapshot");
  }
}

DirectedGraph read_snapshot(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorKind::malformed_input, "not a graph snapshot (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kSnapshotVersion) {
    fail(ErrorKind::malformed_input, "unsupported snapshot version " + std::to_string(version));
  }
  get_le<std::uint32_t>(in);
  const auto n = get_le<std::uint64_t>(in);
  const auto m = get_le<std::uint64_t>(in);
  if (n > std::numeric_limits<NodeId>::max() || m > n * (n == 0 ? 0 : n - 1)) {
    fail(ErrorKind::malformed_input, "snapshot header has impossible sizes");
  }
  auto out_offsets = get_le_array<EdgeCount>(in, n + 1);
  auto out_targets = get_le_array<NodeId>(in, m);
  auto in_offsets = get_le_array<EdgeCount>(in, n + 1);
  auto in_sources = get_le_array<NodeId>(in, m);
  return DirectedGraph::from_csr(std::move(out_offsets), std::move(out_targets), std::move(in_offsets),
                                 std::move(in_sources));
}

} // namespace follownet
