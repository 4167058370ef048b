#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace follownet {

/// Dense node index in [0, N).
using NodeId = std::uint32_t;
using EdgeCount = std::uint64_t;

struct Edge {
  NodeId source;
  NodeId target;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Bijection between external (string) ids and dense NodeIds.
class IdMap {
public:
  IdMap() = default;

  /// Returns the id for `name`, assigning the next free index if unseen.
  NodeId intern(std::string_view name);
  std::optional<NodeId> find(std::string_view name) const;
  const std::string& name(NodeId id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// One external id per line; line i holds the name of NodeId i.
  void write(std::ostream& out) const;
  static IdMap read(std::istream& in);

  /// Identity naming "0", "1", ... used for synthetic graphs.
  static IdMap sequential(std::size_t n);

private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId, Hash, std::equal_to<>> index_;
};

/// Immutable simple digraph in compressed adjacency form, out and in.
///
/// Edge u->v means "u follows v": out-neighbours are followings, in-neighbours
/// are followers. Neighbour sequences are sorted ascending; there are no
/// self-loops and no duplicate edges.
class DirectedGraph {
public:
  DirectedGraph() = default;

  /// Builds from an arbitrary edge list. Self-loops and duplicates are dropped;
  /// the counts are reported through the optional out-parameters.
  static DirectedGraph from_edges(std::size_t node_count, std::vector<Edge> edges,
                                  EdgeCount* duplicates_dropped = nullptr,
                                  EdgeCount* self_loops_dropped = nullptr);

  /// Builds from already validated CSR arrays (used by the snapshot loader).
  static DirectedGraph from_csr(std::vector<EdgeCount> out_offsets, std::vector<NodeId> out_targets,
                                std::vector<EdgeCount> in_offsets, std::vector<NodeId> in_sources);

  std::size_t node_count() const noexcept { return out_offsets_.empty() ? 0 : out_offsets_.size() - 1; }
  EdgeCount edge_count() const noexcept { return out_targets_.size(); }

  std::span<const NodeId> out_neighbors(NodeId u) const noexcept {
    return {out_targets_.data() + out_offsets_[u], out_targets_.data() + out_offsets_[u + 1]};
  }
  std::span<const NodeId> in_neighbors(NodeId v) const noexcept {
    return {in_sources_.data() + in_offsets_[v], in_sources_.data() + in_offsets_[v + 1]};
  }
  std::uint32_t out_degree(NodeId u) const noexcept {
    return static_cast<std::uint32_t>(out_offsets_[u + 1] - out_offsets_[u]);
  }
  std::uint32_t in_degree(NodeId v) const noexcept {
    return static_cast<std::uint32_t>(in_offsets_[v + 1] - in_offsets_[v]);
  }
  /// O(log d) membership test on the sorted out-adjacency.
  bool has_edge(NodeId u, NodeId v) const noexcept;

  /// Calls fn(u, v) for every edge in (source, target) lexicographic order.
  template <class Fn>
  void for_each_edge(Fn&& fn) const {
    const std::size_t n = node_count();
    for (std::size_t u = 0; u < n; ++u) {
      for (NodeId v : out_neighbors(static_cast<NodeId>(u))) {
        fn(static_cast<NodeId>(u), v);
      }
    }
  }

  std::vector<Edge> edges() const;

  const std::vector<EdgeCount>& out_offsets() const noexcept { return out_offsets_; }
  const std::vector<NodeId>& out_targets() const noexcept { return out_targets_; }
  const std::vector<EdgeCount>& in_offsets() const noexcept { return in_offsets_; }
  const std::vector<NodeId>& in_sources() const noexcept { return in_sources_; }

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

private:
  std::vector<EdgeCount> out_offsets_{0};
  std::vector<NodeId> out_targets_;
  std::vector<EdgeCount> in_offsets_{0};
  std::vector<NodeId> in_sources_;
};

struct IngestOptions {
  /// Abort on the first malformed line instead of skipping it.
  bool strict = false;
  /// Refuse graphs whose in-memory footprint would exceed this many bytes (0 = unlimited).
  std::uint64_t memory_budget_bytes = 0;
};

struct IngestSummary {
  std::uint64_t lines_read = 0;
  std::uint64_t comment_lines = 0;
  std::uint64_t blank_lines = 0;
  std::uint64_t malformed_lines = 0;
  /// Line numbers (1-based) of the first malformed lines, capped at 100 entries.
  std::vector<std::uint64_t> malformed_line_numbers;
  EdgeCount duplicates_dropped = 0;
  EdgeCount self_loops_dropped = 0;
  std::size_t node_count = 0;
  EdgeCount edge_count = 0;
};

struct IngestResult {
  DirectedGraph graph;
  IdMap ids;
  IngestSummary summary;
};

/// Parses `follower followed` lines (tab, comma or space separated, '#' comments).
IngestResult ingest_edges(std::istream& in, const IngestOptions& options = {});

/// Same, interning ids into an existing map (ids already present keep their index).
IngestResult ingest_edges(std::istream& in, IdMap ids, const IngestOptions& options = {});

/// Writes the edge list in the ingestion format using external ids.
void write_edges(std::ostream& out, const DirectedGraph& g, const IdMap& ids);

/// Fraction of edges whose reverse edge is also present.
double reciprocity(const DirectedGraph& g);

/// Subgraph of edges present in both directions; node set preserved.
DirectedGraph mutual_subgraph(const DirectedGraph& g);

/// Every edge has its reverse.
bool is_symmetric(const DirectedGraph& g);

/// Approximate resident size of a graph with the given shape.
std::uint64_t graph_memory_bytes(std::size_t node_count, EdgeCount edge_count) noexcept;

/// Binary snapshot.
///
/// Layout, all integers little-endian:
///   bytes 0..7   magic "FNGRAPH\0"
///   u32          format version (1)
///   u32          reserved, zero
///   u64          N
///   u64          M
///   u64[N+1]     out offsets
///   u32[M]       out targets
///   u64[N+1]     in offsets
///   u32[M]       in sources
void write_snapshot(std::ostream& out, const DirectedGraph& g);
DirectedGraph read_snapshot(std::istream& in);

inline constexpr std::uint32_t kSnapshotVersion = 1;

} // namespace follownet
