#include "follownet/propagation.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "follownet/error.hpp"

namespace follownet {

namespace {

constexpr const char* kModule = "propagation";
constexpr std::int64_t kRoot = -1;
constexpr std::int64_t kMissingParent = -2;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

enum class Reach : std::uint8_t { unknown, visiting, source, orphan };

std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 10) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > limit) out += ", ...";
  return out;
}

} // namespace

std::uint32_t Cascade::max_depth() const noexcept {
  return messages_.empty() ? 0 : messages_.back().depth;
}

std::vector<ForwardRecord> Cascade::records() const {
  std::vector<ForwardRecord> out;
  out.reserve(messages_.size());
  for (const Message& m : messages_) {
    ForwardRecord r{m.id, m.author, std::nullopt, m.timestamp};
    if (m.parent >= 0) {
      r.parent_message_id = messages_[static_cast<std::size_t>(m.parent)].id;
    }
    out.push_back(std::move(r));
  }
  return out;
}

Cascade build_cascade(std::span<const ForwardRecord> records) {
  if (records.empty()) {
    fail(ErrorKind::empty_input, "cascade has no records");
  }
  const std::size_t n = records.size();
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!index.emplace(records[i].message_id, i).second) {
      fail(ErrorKind::malformed_input, "duplicate message id " + records[i].message_id);
    }
  }

  std::vector<std::int64_t> parent(n);
  std::vector<std::string> roots;
  std::size_t root = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!records[i].parent_message_id) {
      parent[i] = kRoot;
      roots.push_back(records[i].message_id);
      root = i;
    } else if (auto it = index.find(*records[i].parent_message_id); it != index.end()) {
      parent[i] = static_cast<std::int64_t>(it->second);
    } else {
      parent[i] = kMissingParent;
    }
  }
  if (roots.empty()) {
    fail(ErrorKind::invalid_structure, "cascade has no source message");
  }
  if (roots.size() > 1) {
    fail(ErrorKind::invalid_structure, "cascade has " + std::to_string(roots.size()) +
                                           " source messages: " + join_ids(roots));
  }

  // Classify each record by where its parent chain ends.
  std::vector<Reach> reach(n, Reach::unknown);
  std::vector<std::size_t> chain;
  for (std::size_t start = 0; start < n; ++start) {
    chain.clear();
    std::size_t cur = start;
    Reach outcome = Reach::unknown;
    while (true) {
      if (reach[cur] == Reach::source || reach[cur] == Reach::orphan) {
        outcome = reach[cur];
        break;
      }
      if (reach[cur] == Reach::visiting) {
        fail(ErrorKind::invalid_structure, "forwarding cycle through message " + records[cur].message_id);
      }
      reach[cur] = Reach::visiting;
      chain.push_back(cur);
      if (parent[cur] == kRoot) {
        outcome = Reach::source;
        break;
      }
      if (parent[cur] == kMissingParent) {
        outcome = Reach::orphan;
        break;
      }
      cur = static_cast<std::size_t>(parent[cur]);
    }
    for (std::size_t c : chain) {
      reach[c] = outcome;
    }
  }

  Cascade cascade;
  for (std::size_t i = 0; i < n; ++i) {
    if (reach[i] == Reach::orphan) {
      cascade.orphans_.push_back(records[i].message_id);
    }
  }

  // Children in input order, then breadth-first layout.
  std::vector<std::vector<std::size_t>> kids(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (reach[i] == Reach::source && parent[i] >= 0) {
      const auto p = static_cast<std::size_t>(parent[i]);
      if (records[i].timestamp < records[p].timestamp) {
        fail(ErrorKind::invalid_structure,
             "timestamp inversion on edge " + records[p].message_id + " -> " + records[i].message_id + " (" +
                 std::to_string(records[p].timestamp) + " > " + std::to_string(records[i].timestamp) + ")");
      }
      kids[p].push_back(i);
    }
  }

  auto& msgs = cascade.messages_;
  std::vector<std::size_t> order{root};
  const std::int64_t t0 = records[root].timestamp;
  msgs.push_back({records[root].message_id, records[root].author, -1, 0, t0, 0, 0, 0});
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t rec = order[pos];
    msgs[pos].first_child = order.size();
    msgs[pos].child_count = kids[rec].size();
    for (std::size_t child : kids[rec]) {
      order.push_back(child);
      const ForwardRecord& r = records[child];
      msgs.push_back({r.message_id, r.author, static_cast<std::int64_t>(pos), msgs[pos].depth + 1, r.timestamp,
                      r.timestamp - t0, 0, 0});
    }
  }
  return cascade;
}

LevelDelayHistogram level_delay_histogram(const Cascade& c, std::int64_t delay_bin_seconds) {
  if (delay_bin_seconds < 1) {
    fail(ErrorKind::invalid_argument, "delay bin width must be at least one second");
  }
  LevelDelayHistogram h;
  for (std::size_t i = 1; i < c.size(); ++i) {
    const auto& m = c.messages()[i];
    ++h[{m.depth, m.delay / delay_bin_seconds}];
  }
  return h;
}

std::vector<std::uint64_t> forwarding_numbers(const Cascade& c) {
  std::vector<std::uint64_t> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] = c.messages()[i].child_count;
  }
  if (!out.empty()) {
    out[0] = c.size() - 1;
  }
  return out;
}

std::uint64_t coverage(const Cascade& c, std::span<const std::int64_t> follower_counts) {
  std::vector<NodeId> authors;
  authors.reserve(c.size());
  for (const auto& m : c.messages()) {
    authors.push_back(m.author);
  }
  std::sort(authors.begin(), authors.end());
  authors.erase(std::unique(authors.begin(), authors.end()), authors.end());

  std::uint64_t total = 0;
  std::vector<std::string> missing;
  for (NodeId a : authors) {
    if (a >= follower_counts.size() || follower_counts[a] < 0) {
      missing.push_back(std::to_string(a));
      continue;
    }
    total += static_cast<std::uint64_t>(follower_counts[a]);
  }
  if (!missing.empty()) {
    fail(ErrorKind::insufficient_data, "missing follower count for " + std::to_string(missing.size()) +
                                           " author(s): " + join_ids(missing));
  }
  return total;
}

std::vector<CriticalUser> critical_users(const Cascade& c, std::uint64_t threshold,
                                         std::span<const std::int64_t> follower_counts) {
  std::unordered_map<NodeId, std::uint64_t> direct;
  for (const auto& m : c.messages()) {
    direct[m.author] += m.child_count;
  }
  std::vector<CriticalUser> out;
  for (const auto& [author, count] : direct) {
    if (count > threshold) {
      const std::int64_t followers = author < follower_counts.size() ? follower_counts[author] : kMissingCount;
      out.push_back({author, count, followers});
    }
  }
  std::sort(out.begin(), out.end(), [](const CriticalUser& a, const CriticalUser& b) {
    return a.direct_forwards != b.direct_forwards ? a.direct_forwards > b.direct_forwards : a.author < b.author;
  });
  return out;
}

std::vector<ForwardRecord> read_cascade_records(std::istream& in, IdMap& ids) {
  std::vector<ForwardRecord> records;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      const auto pos = rest.find(delim);
      f.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (records.empty() && !f.empty() && f[0] == "message_id") {
      continue;
    }
    std::int64_t ts = 0;
    if (f.size() != 4 || f[0].empty() || f[1].empty() || f[2].empty() ||
        std::from_chars(f[3].data(), f[3].data() + f[3].size(), ts).ptr != f[3].data() + f[3].size() ||
        f[3].empty()) {
      fail(ErrorKind::malformed_input, "malformed cascade record at line " + std::to_string(line_no));
    }
    ForwardRecord r;
    r.message_id = std::string(f[0]);
    r.author = ids.intern(f[1]);
    if (f[2] != "-") {
      r.parent_message_id = std::string(f[2]);
    }
    r.timestamp = ts;
    records.push_back(std::move(r));
  }
  return records;
}

void write_cascade_records(std::ostream& out, std::span<const ForwardRecord> records, const IdMap& ids) {
  out << "message_id,author_id,parent_message_id,unix_timestamp\n";
  for (const auto& r : records) {
    out << r.message_id << ',' << ids.name(r.author) << ',' << (r.parent_message_id ? *r.parent_message_id : "-")
        << ',' << r.timestamp << '\n';
  }
}

} // namespace follownet
