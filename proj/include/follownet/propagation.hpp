#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "follownet/graph.hpp"

namespace follownet {

/// One message: a source post (no parent) or a forward of `parent_message_id`.
struct ForwardRecord {
  std::string message_id;
  NodeId author = 0;
  std::optional<std::string> parent_message_id;
  /// Seconds since the epoch.
  std::int64_t timestamp = 0;

  friend bool operator==(const ForwardRecord&, const ForwardRecord&) = default;
};

/// Validated forwarding tree.
///
/// Messages are stored in breadth-first order from the source (index 0); the
/// children of a message occupy a contiguous index range, in input order.
class Cascade {
public:
  struct Message {
    std::string id;
    NodeId author = 0;
    /// Index of the parent message; -1 for the source.
    std::int64_t parent = -1;
    std::uint32_t depth = 0;
    std::int64_t timestamp = 0;
    /// timestamp - source timestamp
    std::int64_t delay = 0;
    std::size_t first_child = 0;
    std::size_t child_count = 0;
  };

  std::size_t size() const noexcept { return messages_.size(); }
  const Message& source() const { return messages_.front(); }
  const std::vector<Message>& messages() const noexcept { return messages_; }
  std::span<const Message> children(std::size_t index) const {
    const Message& m = messages_.at(index);
    return {messages_.data() + m.first_child, m.child_count};
  }
  std::uint32_t max_depth() const noexcept;
  /// Ids of records dropped because their parent chain does not reach the source.
  const std::vector<std::string>& rejected_orphans() const noexcept { return orphans_; }

  /// Records in storage order, parents before children.
  std::vector<ForwardRecord> records() const;

private:
  friend Cascade build_cascade(std::span<const ForwardRecord> records);
  std::vector<Message> messages_;
  std::vector<std::string> orphans_;
};

/// Validates records into a tree. Records whose parent is missing (and their
/// descendants) are rejected and listed; zero or several sources, a child
/// older than its parent, a parent cycle, or a repeated message id are errors.
Cascade build_cascade(std::span<const ForwardRecord> records);

/// (level, delay bin) -> number of forwarded messages; the source is excluded.
using LevelDelayHistogram = std::map<std::pair<std::uint32_t, std::int64_t>, std::uint64_t>;

inline constexpr std::int64_t kDefaultDelayBinSeconds = 600;

LevelDelayHistogram level_delay_histogram(const Cascade& c, std::int64_t delay_bin_seconds = kDefaultDelayBinSeconds);

/// Per message (indexed like `messages()`): the source counts every
/// descendant, every other message counts its direct forwards only.
std::vector<std::uint64_t> forwarding_numbers(const Cascade& c);

/// Marker for an unknown follower count.
inline constexpr std::int64_t kMissingCount = -1;

/// Sum of follower counts over distinct participating authors, an upper bound
/// on the audience since overlapping followers are counted once per author.
/// `follower_counts[author]` must be known (not kMissingCount) for every author.
std::uint64_t coverage(const Cascade& c, std::span<const std::int64_t> follower_counts);

struct CriticalUser {
  NodeId author;
  std::uint64_t direct_forwards;
  /// kMissingCount when unknown.
  std::int64_t follower_count;
};

inline constexpr std::uint64_t kDefaultCriticalThreshold = 10;

/// Authors whose direct forwards, summed over all their messages in the
/// cascade, exceed `threshold`; sorted by count descending, then author id.
std::vector<CriticalUser> critical_users(const Cascade& c, std::uint64_t threshold = kDefaultCriticalThreshold,
                                         std::span<const std::int64_t> follower_counts = {});

/// Reads `message_id, author_id, parent_message_id|-, unix_timestamp` lines
/// (comma or tab separated). Author ids are interned into `ids`. A leading
/// header row starting with "message_id" and '#' comment lines are skipped.
std::vector<ForwardRecord> read_cascade_records(std::istream& in, IdMap& ids);

void write_cascade_records(std::ostream& out, std::span<const ForwardRecord> records, const IdMap& ids);

} // namespace follownet
