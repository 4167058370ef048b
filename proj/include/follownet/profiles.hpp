#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "follownet/graph.hpp"

namespace follownet {

enum class Gender : std::uint8_t { male, female, unknown };

struct UserProfile {
  std::int64_t follower_count = 0;
  std::int64_t following_count = 0;
  std::int64_t post_count = 0;
  bool verified = false;
  Gender gender = Gender::unknown;
  /// Empty when unknown.
  std::string region;
  /// Months since service launch, when known.
  std::optional<std::int32_t> registered_month;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

enum class ProfileColumn : std::uint8_t {
  followers, followings, posts, verified, gender, region, reg_month
};

/// Per-node attributes. Lookups for nodes without a row return nullptr.
class ProfileTable {
public:
  ProfileTable() = default;

  void set(NodeId id, UserProfile profile);
  const UserProfile* find(NodeId id) const noexcept {
    return id < rows_.size() && rows_[id] ? &*rows_[id] : nullptr;
  }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  bool has_column(ProfileColumn c) const noexcept { return (columns_ >> static_cast<int>(c)) & 1u; }
  void mark_column(ProfileColumn c) noexcept { columns_ |= 1u << static_cast<int>(c); }

  /// Calls fn(id, profile) for every present row in ascending id order.
  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i]) {
        fn(static_cast<NodeId>(i), *rows_[i]);
      }
    }
  }

private:
  std::vector<std::optional<UserProfile>> rows_;
  std::size_t count_ = 0;
  std::uint32_t columns_ = 0;
};

struct ProfileIngestOptions {
  /// Keep rows whose id is not in the id map, assigning fresh ids.
  bool allow_orphans = false;
  bool strict = false;
};

struct ProfileIngestSummary {
  std::uint64_t rows_read = 0;
  std::uint64_t rows_accepted = 0;
  std::uint64_t duplicate_ids = 0;
  std::uint64_t orphans_skipped = 0;
  std::uint64_t orphans_added = 0;
  std::uint64_t rejected_rows = 0;
  /// 1-based line numbers of the first rejected rows, capped at 100 entries.
  std::vector<std::uint64_t> rejected_line_numbers;
};

struct ProfileIngestResult {
  ProfileTable table;
  ProfileIngestSummary summary;
};

/// Reads a comma- or tab-delimited profile file with a header row.
///
/// Recognised columns: id (mandatory), followers, followings, posts,
/// verified (0/1), gender (m/f/u), region, reg_month. Unknown columns are
/// ignored. Duplicate ids: the last row wins.
ProfileIngestResult ingest_profiles(std::istream& in, IdMap& ids,
                                    const ProfileIngestOptions& options = {});

void write_profiles(std::ostream& out, const ProfileTable& table, const IdMap& ids);

std::string_view to_string(Gender g) noexcept;

} // namespace follownet
