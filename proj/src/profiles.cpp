#include "follownet/profiles.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "follownet/error.hpp"

namespace follownet {

namespace {

constexpr const char* kModule = "graph_core";
constexpr std::size_t kMaxRecordedLines = 100;

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\r')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\r')) f.remove_suffix(1);
  }
  return fields;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) {
    return false;
  }
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_gender(std::string_view s, Gender& out) {
  if (s == "m" || s == "M" || s == "male") {
    out = Gender::male;
  } else if (s == "f" || s == "F" || s == "female") {
    out = Gender::female;
  } else if (s.empty() || s == "u" || s == "U" || s == "unknown") {
    out = Gender::unknown;
  } else {
    return false;
  }
  return true;
}

struct ColumnIndex {
  int id = -1;
  std::array<int, 7> columns{-1, -1, -1, -1, -1, -1, -1};
};

ColumnIndex parse_header(const std::vector<std::string_view>& header) {
  ColumnIndex idx;
  static constexpr std::array<std::string_view, 7> names{
      "followers", "followings", "posts", "verified", "gender", "region", "reg_month"};
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "id") {
      idx.id = static_cast<int>(i);
      continue;
    }
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (header[i] == names[c]) {
        idx.columns[c] = static_cast<int>(i);
      }
    }
  }
  return idx;
}

/// Fills `p` from one row. Returns false when a present column holds an invalid value.
bool parse_row(const std::vector<std::string_view>& f, const ColumnIndex& idx, UserProfile& p) {
  auto col = [&](ProfileColumn c) -> const std::string_view* {
    const int i = idx.columns[static_cast<int>(c)];
    return i >= 0 ? &f[static_cast<std::size_t>(i)] : nullptr;
  };
  auto count = [&](ProfileColumn c, std::int64_t& out) {
    const auto* s = col(c);
    return !s || (parse_int(*s, out) && out >= 0);
  };
  if (!count(ProfileColumn::followers, p.follower_count) ||
      !count(ProfileColumn::followings, p.following_count) || !count(ProfileColumn::posts, p.post_count)) {
    return false;
  }
  if (const auto* s = col(ProfileColumn::verified)) {
    if (*s == "1") {
      p.verified = true;
    } else if (*s == "0" || s->empty()) {
      p.verified = false;
    } else {
      return false;
    }
  }
  if (const auto* s = col(ProfileColumn::gender); s && !parse_gender(*s, p.gender)) {
    return false;
  }
  if (const auto* s = col(ProfileColumn::region)) {
    if (!s->empty() && *s != "-") {
      p.region = std::string(*s);
    }
  }
  if (const auto* s = col(ProfileColumn::reg_month); s && !s->empty()) {
    std::int32_t month = 0;
    if (!parse_int(*s, month) || month < 0) {
      return false;
    }
    p.registered_month = month;
  }
  return true;
}

} // namespace

void ProfileTable::set(NodeId id, UserProfile profile) {
  if (id >= rows_.size()) {
    rows_.resize(std::size_t{id} + 1);
  }
  if (!rows_[id]) {
    ++count_;
  }
  rows_[id] = std::move(profile);
}

std::string_view to_string(Gender g) noexcept {
  switch (g) {
    case Gender::male: return "m";
    case Gender::female: return "f";
    case Gender::unknown: return "u";
  }
  return "u";
}

ProfileIngestResult ingest_profiles(std::istream& in, IdMap& ids, const ProfileIngestOptions& options) {
  ProfileIngestResult result;
  auto& summary = result.summary;
  std::string line;
  std::uint64_t line_no = 0;

  // Header: first non-blank, non-comment line.
  std::vector<std::string_view> header;
  std::string header_line;
  char delim = ',';
  while (std::getline(in, header_line)) {
    ++line_no;
    if (header_line.empty() || header_line.front() == '#' || header_line == "\r") {
      continue;
    }
    delim = header_line.find('\t') != std::string::npos ? '\t' : ',';
    header = split(header_line, delim);
    break;
  }
  if (header.empty()) {
    throw Error(ErrorKind::empty_input, kModule, "profile input has no header");
  }
  const ColumnIndex idx = parse_header(header);
  if (idx.id < 0) {
    throw Error(ErrorKind::malformed_input, kModule, "profile header lacks mandatory column 'id'");
  }
  for (int c = 0; c < 7; ++c) {
    if (idx.columns[static_cast<std::size_t>(c)] >= 0) {
      result.table.mark_column(static_cast<ProfileColumn>(c));
    }
  }

  auto reject = [&](const char* why) {
    if (options.strict) {
      throw Error(ErrorKind::malformed_input, kModule,
                  "profile line " + std::to_string(line_no) + ": " + why);
    }
    ++summary.rejected_rows;
    if (summary.rejected_line_numbers.size() < kMaxRecordedLines) {
      summary.rejected_line_numbers.push_back(line_no);
    }
  };

  std::vector<bool> seen(ids.size(), false);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#' || line == "\r") {
      continue;
    }
    ++summary.rows_read;
    const auto fields = split(line, delim);
    if (fields.size() != header.size()) {
      reject("field count does not match header");
      continue;
    }
    const std::string_view key = fields[static_cast<std::size_t>(idx.id)];
    if (key.empty()) {
      reject("empty id");
      continue;
    }
    UserProfile profile;
    if (!parse_row(fields, idx, profile)) {
      reject("invalid or negative value");
      continue;
    }
    NodeId id = 0;
    if (auto found = ids.find(key)) {
      id = *found;
    } else if (options.allow_orphans) {
      id = ids.intern(key);
      ++summary.orphans_added;
    } else {
      ++summary.orphans_skipped;
      continue;
    }
    if (id >= seen.size()) {
      seen.resize(std::size_t{id} + 1, false);
    }
    if (seen[id]) {
      ++summary.duplicate_ids;
    } else {
      seen[id] = true;
      ++summary.rows_accepted;
    }
    result.table.set(id, std::move(profile));
  }
  if (in.bad()) {
    throw Error(ErrorKind::io, kModule, "read error while ingesting profiles");
  }
  return result;
}

void write_profiles(std::ostream& out, const ProfileTable& table, const IdMap& ids) {
  out << "id,followers,followings,posts,verified,gender,region,reg_month\n";
  table.for_each([&](NodeId id, const UserProfile& p) {
    out << ids.name(id) << ',' << p.follower_count << ',' << p.following_count << ',' << p.post_count << ','
        << (p.verified ? 1 : 0) << ',' << to_string(p.gender) << ',' << (p.region.empty() ? "-" : p.region)
        << ',';
    if (p.registered_month) {
      out << *p.registered_month;
    }
    out << '\n';
  });
}

} // namespace follownet
