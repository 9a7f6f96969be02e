#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace abandon {

// One comment as read from a dump. `timestamp` is whole UTC seconds; when the
// source carries sub-second precision the remainder is kept in `subsecond`
// (in [0, 1)) so that sub-second gaps can still be measured.
struct CommentEvent {
  std::string event_id;
  std::string user_id;
  std::string community_id;
  std::int64_t timestamp = 0;
  double subsecond = 0.0;
  std::string body;
  std::int64_t vote_score = 0;
  std::optional<std::string> parent_id;
  bool is_thread_root = true;
  bool is_stickied = false;

  double time() const { return static_cast<double>(timestamp) + subsecond; }
  bool operator==(const CommentEvent&) const = default;
};

enum class SplitTag { BannedBefore = 0, NonBannedBefore = 1, NonBannedAfter = 2 };
inline constexpr std::array<SplitTag, 3> kAllSplits = {SplitTag::BannedBefore, SplitTag::NonBannedBefore,
                                                       SplitTag::NonBannedAfter};

std::string_view split_name(SplitTag tag);
SplitTag parse_split_name(std::string_view name);

struct DatasetSplit {
  SplitTag tag = SplitTag::BannedBefore;
  std::vector<CommentEvent> events;
  bool operator==(const DatasetSplit&) const = default;
};

// The three splits indexed by SplitTag.
struct SplitSet {
  std::array<DatasetSplit, 3> splits{DatasetSplit{SplitTag::BannedBefore, {}},
                                     DatasetSplit{SplitTag::NonBannedBefore, {}},
                                     DatasetSplit{SplitTag::NonBannedAfter, {}}};

  DatasetSplit& operator[](SplitTag t) { return splits[static_cast<std::size_t>(t)]; }
  const DatasetSplit& operator[](SplitTag t) const { return splits[static_cast<std::size_t>(t)]; }
  std::size_t total_events() const;
  bool operator==(const SplitSet&) const = default;
};

// A parent id names another comment when it carries the "t1_" kind prefix.
bool refers_to_comment(std::string_view parent_id);
// Strips a "tN_" kind prefix, if present.
std::string_view strip_kind_prefix(std::string_view id);

}  // namespace abandon
