#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "abandon/cohort/intervention.hpp"
#include "abandon/common/error.hpp"
#include "abandon/ingest/event.hpp"

namespace abandon {

// Raised when a user without pre-period activity is asked for a label.
class CohortViolation : public DataError {
 public:
  using DataError::DataError;
};

struct UserActivitySummary {
  std::string user_id;
  std::size_t pre_count = 0;
  std::size_t post_count = 0;
  std::size_t soft_window_count = 0;
  // Banned-community comments per 30-day block, oldest block first.
  std::vector<std::size_t> monthly_pre_counts;
  // Smallest gap between consecutive comments; infinity with < 2 comments.
  double min_gap_seconds = std::numeric_limits<double>::infinity();

  std::size_t abandonment_count(Task task) const { return task == Task::Hard ? post_count : soft_window_count; }
};

enum class Label { NonAbandoning = 0, Abandoning = 1 };

struct AbandonmentLabel {
  std::string user_id;
  Task task = Task::Hard;
  Label label = Label::NonAbandoning;
};

// All events of one user, in time order, gathered across the splits.
struct UserIndex {
  std::vector<std::string> users;  // sorted
  std::vector<std::vector<const CommentEvent*>> events;

  // Position of a user, or users.size() when absent.
  std::size_t find(const std::string& user) const;
};

UserIndex index_users(const SplitSet& splits);

// `events` must be sorted by time and belong to one user.
UserActivitySummary summarize_user(std::string_view user_id, std::span<const CommentEvent* const> events,
                                   const InterventionSpec& spec);
UserActivitySummary summarize_user(std::span<const CommentEvent> events, const InterventionSpec& spec);

AbandonmentLabel label_user(const UserActivitySummary& summary, Task task);

// Users with at least one banned-community comment in every 30-day block of
// the pre period.
std::set<std::string> filter_consistent_users(std::span<const CommentEvent> events, const InterventionSpec& spec);

struct BotRemoval {
  std::vector<CommentEvent> events;
  std::set<std::string> removed;
};

// Removes every user having two consecutive comments strictly less than
// `min_gap` seconds apart.
BotRemoval remove_bots(std::vector<CommentEvent> events, double min_gap = 1.0);
std::set<std::string> find_bots(std::span<const CommentEvent> events, double min_gap = 1.0);

// Keeps users with at least one event outside the banned communities.
std::set<std::string> drop_externally_inactive(const std::set<std::string>& users, const SplitSet& splits);

SplitSet restrict_to_users(const SplitSet& splits, const std::set<std::string>& users);

struct CohortOptions {
  bool remove_bots = true;
  double bot_gap_seconds = 1.0;
  bool require_consistency = true;
  bool drop_externally_inactive = true;
};

struct CohortReport {
  std::size_t initial_users = 0;
  std::size_t bots_removed = 0;
  std::size_t inconsistent_removed = 0;
  std::size_t externally_inactive_removed = 0;
  std::size_t final_users = 0;
  std::size_t hard_positives = 0;
  std::size_t soft_positives = 0;

  nlohmann::json to_json() const;
};

struct Cohort {
  std::vector<std::string> users;  // sorted
  std::vector<UserActivitySummary> summaries;
  std::vector<int> hard_labels;  // 1 = abandoning
  std::vector<int> soft_labels;
  CohortReport report;

  const std::vector<int>& labels(Task t) const { return t == Task::Hard ? hard_labels : soft_labels; }
};

// Applies the bot, consistency and external-activity filters (bots are
// detected on the banned-community pre-period events) and labels the
// surviving users for both tasks.
Cohort build_cohort(const SplitSet& splits, const InterventionSpec& spec, const CohortOptions& options = {});

void write_labels_csv(const std::filesystem::path& path, const std::vector<std::string>& users,
                      const std::vector<int>& labels);
struct LabelTable {
  std::vector<std::string> users;
  std::vector<int> labels;
};
LabelTable read_labels_csv(const std::filesystem::path& path);

}  // namespace abandon
