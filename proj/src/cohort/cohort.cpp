#include "abandon/cohort/cohort.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace abandon {

std::size_t UserIndex::find(const std::string& user) const {
  auto it = std::lower_bound(users.begin(), users.end(), user);
  if (it == users.end() || *it != user) return users.size();
  return static_cast<std::size_t>(it - users.begin());
}

UserIndex index_users(const SplitSet& splits) {
  std::unordered_map<std::string, std::vector<const CommentEvent*>> by_user;
  for (const auto& s : splits.splits) {
    for (const auto& e : s.events) by_user[e.user_id].push_back(&e);
  }
  UserIndex idx;
  idx.users.reserve(by_user.size());
  for (const auto& [u, _] : by_user) idx.users.push_back(u);
  std::sort(idx.users.begin(), idx.users.end());
  idx.events.reserve(idx.users.size());
  for (const auto& u : idx.users) {
    auto& v = by_user[u];
    std::stable_sort(v.begin(), v.end(), [](const CommentEvent* a, const CommentEvent* b) { return a->time() < b->time(); });
    idx.events.push_back(std::move(v));
  }
  return idx;
}

UserActivitySummary summarize_user(std::string_view user_id, std::span<const CommentEvent* const> events,
                                   const InterventionSpec& spec) {
  UserActivitySummary s;
  s.user_id = std::string(user_id);
  s.monthly_pre_counts.assign(static_cast<std::size_t>(spec.monthly_bins()), 0);
  double prev = 0.0;
  bool have_prev = false;
  for (const CommentEvent* e : events) {
    double t = e->time();
    if (spec.in_pre(t)) {
      ++s.pre_count;
      if (spec.is_banned(e->community_id)) ++s.monthly_pre_counts[static_cast<std::size_t>(spec.month_bin(t))];
    } else if (spec.in_post(t)) {
      ++s.post_count;
      if (spec.in_abandonment_window(t, Task::Soft)) ++s.soft_window_count;
    }
    if (have_prev) s.min_gap_seconds = std::min(s.min_gap_seconds, t - prev);
    prev = t;
    have_prev = true;
  }
  return s;
}

UserActivitySummary summarize_user(std::span<const CommentEvent> events, const InterventionSpec& spec) {
  std::vector<const CommentEvent*> ptrs;
  ptrs.reserve(events.size());
  for (const auto& e : events) ptrs.push_back(&e);
  std::stable_sort(ptrs.begin(), ptrs.end(), [](const CommentEvent* a, const CommentEvent* b) { return a->time() < b->time(); });
  return summarize_user(events.empty() ? std::string_view{} : std::string_view(events.front().user_id), ptrs, spec);
}

AbandonmentLabel label_user(const UserActivitySummary& summary, Task task) {
  if (summary.pre_count == 0) {
    throw CohortViolation("user '" + summary.user_id + "' has no pre-intervention activity and is out of cohort");
  }
  AbandonmentLabel l;
  l.user_id = summary.user_id;
  l.task = task;
  l.label = summary.abandonment_count(task) == 0 ? Label::Abandoning : Label::NonAbandoning;
  return l;
}

std::set<std::string> filter_consistent_users(std::span<const CommentEvent> events, const InterventionSpec& spec) {
  const auto bins = static_cast<std::size_t>(spec.monthly_bins());
  std::map<std::string, std::vector<bool>> seen;
  for (const auto& e : events) {
    if (!spec.is_banned(e.community_id)) continue;
    int b = spec.month_bin(e.time());
    if (b < 0) continue;
    auto& v = seen[e.user_id];
    if (v.empty()) v.assign(bins, false);
    v[static_cast<std::size_t>(b)] = true;
  }
  std::set<std::string> kept;
  for (const auto& [u, v] : seen) {
    if (std::all_of(v.begin(), v.end(), [](bool x) { return x; })) kept.insert(u);
  }
  return kept;
}

std::set<std::string> find_bots(std::span<const CommentEvent> events, double min_gap) {
  std::unordered_map<std::string, std::vector<double>> times;
  for (const auto& e : events) times[e.user_id].push_back(e.time());
  std::set<std::string> bots;
  for (auto& [u, t] : times) {
    std::sort(t.begin(), t.end());
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i] - t[i - 1] < min_gap) {
        bots.insert(u);
        break;
      }
    }
  }
  return bots;
}

BotRemoval remove_bots(std::vector<CommentEvent> events, double min_gap) {
  BotRemoval out;
  out.removed = find_bots(events, min_gap);
  out.events.reserve(events.size());
  for (auto& e : events) {
    if (!out.removed.count(e.user_id)) out.events.push_back(std::move(e));
  }
  return out;
}

std::set<std::string> drop_externally_inactive(const std::set<std::string>& users, const SplitSet& splits) {
  std::set<std::string> active;
  for (auto tag : {SplitTag::NonBannedBefore, SplitTag::NonBannedAfter}) {
    for (const auto& e : splits[tag].events) {
      if (users.count(e.user_id)) active.insert(e.user_id);
    }
  }
  return active;
}

SplitSet restrict_to_users(const SplitSet& splits, const std::set<std::string>& users) {
  SplitSet out;
  for (auto tag : kAllSplits) {
    for (const auto& e : splits[tag].events) {
      if (users.count(e.user_id)) out[tag].events.push_back(e);
    }
  }
  return out;
}

nlohmann::json CohortReport::to_json() const {
  return nlohmann::json{{"initial_users", initial_users},
                        {"bots_removed", bots_removed},
                        {"inconsistent_removed", inconsistent_removed},
                        {"externally_inactive_removed", externally_inactive_removed},
                        {"final_users", final_users},
                        {"hard_positives", hard_positives},
                        {"soft_positives", soft_positives}};
}

Cohort build_cohort(const SplitSet& splits, const InterventionSpec& spec, const CohortOptions& options) {
  spec.validate();
  const auto& banned = splits[SplitTag::BannedBefore].events;
  std::set<std::string> users;
  for (const auto& e : banned) users.insert(e.user_id);

  Cohort cohort;
  cohort.report.initial_users = users.size();

  if (options.remove_bots) {
    auto bots = find_bots(banned, options.bot_gap_seconds);
    for (const auto& b : bots) users.erase(b);
    cohort.report.bots_removed = bots.size();
  }
  if (options.require_consistency) {
    auto consistent = filter_consistent_users(banned, spec);
    std::set<std::string> kept;
    std::set_intersection(users.begin(), users.end(), consistent.begin(), consistent.end(),
                          std::inserter(kept, kept.end()));
    cohort.report.inconsistent_removed = users.size() - kept.size();
    users = std::move(kept);
  }
  if (options.drop_externally_inactive) {
    auto kept = drop_externally_inactive(users, splits);
    cohort.report.externally_inactive_removed = users.size() - kept.size();
    users = std::move(kept);
  }

  UserIndex idx = index_users(splits);
  for (const auto& u : users) {
    std::size_t pos = idx.find(u);
    UserActivitySummary s = summarize_user(u, idx.events[pos], spec);
    if (s.pre_count == 0) continue;
    cohort.hard_labels.push_back(label_user(s, Task::Hard).label == Label::Abandoning ? 1 : 0);
    cohort.soft_labels.push_back(label_user(s, Task::Soft).label == Label::Abandoning ? 1 : 0);
    cohort.users.push_back(u);
    cohort.summaries.push_back(std::move(s));
  }
  cohort.report.final_users = cohort.users.size();
  for (std::size_t i = 0; i < cohort.users.size(); ++i) {
    cohort.report.hard_positives += static_cast<std::size_t>(cohort.hard_labels[i]);
    cohort.report.soft_positives += static_cast<std::size_t>(cohort.soft_labels[i]);
  }
  return cohort;
}

void write_labels_csv(const std::filesystem::path& path, const std::vector<std::string>& users,
                      const std::vector<int>& labels) {
  if (users.size() != labels.size()) throw UsageError("label table: user and label counts differ");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "user_id,label\n";
  for (std::size_t i = 0; i < users.size(); ++i) out << users[i] << ',' << labels[i] << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

LabelTable read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("user_id,label", 0) != 0) {
    throw DataError(path.string() + ": expected header user_id,label");
  }
  LabelTable t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto comma = line.rfind(',');
    if (comma == std::string::npos) throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    std::string value = line.substr(comma + 1);
    if (value != "0" && value != "1") throw DataError(path.string() + ":" + std::to_string(lineno) + ": label must be 0 or 1");
    t.users.push_back(line.substr(0, comma));
    t.labels.push_back(value == "1" ? 1 : 0);
  }
  return t;
}

}  // namespace abandon
