#include "abandon/cohort/intervention.hpp"

#include <cmath>

#include "abandon/common/error.hpp"

namespace abandon {

std::string_view task_name(Task t) { return t == Task::Hard ? "hard" : "soft"; }

Task parse_task(std::string_view name) {
  if (name == "hard" || name == "Hard") return Task::Hard;
  if (name == "soft" || name == "Soft") return Task::Soft;
  throw UsageError("unknown task '" + std::string(name) + "' (expected hard or soft)");
}

void InterventionSpec::validate() const {
  if (t0 <= 0) throw UsageError("intervention t0 must be positive");
  if (pre_days <= 0) throw UsageError("pre_days must be positive");
  if (post_days <= 0) throw UsageError("post_days must be positive");
  if (soft_offset_days < 0 || soft_offset_days >= post_days) {
    throw UsageError("soft_offset_days must lie in [0, post_days)");
  }
}

int InterventionSpec::offset_days(Task task) const { return task == Task::Hard ? 0 : soft_offset_days; }

std::int64_t InterventionSpec::soft_window_start() const {
  int days = soft_offset_days;
  if (count_t0_as_day && days > 0) days -= 1;
  return t0 + days * kSecondsPerDay;
}

bool InterventionSpec::in_abandonment_window(double t, Task task) const {
  if (task == Task::Hard || soft_offset_days == 0) return in_post(t);
  return t >= static_cast<double>(soft_window_start()) && t > static_cast<double>(t0) &&
         t <= static_cast<double>(post_end());
}

int InterventionSpec::month_bin(double t) const {
  if (!in_pre(t)) return -1;
  double back = static_cast<double>(t0) - t;
  int from_t0 = static_cast<int>(std::ceil(back / static_cast<double>(kDaysPerBin * kSecondsPerDay))) - 1;
  int bins = monthly_bins();
  if (from_t0 >= bins) from_t0 = bins - 1;
  return bins - 1 - from_t0;
}

InterventionSpec InterventionSpec::from_json(const nlohmann::json& j) {
  InterventionSpec s;
  s.t0 = j.value("t0", s.t0);
  s.pre_days = j.value("pre_days", s.pre_days);
  s.post_days = j.value("post_days", s.post_days);
  s.soft_offset_days = j.value("soft_offset_days", s.soft_offset_days);
  s.count_t0_as_day = j.value("count_t0_as_day", s.count_t0_as_day);
  if (j.contains("banned_communities")) {
    for (const auto& c : j.at("banned_communities")) s.banned_communities.insert(c.get<std::string>());
  }
  s.validate();
  return s;
}

nlohmann::json InterventionSpec::to_json() const {
  nlohmann::ordered_json j;
  j["t0"] = t0;
  j["pre_days"] = pre_days;
  j["post_days"] = post_days;
  j["soft_offset_days"] = soft_offset_days;
  j["count_t0_as_day"] = count_t0_as_day;
  j["banned_communities"] = banned_communities;
  return nlohmann::json::parse(j.dump());
}

}  // namespace abandon
