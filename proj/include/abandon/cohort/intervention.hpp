#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

namespace abandon {

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr int kDaysPerBin = 30;

enum class Task { Hard, Soft };

std::string_view task_name(Task t);
Task parse_task(std::string_view name);

// Window geometry around the intervention time t0.
//
//   pre period         [t0 - pre_days, t0)
//   post period        (t0, t0 + post_days]
//   abandonment window [t0 + offset, t0 + post_days] for the soft task,
//                      the whole post period for the hard task.
//
// With count_t0_as_day set, day 1 of the offset is t0's own day, so an
// offset of 120 days starts the window 119 days after t0 and the window
// spans the final 92 days of the post period.
struct InterventionSpec {
  std::int64_t t0 = 1593388800;  // 2020-06-29T00:00:00Z
  int pre_days = 210;
  int post_days = 210;
  int soft_offset_days = 120;
  bool count_t0_as_day = true;
  std::set<std::string> banned_communities;

  void validate() const;

  std::int64_t pre_start() const { return t0 - pre_days * kSecondsPerDay; }
  std::int64_t post_end() const { return t0 + post_days * kSecondsPerDay; }
  // Offset of the abandonment window in days after t0 for the task
  // (0 for Hard).
  int offset_days(Task task) const;
  // First instant of the soft abandonment window.
  std::int64_t soft_window_start() const;
  int monthly_bins() const { return (pre_days + kDaysPerBin - 1) / kDaysPerBin; }

  bool in_pre(double t) const { return t >= static_cast<double>(pre_start()) && t < static_cast<double>(t0); }
  bool in_post(double t) const { return t > static_cast<double>(t0) && t <= static_cast<double>(post_end()); }
  bool in_abandonment_window(double t, Task task) const;
  // Index of the 30-day block holding t (0 = oldest), or -1 outside the
  // pre period.
  int month_bin(double t) const;
  bool is_banned(std::string_view community) const {
    return banned_communities.count(std::string(community)) > 0;
  }

  static InterventionSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

}  // namespace abandon
