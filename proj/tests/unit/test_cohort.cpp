#include <doctest.h>

#include "abandon/cohort/cohort.hpp"
#include "abandon/common/rng.hpp"
#include "test_util.hpp"

using namespace abandon;

namespace {

InterventionSpec spec() {
  InterventionSpec s;
  s.banned_communities = {"b1", "b2"};
  return s;
}

constexpr std::int64_t kDay = kSecondsPerDay;

CommentEvent ev(std::string user, std::string community, double t) {
  static int counter = 0;
  CommentEvent e;
  e.event_id = "e" + std::to_string(counter++);
  e.user_id = std::move(user);
  e.community_id = std::move(community);
  e.timestamp = static_cast<std::int64_t>(std::floor(t));
  e.subsecond = t - std::floor(t);
  return e;
}

double at(const InterventionSpec& s, double days) { return static_cast<double>(s.t0) + days * kDay; }

}  // namespace

TEST_CASE("window geometry") {
  auto s = spec();
  CHECK(s.pre_start() == s.t0 - 210 * kDay);
  CHECK(s.post_end() == s.t0 + 210 * kDay);
  CHECK(s.monthly_bins() == 7);
  // Offset 120 counted with t0 as day one: the window covers the last 92 days.
  CHECK(s.soft_window_start() == s.t0 + 119 * kDay);
  CHECK((s.post_end() - s.soft_window_start()) / kDay + 1 == 92);
  auto alt = s;
  alt.count_t0_as_day = false;
  CHECK(alt.soft_window_start() == s.t0 + 120 * kDay);
  CHECK(s.month_bin(at(s, -0.5)) == 6);
  CHECK(s.month_bin(at(s, -30)) == 6);
  CHECK(s.month_bin(at(s, -30.01)) == 5);
  CHECK(s.month_bin(at(s, -210)) == 0);
  CHECK(s.month_bin(at(s, -211)) == -1);
  CHECK(s.month_bin(static_cast<double>(s.t0)) == -1);
}

TEST_CASE("spec validation") {
  auto s = spec();
  s.soft_offset_days = 210;
  CHECK_THROWS(s.validate());
  s = spec();
  s.pre_days = 0;
  CHECK_THROWS(s.validate());
  auto round = InterventionSpec::from_json(spec().to_json());
  CHECK(round.banned_communities == spec().banned_communities);
  CHECK(round.t0 == spec().t0);
}

TEST_CASE("summary of a user active only before t0") {
  auto s = spec();
  std::vector<CommentEvent> events;
  for (int i = 1; i <= 5; ++i) events.push_back(ev("u", "b1", at(s, -i * 10)));
  auto sum = summarize_user(events, s);
  CHECK(sum.pre_count == 5);
  CHECK(sum.post_count == 0);
  CHECK(sum.soft_window_count == 0);
  CHECK(label_user(sum, Task::Hard).label == Label::Abandoning);
}

TEST_CASE("event exactly at t0 is in neither period") {
  auto s = spec();
  std::vector<CommentEvent> events{ev("u", "x", at(s, -1)), ev("u", "x", static_cast<double>(s.t0))};
  auto sum = summarize_user(events, s);
  CHECK(sum.pre_count == 1);
  CHECK(sum.post_count == 0);
}

TEST_CASE("posting only during the early post period is soft but not hard abandonment") {
  auto s = spec();
  std::vector<CommentEvent> events{ev("u", "b1", at(s, -3))};
  for (int d = 5; d < 118; d += 10) events.push_back(ev("u", "x", at(s, d)));
  auto sum = summarize_user(events, s);
  CHECK(sum.post_count > 0);
  CHECK(sum.soft_window_count == 0);
  CHECK(label_user(sum, Task::Hard).label == Label::NonAbandoning);
  CHECK(label_user(sum, Task::Soft).label == Label::Abandoning);
}

TEST_CASE("soft window boundaries are closed") {
  auto s = spec();
  std::vector<CommentEvent> first{ev("u", "b1", at(s, -3)), ev("u", "x", static_cast<double>(s.soft_window_start()))};
  CHECK(summarize_user(first, s).soft_window_count == 1);
  std::vector<CommentEvent> last{ev("u", "b1", at(s, -3)), ev("u", "x", static_cast<double>(s.post_end()))};
  CHECK(summarize_user(last, s).soft_window_count == 1);
  std::vector<CommentEvent> before{ev("u", "b1", at(s, -3)), ev("u", "x", static_cast<double>(s.soft_window_start()) - 1)};
  CHECK(summarize_user(before, s).soft_window_count == 0);
}

TEST_CASE("labels from counts") {
  UserActivitySummary sum;
  sum.user_id = "u";
  sum.pre_count = 10;
  sum.post_count = 3;
  sum.soft_window_count = 0;
  CHECK(label_user(sum, Task::Soft).label == Label::Abandoning);
  sum.soft_window_count = 3;
  CHECK(label_user(sum, Task::Soft).label == Label::NonAbandoning);
  sum.pre_count = 0;
  CHECK_THROWS_AS(label_user(sum, Task::Hard), CohortViolation);
}

TEST_CASE("label properties on random users") {
  auto s = spec();
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<CommentEvent> events{ev("u", "b1", at(s, -1 - rng.uniform() * 200))};
    int n = static_cast<int>(rng.index(6));
    for (int i = 0; i < n; ++i) events.push_back(ev("u", "x", at(s, rng.uniform(-200, 215))));
    auto sum = summarize_user(events, s);
    CHECK(sum.soft_window_count <= sum.post_count);
    std::size_t monthly = 0;
    for (auto c : sum.monthly_pre_counts) monthly += c;
    CHECK(monthly <= sum.pre_count);
    bool hard = label_user(sum, Task::Hard).label == Label::Abandoning;
    bool soft = label_user(sum, Task::Soft).label == Label::Abandoning;
    if (hard) CHECK(soft);
    // Adding an event inside the window can only make the user non-abandoning.
    events.push_back(ev("u", "x", at(s, 200)));
    auto after = summarize_user(events, s);
    CHECK(label_user(after, Task::Soft).label == Label::NonAbandoning);
    CHECK(label_user(after, Task::Hard).label == Label::NonAbandoning);
  }
}

TEST_CASE("consistency filter needs every monthly block") {
  auto s = spec();
  std::vector<CommentEvent> events;
  for (int b = 0; b < 7; ++b) events.push_back(ev("steady", "b1", at(s, -5 - 30 * b)));
  for (int b = 0; b < 7; ++b) {
    if (b != 3) events.push_back(ev("gap", "b2", at(s, -5 - 30 * b)));
  }
  for (int i = 0; i < 100; ++i) events.push_back(ev("burst", "b1", at(s, -205 + i * 0.01)));
  auto kept = filter_consistent_users(events, s);
  CHECK(kept == std::set<std::string>{"steady"});
}

TEST_CASE("bot rule uses a strict one-second threshold") {
  std::vector<CommentEvent> events{ev("bot", "x", 1000.0), ev("bot", "x", 1000.5), ev("bot", "x", 4600.5),
                                   ev("edge", "x", 2000.0), ev("edge", "x", 2001.0),
                                   ev("single", "x", 3000.0)};
  auto out = remove_bots(events);
  CHECK(out.removed == std::set<std::string>{"bot"});
  CHECK(out.events.size() == 3);
}

TEST_CASE("externally inactive users are dropped") {
  SplitSet splits;
  splits[SplitTag::BannedBefore].events = {ev("a", "b1", 10), ev("b", "b1", 11)};
  splits[SplitTag::NonBannedBefore].events = {ev("b", "x", 12)};
  CHECK(drop_externally_inactive({"a", "b"}, splits) == std::set<std::string>{"b"});
  CHECK(drop_externally_inactive({}, splits).empty());
}

TEST_CASE("build_cohort applies filters in sequence") {
  auto s = spec();
  SplitSet splits;
  auto& banned = splits[SplitTag::BannedBefore].events;
  auto& ext = splits[SplitTag::NonBannedBefore].events;
  auto& after = splits[SplitTag::NonBannedAfter].events;
  for (const std::string u : {"keep_pos", "keep_neg", "bot", "no_ext"}) {
    for (int b = 0; b < 7; ++b) banned.push_back(ev(u, "b1", at(s, -5 - 30 * b)));
  }
  banned.push_back(ev("bot", "b1", at(s, -5) + 0.2));
  for (int b = 0; b < 3; ++b) banned.push_back(ev("sparse", "b1", at(s, -5 - 30 * b)));
  for (const std::string u : {"keep_pos", "keep_neg", "bot", "sparse"}) ext.push_back(ev(u, "x", at(s, -50)));
  after.push_back(ev("keep_neg", "x", at(s, 150)));
  auto cohort = build_cohort(splits, s);
  CHECK(cohort.users == std::vector<std::string>{"keep_neg", "keep_pos"});
  CHECK(cohort.hard_labels == std::vector<int>{0, 1});
  CHECK(cohort.soft_labels == std::vector<int>{0, 1});
  CHECK(cohort.report.initial_users == 5);
  CHECK(cohort.report.bots_removed == 1);
  CHECK(cohort.report.inconsistent_removed == 1);
  CHECK(cohort.report.externally_inactive_removed == 1);
}

TEST_CASE("label csv round trip") {
  TempDir dir;
  write_labels_csv(dir.path() / "l.csv", {"a", "b"}, {1, 0});
  auto t = read_labels_csv(dir.path() / "l.csv");
  CHECK(t.users == std::vector<std::string>{"a", "b"});
  CHECK(t.labels == std::vector<int>{1, 0});
}
