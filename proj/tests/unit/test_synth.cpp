#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "abandon/cohort/cohort.hpp"
#include "abandon/common/error.hpp"
#include "abandon/common/log.hpp"
#include "abandon/evaluate/groups.hpp"
#include "abandon/features/builder.hpp"
#include "abandon/ingest/parse.hpp"
#include "abandon/ingest/partition.hpp"
#include "abandon/mlcore/preprocess.hpp"
#include "abandon/synth/synth.hpp"
#include "abandon/text/sentiment.hpp"
#include "abandon/text/toxicity.hpp"
#include "test_util.hpp"

using namespace abandon;
using nlohmann::json;

namespace {

SynthConfig small(std::size_t users = 600, std::uint64_t seed = 5) {
  SynthConfig c;
  c.n_users = users;
  c.n_banned_groups = 5;
  c.n_nonbanned_groups = 12;
  c.seed = seed;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Cached so several cases share one generation.
const SynthData& shared_data() {
  static const SynthData d = generate(small(1500, 9));
  return d;
}

}  // namespace

TEST_CASE("settings round trip and validation") {
  auto c = small();
  c.effects[SignalConcept::IdentityAttack] = 0.5;
  c.overlap_target = {{100, 10, 0, 0, 0}, {20, 100, 0, 0, 0}, {0, 0, 100, 0, 0}, {0, 0, 0, 100, 0}, {0, 0, 0, 0, 100}};
  auto back = SynthConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.effects.at(SignalConcept::IdentityAttack) == 0.5);

  CHECK_THROWS_AS(SynthConfig::from_json({{"colour", 1}}), UsageError);
  CHECK_THROWS_AS(SynthConfig::from_json({{"effects", {{"karma", 1.0}}}}), UsageError);
  CHECK_THROWS_AS(SynthConfig::from_json({{"hard_prior", 0.0}}), UsageError);
  CHECK_THROWS_AS(SynthConfig::from_json({{"hard_prior", 0.5}, {"soft_prior", 0.3}}), UsageError);
  auto bad = small();
  bad.effects[SignalConcept::CommentGap] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(bad.validate(), UsageError);
  CHECK(parse_signal_concept("external_trend") == SignalConcept::ExternalTrend);

  // Defaults are documented in full.
  auto j = SynthConfig{}.to_json();
  CHECK(j["hard_prior"] == 0.149);
  CHECK(j["soft_prior"] == 0.269);
  CHECK(j["effects"].size() == 4);
}

TEST_CASE("infeasible overlap targets are refused with a reason") {
  auto c = small();
  c.n_banned_groups = 3;
  c.overlap_target = {{100, 70, 40}, {10, 100, 0}, {10, 0, 100}};
  CHECK_THROWS_WITH_AS(generate(c), doctest::Contains("at most two groups"), UsageError);
  c.overlap_target = {{100, 10, 0}, {0, 100, 0}, {0, 0, 100}};
  CHECK_THROWS_WITH_AS(generate(c), doctest::Contains("not the other way round"), UsageError);
  // Sizes implied around the cycle 0-1-2 disagree.
  c.overlap_target = {{100, 10, 10}, {20, 100, 10}, {10, 10, 100}};
  CHECK_THROWS_WITH_AS(generate(c), doctest::Contains("contradictory sizes"), UsageError);
  c.overlap_target = {{100, 10}, {10, 100}};
  CHECK_THROWS_AS(generate(c), UsageError);
}

TEST_CASE("generation is deterministic and independent of the thread count") {
  TempDir dir;
  auto c = small(300, 3);
  auto a = generate(c);
  c.threads = 4;
  auto b = generate(c);
  CHECK(a.events == b.events);
  write_dump(dir.path() / "a.ndjson", a.events);
  write_dump(dir.path() / "b.ndjson", b.events);
  CHECK(slurp(dir.path() / "a.ndjson") == slurp(dir.path() / "b.ndjson"));
  c.seed = 4;
  CHECK(generate(c).events != a.events);
}

TEST_CASE("events are well formed") {
  const auto& d = shared_data();
  const auto& spec = d.intervention;
  std::set<std::string> ids;
  std::unordered_map<std::string, const CommentEvent*> by_id;
  std::map<std::string, std::vector<std::int64_t>> times;
  std::map<std::string, std::size_t> violations;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) ++violations[what];
  };
  for (std::size_t k = 0; k < d.events.size(); ++k) {
    const auto& e = d.events[k];
    expect(ids.insert(e.event_id).second, "duplicate id");
    expect(e.timestamp != spec.t0, "comment at t0");
    expect(e.timestamp >= spec.pre_start() && e.timestamp <= spec.post_end(), "outside the frame");
    expect(e.timestamp < spec.t0 || !spec.is_banned(e.community_id), "banned community after t0");
    if (k > 0) {
      const auto& p = d.events[k - 1];
      expect(p.timestamp < e.timestamp || (p.timestamp == e.timestamp && p.user_id <= e.user_id), "order");
    }
    if (e.parent_id && refers_to_comment(*e.parent_id)) {
      auto it = by_id.find(std::string(strip_kind_prefix(*e.parent_id)));
      expect(it != by_id.end(), "reply to an unknown or later comment");
      if (it != by_id.end()) {
        expect(it->second->user_id != e.user_id, "self reply");
        expect(it->second->community_id == e.community_id, "reply across communities");
      }
    }
    by_id[e.event_id] = &e;
    times[e.user_id].push_back(e.timestamp);
  }
  // Whole, distinct seconds: no two comments of a user under a second apart.
  for (auto& [user, t] : times) {
    std::sort(t.begin(), t.end());
    for (std::size_t k = 1; k < t.size(); ++k) expect(t[k] - t[k - 1] >= 1, "sub-second gap");
  }
  CHECK(violations.empty());
  for (const auto& [what, count] : violations) MESSAGE(what << ": " << count);
  CHECK(times.size() == d.users.size());
  for (const auto& u : d.users) {
    CHECK(!u.groups.empty());
    CHECK(u.groups.size() <= 2);
  }
}

TEST_CASE("labels agree with the cohort's own labelling") {
  const auto& d = shared_data();
  auto part = partition_events(d.events, d.intervention);
  CHECK(part.report.discarded() == 0);
  auto cohort = build_cohort(part.splits, d.intervention);
  REQUIRE(cohort.users == d.user_ids());
  CHECK(cohort.hard_labels == d.labels(Task::Hard));
  CHECK(cohort.soft_labels == d.labels(Task::Soft));
  for (std::size_t i = 0; i < d.users.size(); ++i) {
    if (d.users[i].hard) CHECK(d.users[i].soft == 1);
  }
  const auto hard = std::accumulate(cohort.hard_labels.begin(), cohort.hard_labels.end(), 0);
  const auto soft = std::accumulate(cohort.soft_labels.begin(), cohort.soft_labels.end(), 0);
  CHECK(hard == std::lround(0.149 * 1500));
  CHECK(soft == std::lround(0.269 * 1500));
}

TEST_CASE("group membership survives the participation threshold") {
  const auto& d = shared_data();
  auto part = partition_events(d.events, d.intervention);
  auto groups = assign_groups(part.splits, d.user_ids());
  REQUIRE(groups.groups.size() == d.config.n_banned_groups);
  for (std::size_t g = 0; g < groups.groups.size(); ++g) {
    CHECK(groups.groups[g] == banned_group_name(g));
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < d.users.size(); ++i)
      if (std::count(d.users[i].groups.begin(), d.users[i].groups.end(), g)) expected.push_back(i);
    CHECK(groups.members[g] == expected);
  }
  CHECK(groups.ungrouped(d.users.size()).empty());
  auto o = d.overlap();
  for (std::size_t g = 0; g < o.rows(); ++g) CHECK(o(g, g) == 100.0);
}

TEST_CASE("an overlap target is realized") {
  auto c = small(3000, 12);
  c.n_banned_groups = 4;
  // Sizes 1 : 2 : 1 : 0.5 follow from o_ij N_i = o_ji N_j.
  c.overlap_target = {{100, 30, 10, 0}, {15, 100, 0, 5}, {10, 0, 100, 20}, {0, 20, 40, 100}};
  auto d = generate(c);
  auto o = d.overlap();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(std::fabs(o(i, j) - (i == j ? 100.0 : c.overlap_target[i][j])) <= 5.0);
}

TEST_CASE("with no effects the labels ignore behaviour") {
  auto c = small(2000, 21);
  for (auto s : kAllSignalConcepts) c.effects[s] = 0.0;
  auto d = generate(c);
  auto y = d.labels(Task::Hard);
  for (auto s : kAllSignalConcepts) {
    std::vector<double> z, lab;
    for (std::size_t i = 0; i < d.users.size(); ++i) {
      z.push_back(d.users[i].latent[static_cast<int>(s)]);
      lab.push_back(y[i]);
    }
    const double mz = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    const double ml = std::accumulate(lab.begin(), lab.end(), 0.0) / lab.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      sxy += (z[i] - mz) * (lab[i] - ml);
      sxx += (z[i] - mz) * (z[i] - mz);
      syy += (lab[i] - ml) * (lab[i] - ml);
    }
    CHECK(std::fabs(sxy / std::sqrt(sxx * syy)) < 0.08);
  }
}

TEST_CASE("a strong falling external trend puts trend_ext in the ANOVA top ten") {
  log::set_quiet(true);
  auto c = small(1000, 33);
  for (auto s : kAllSignalConcepts) c.effects[s] = 0.0;
  c.effects[SignalConcept::ExternalTrend] = -4.0;
  auto d = generate(c);
  auto part = partition_events(d.events, d.intervention);
  auto cohort = build_cohort(part.splits, d.intervention);
  text::SentimentAnalyzer sentiment;
  text::LexiconToxicityScorer toxicity;
  auto fm = build_matrix(cohort.users, FeatureRegistry::builtin(), part.splits, d.intervention, {&sentiment, &toxicity})
                .matrix;
  Labels y(cohort.hard_labels.begin(), cohort.hard_labels.end());
  auto top = select_top_k(anova_f(fm.values, y), 10);
  CHECK(std::count(top.begin(), top.end(), fm.column_index("trend_ext")) == 1);
}

TEST_CASE("dumps parse back to the generated events") {
  TempDir dir;
  auto d = generate(small(200, 2));
  for (const char* name : {"dump.ndjson", "dump.ndjson.gz"}) {
    write_dump(dir.path() / name, d.events);
    auto parsed = parse_dump_file(dir.path() / name);
    CHECK(parsed.report.skipped == 0);
    CHECK(parsed.events == d.events);
  }
  write_groups_csv(dir.path() / "groups.csv", d);
  auto text = slurp(dir.path() / "groups.csv");
  CHECK(text.rfind("user_id,groups\nuser_0000000,", 0) == 0);
}

TEST_CASE("scale dumps have the requested size and parse cleanly") {
  TempDir dir;
  write_scale_dump(dir.path() / "big.ndjson", 5000, 7);
  auto parsed = parse_dump_file(dir.path() / "big.ndjson");
  CHECK(parsed.report.lines == 5000);
  CHECK(parsed.report.parsed == 5000);
  write_scale_dump(dir.path() / "again.ndjson", 5000, 7);
  CHECK(slurp(dir.path() / "big.ndjson") == slurp(dir.path() / "again.ndjson"));
}
