#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "abandon/common/error.hpp"
#include "abandon/common/hash.hpp"
#include "abandon/ingest/cache.hpp"
#include "abandon/ingest/parse.hpp"
#include "abandon/ingest/partition.hpp"
#include "test_util.hpp"

using namespace abandon;
namespace fs = std::filesystem;

namespace {

const char* kGoodLine =
    R"({"id":"c1","author":"alice","subreddit":"banned_a","created_utc":1590000000,"body":"hello there","score":3,"parent_id":"t3_x","stickied":false})";

InterventionSpec test_spec() {
  InterventionSpec s;
  s.banned_communities = {"banned_a", "banned_b"};
  return s;
}

CommentEvent make_event(std::string id, std::string user, std::string community, std::int64_t t) {
  CommentEvent e;
  e.event_id = std::move(id);
  e.user_id = std::move(user);
  e.community_id = std::move(community);
  e.timestamp = t;
  e.body = "text";
  return e;
}

}  // namespace

TEST_CASE("a valid record parses into one event") {
  std::istringstream in(std::string(kGoodLine) + "\n");
  auto out = parse_dump(in);
  REQUIRE(out.events.size() == 1);
  CHECK(out.report.skipped == 0);
  const auto& e = out.events[0];
  CHECK(e.event_id == "c1");
  CHECK(e.user_id == "alice");
  CHECK(e.community_id == "banned_a");
  CHECK(e.timestamp == 1590000000);
  CHECK(e.vote_score == 3);
  CHECK(e.is_thread_root);
  CHECK_FALSE(e.is_stickied);
}

TEST_CASE("missing timestamp is skipped with its line number") {
  std::string lines = std::string(kGoodLine) + "\n" +
                      R"({"id":"c2","author":"bob","subreddit":"x","body":"no time"})" + "\n";
  std::istringstream in(lines);
  auto out = parse_dump(in);
  CHECK(out.events.size() == 1);
  CHECK(out.report.skipped == 1);
  REQUIRE(out.report.skip_samples.size() == 1);
  CHECK(out.report.skip_samples[0].line == 2);
}

TEST_CASE("a truncated middle line is skipped and order preserved") {
  std::string l1 = kGoodLine;
  std::string l3 = R"({"id":"c3","author":"carol","subreddit":"other","created_utc":1590000100,"body":"","score":-2,"parent_id":"t1_c1"})";
  std::string l2 = l3.substr(0, 30);
  std::istringstream in(l1 + "\n" + l2 + "\n" + l3 + "\n");
  auto out = parse_dump(in);
  REQUIRE(out.events.size() == 2);
  CHECK(out.report.skipped == 1);
  CHECK(out.events[0].event_id == "c1");
  CHECK(out.events[1].event_id == "c3");
  CHECK(out.events[1].body.empty());
  CHECK_FALSE(out.events[1].is_thread_root);
  CHECK(out.events[1].vote_score == -2);
}

TEST_CASE("mostly malformed input is a fatal schema error") {
  std::istringstream in(std::string(kGoodLine) + "\nnot json\nalso not\n");
  CHECK_THROWS_AS(parse_dump(in), DataError);
}

TEST_CASE("alternate field names via mapping") {
  std::istringstream in(R"({"cid":"e9","user":"u","community":"c","ts":"1590000000.25","text":"hi"})" "\n");
  FieldMapping m;
  m.id = "cid";
  m.author = "user";
  m.community = "community";
  m.created = "ts";
  m.body = "text";
  auto out = parse_dump(in, m);
  REQUIRE(out.events.size() == 1);
  CHECK(out.events[0].timestamp == 1590000000);
  CHECK(out.events[0].subsecond == doctest::Approx(0.25));
}

TEST_CASE("duplicate ids are skipped") {
  std::istringstream in(std::string(kGoodLine) + "\n" + kGoodLine + "\n" + kGoodLine + "\n" +
                        R"({"id":"c5","author":"a","subreddit":"s","created_utc":5,"body":"x"})" "\n");
  auto out = parse_dump(in);
  CHECK(out.events.size() == 2);
  CHECK(out.report.duplicates == 2);
}

TEST_CASE("unreadable input is an io error") {
  CHECK_THROWS_AS(parse_dump_file("/nonexistent/dump.jsonl"), IoError);
}

TEST_CASE("parallel parse matches serial parse") {
  std::ostringstream os;
  for (int i = 0; i < 3000; ++i) {
    auto e = make_event("id" + std::to_string(i), "u" + std::to_string(i % 17), i % 3 ? "x" : "banned_a", 1590000000 + i);
    os << to_dump_line(e) << '\n';
    if (i % 100 == 0) os << "{broken\n";
  }
  std::istringstream a(os.str()), b(os.str());
  auto serial = parse_dump(a, {}, 1);
  auto parallel = parse_dump(b, {}, 4);
  CHECK(serial.events == parallel.events);
  CHECK(serial.report.skipped == 30);
}

TEST_CASE("gzip input is read transparently") {
  TempDir dir;
  auto path = dir.path() / "dump.jsonl.gz";
  gzFile gz = gzopen(path.c_str(), "wb");
  std::string content = std::string(kGoodLine) + "\n";
  gzwrite(gz, content.data(), static_cast<unsigned>(content.size()));
  gzclose(gz);
  auto out = parse_dump_file(path);
  REQUIRE(out.events.size() == 1);
  CHECK(out.events[0].event_id == "c1");
}

TEST_CASE("partition routes by community and time") {
  auto spec = test_spec();
  std::vector<CommentEvent> events{
      make_event("a", "u", "banned_a", spec.t0 - kSecondsPerDay),
      make_event("b", "u", "other", spec.t0 + kSecondsPerDay),
      make_event("c", "u", "other", spec.t0),
      make_event("d", "u", "other", spec.t0 - 5),
      make_event("e", "u", "banned_b", spec.t0 + 10),
      make_event("f", "u", "other", spec.post_end() + 1),
  };
  auto r = partition_events(events, spec);
  CHECK(r.splits[SplitTag::BannedBefore].events.size() == 1);
  CHECK(r.splits[SplitTag::BannedBefore].events[0].event_id == "a");
  CHECK(r.splits[SplitTag::NonBannedAfter].events.size() == 1);
  CHECK(r.splits[SplitTag::NonBannedAfter].events[0].event_id == "b");
  CHECK(r.splits[SplitTag::NonBannedBefore].events.size() == 1);
  CHECK(r.report.discarded_at_t0 == 1);
  CHECK(r.report.discarded_banned_after == 1);
  CHECK(r.report.discarded_out_of_frame == 1);
  CHECK(r.report.input == r.splits.total_events() + r.report.discarded());
}

TEST_CASE("partition conserves events on random input") {
  auto spec = test_spec();
  Rng rng(9);
  std::vector<CommentEvent> events;
  for (int i = 0; i < 2000; ++i) {
    std::int64_t t = spec.t0 + rng.integer(-250, 250) * kSecondsPerDay / 1 + rng.integer(-2, 2);
    if (i % 50 == 0) t = spec.t0;
    events.push_back(make_event(std::to_string(i), "u", rng.bernoulli(0.3) ? "banned_a" : "z", t));
  }
  auto r = partition_events(events, spec);
  CHECK(r.report.input == events.size());
  CHECK(r.splits.total_events() + r.report.discarded() == events.size());
  for (const auto& e : r.splits[SplitTag::BannedBefore].events) CHECK(e.timestamp < spec.t0);
  for (const auto& e : r.splits[SplitTag::NonBannedBefore].events) CHECK(e.timestamp < spec.t0);
  for (const auto& e : r.splits[SplitTag::NonBannedAfter].events) CHECK(e.timestamp > spec.t0);
}

TEST_CASE("partition requires banned communities") {
  InterventionSpec spec;
  CHECK_THROWS_AS(partition_events({}, spec), UsageError);
}

TEST_CASE("cache round trip is lossless and deterministic") {
  TempDir dir;
  SplitSet s;
  auto e1 = make_event("a", "u1", "banned_a", 100);
  e1.parent_id = "t1_zz";
  e1.is_thread_root = false;
  e1.subsecond = 0.125;
  e1.vote_score = -7;
  auto e2 = make_event("b", "u2", "x", 200);
  e2.is_stickied = true;
  e2.body = "multi\nline \"quoted\" ünïcode";
  auto e3 = make_event("c", "u1", "x", 300);
  s[SplitTag::BannedBefore].events = {e1};
  s[SplitTag::NonBannedBefore].events = {e2, e3};
  write_cache(s, dir.path() / "one");
  write_cache(s, dir.path() / "two");
  auto back = read_cache(dir.path() / "one");
  CHECK(back == s);
  CHECK(hash_path(dir.path() / "one") == hash_path(dir.path() / "two"));
  auto manifest = read_cache_manifest(dir.path() / "one");
  CHECK(manifest["splits"]["NonBannedAfter"]["events"] == 0);
  CHECK(manifest["splits"]["NonBannedBefore"]["t_min"] == 200);
  CHECK(fs::file_size(dir.path() / "one" / "NonBannedAfter.col") > 0);
}

TEST_CASE("small blocks round trip") {
  TempDir dir;
  SplitSet s;
  for (int i = 0; i < 25; ++i) s[SplitTag::NonBannedAfter].events.push_back(make_event(std::to_string(i), "u", "x", 10 + i));
  {
    CacheWriter w(dir.path(), 4);
    for (const auto& e : s[SplitTag::NonBannedAfter].events) w.add(SplitTag::NonBannedAfter, e);
    w.finish();
  }
  CHECK(read_cache(dir.path()) == s);
}

TEST_CASE("cache from a newer format version is refused") {
  TempDir dir;
  write_cache(SplitSet{}, dir.path());
  auto manifest = read_cache_manifest(dir.path());
  manifest["format_version"] = kCacheFormatVersion + 1;
  std::ofstream(dir.path() / "manifest.json") << manifest.dump();
  CHECK_THROWS_WITH_AS(read_cache(dir.path()), doctest::Contains("newer"), DataError);
}
