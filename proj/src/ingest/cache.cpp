#include "abandon/ingest/cache.hpp"

#include <algorithm>
#include <limits>
#include <span>

#include "abandon/common/binary_io.hpp"
#include "abandon/common/error.hpp"

namespace abandon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kSplitMagic[5] = "ABSC";

std::string split_file_name(SplitTag tag) { return std::string(split_name(tag)) + ".col"; }

void check_version(std::uint32_t found, const std::string& where) {
  if (found != kCacheFormatVersion) {
    throw DataError("cache " + where + " has format version " + std::to_string(found) +
                    ", this build reads version " + std::to_string(kCacheFormatVersion) +
                    (found > kCacheFormatVersion ? " (written by a newer release)" : " (written by an older release)"));
  }
}

}  // namespace

struct CacheWriter::SplitFile {
  SplitTag tag;
  std::ofstream out;
  std::vector<CommentEvent> block;
  std::uint64_t count = 0;
  std::int64_t t_min = std::numeric_limits<std::int64_t>::max();
  std::int64_t t_max = std::numeric_limits<std::int64_t>::min();

  void flush_block() {
    if (block.empty()) return;
    BinaryWriter w(out);
    w.write<std::uint32_t>(static_cast<std::uint32_t>(block.size()));
    for (const auto& e : block) w.write_string(e.event_id);
    for (const auto& e : block) w.write_string(e.user_id);
    for (const auto& e : block) w.write_string(e.community_id);
    for (const auto& e : block) w.write<std::int64_t>(e.timestamp);
    for (const auto& e : block) w.write<double>(e.subsecond);
    for (const auto& e : block) w.write_string(e.body);
    for (const auto& e : block) w.write<std::int64_t>(e.vote_score);
    for (const auto& e : block) {
      w.write<std::uint8_t>(e.parent_id ? 1 : 0);
      if (e.parent_id) w.write_string(*e.parent_id);
    }
    for (const auto& e : block) w.write<std::uint8_t>(static_cast<std::uint8_t>((e.is_thread_root ? 1 : 0) | (e.is_stickied ? 2 : 0)));
    block.clear();
  }
};

CacheWriter::CacheWriter(fs::path dir, std::size_t block_rows) : dir_(std::move(dir)), block_rows_(std::max<std::size_t>(1, block_rows)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
  for (auto tag : kAllSplits) {
    auto f = std::make_unique<SplitFile>();
    f->tag = tag;
    f->out.open(dir_ / split_file_name(tag), std::ios::binary | std::ios::trunc);
    if (!f->out) throw IoError("cannot write " + (dir_ / split_file_name(tag)).string());
    BinaryWriter w(f->out);
    w.write_bytes(kSplitMagic, 4);
    w.write<std::uint32_t>(kCacheFormatVersion);
    w.write_string(std::string(split_name(tag)));
    files_.push_back(std::move(f));
  }
}

CacheWriter::~CacheWriter() = default;

void CacheWriter::add(SplitTag tag, const CommentEvent& e) {
  if (finished_) throw UsageError("cache writer already finished");
  auto& f = *files_[static_cast<std::size_t>(tag)];
  f.block.push_back(e);
  ++f.count;
  f.t_min = std::min(f.t_min, e.timestamp);
  f.t_max = std::max(f.t_max, e.timestamp);
  if (f.block.size() >= block_rows_) f.flush_block();
}

void CacheWriter::finish(const json& extra) {
  if (finished_) return;
  json splits = json::object();
  for (auto& fp : files_) {
    auto& f = *fp;
    f.flush_block();
    BinaryWriter w(f.out);
    w.write<std::uint32_t>(0);
    w.write<std::uint64_t>(f.count);
    f.out.close();
    if (!f.out) throw IoError("failed writing cache split " + std::string(split_name(f.tag)));
    json entry{{"file", split_file_name(f.tag)}, {"events", f.count}};
    entry["t_min"] = f.count ? json(f.t_min) : json(nullptr);
    entry["t_max"] = f.count ? json(f.t_max) : json(nullptr);
    splits[std::string(split_name(f.tag))] = entry;
  }
  json manifest{{"format", "abandon-event-cache"}, {"format_version", kCacheFormatVersion}, {"splits", splits},
                {"info", extra}};
  std::ofstream m(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  m << manifest.dump(2) << '\n';
  if (!m) throw IoError("cannot write cache manifest");
  finished_ = true;
}

void write_cache(const SplitSet& splits, const fs::path& dir, const json& extra) {
  CacheWriter w(dir);
  for (const auto& s : splits.splits) {
    for (const auto& e : s.events) w.add(s.tag, e);
  }
  w.finish(extra);
}

json read_cache_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("no cache manifest in " + dir.string());
  json m = json::parse(in, nullptr, false);
  if (m.is_discarded() || !m.is_object()) throw DataError("cache manifest in " + dir.string() + " is not valid JSON");
  if (!m.contains("format_version")) throw DataError("cache manifest lacks format_version");
  check_version(m.at("format_version").get<std::uint32_t>(), "manifest");
  return m;
}

SplitSet read_cache(const fs::path& dir) {
  json manifest = read_cache_manifest(dir);
  SplitSet out;
  for (auto tag : kAllSplits) {
    const auto& entry = manifest.at("splits").at(std::string(split_name(tag)));
    fs::path file = dir / entry.at("file").get<std::string>();
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read cache split " + file.string());
    BinaryReader r(in);
    r.expect_magic(kSplitMagic, "cache split");
    check_version(r.read<std::uint32_t>(), file.filename().string());
    if (r.read_string() != split_name(tag)) throw DataError("cache split " + file.string() + " has the wrong tag");
    auto& events = out[tag].events;
    events.reserve(entry.at("events").get<std::size_t>());
    for (;;) {
      auto n = r.read<std::uint32_t>();
      if (n == 0) break;
      std::size_t base = events.size();
      events.resize(base + n);
      auto rows = std::span(events).subspan(base);
      for (auto& e : rows) e.event_id = r.read_string();
      for (auto& e : rows) e.user_id = r.read_string();
      for (auto& e : rows) e.community_id = r.read_string();
      for (auto& e : rows) e.timestamp = r.read<std::int64_t>();
      for (auto& e : rows) e.subsecond = r.read<double>();
      for (auto& e : rows) e.body = r.read_string();
      for (auto& e : rows) e.vote_score = r.read<std::int64_t>();
      for (auto& e : rows) {
        if (r.read<std::uint8_t>()) e.parent_id = r.read_string();
      }
      for (auto& e : rows) {
        auto flags = r.read<std::uint8_t>();
        e.is_thread_root = flags & 1;
        e.is_stickied = flags & 2;
      }
    }
    auto total = r.read<std::uint64_t>();
    if (total != events.size() || total != entry.at("events").get<std::uint64_t>()) {
      throw DataError("cache split " + file.string() + " is truncated or inconsistent with its manifest");
    }
  }
  return out;
}

}  // namespace abandon
