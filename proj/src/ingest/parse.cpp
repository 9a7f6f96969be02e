#include "abandon/ingest/parse.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <zlib.h>

#include "abandon/common/error.hpp"
#include "abandon/common/hash.hpp"
#include "abandon/common/parallel.hpp"

namespace abandon {

using nlohmann::json;

std::string_view split_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::BannedBefore: return "BannedBefore";
    case SplitTag::NonBannedBefore: return "NonBannedBefore";
    case SplitTag::NonBannedAfter: return "NonBannedAfter";
  }
  return "?";
}

SplitTag parse_split_name(std::string_view name) {
  for (auto t : kAllSplits) {
    if (split_name(t) == name) return t;
  }
  throw DataError("unknown split tag '" + std::string(name) + "'");
}

std::size_t SplitSet::total_events() const {
  std::size_t n = 0;
  for (const auto& s : splits) n += s.events.size();
  return n;
}

bool refers_to_comment(std::string_view parent_id) { return parent_id.starts_with("t1_"); }

std::string_view strip_kind_prefix(std::string_view id) {
  if (id.size() > 3 && id[0] == 't' && id[1] >= '0' && id[1] <= '9' && id[2] == '_') return id.substr(3);
  return id;
}

FieldMapping FieldMapping::from_json(const json& j) {
  FieldMapping m;
  auto pick = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j.at(key).get<std::string>();
  };
  pick("id", m.id);
  pick("author", m.author);
  pick("community", m.community);
  pick("created", m.created);
  pick("body", m.body);
  pick("score", m.score);
  pick("parent_id", m.parent_id);
  pick("stickied", m.stickied);
  return m;
}

json FieldMapping::to_json() const {
  return json{{"id", id},           {"author", author}, {"community", community},
              {"created", created}, {"body", body},     {"score", score},
              {"parent_id", parent_id}, {"stickied", stickied}};
}

json ParseReport::to_json() const {
  json samples = json::array();
  for (const auto& s : skip_samples) samples.push_back({{"line", s.line}, {"reason", s.reason}});
  return json{{"lines", lines}, {"parsed", parsed}, {"skipped", skipped}, {"duplicates", duplicates},
              {"skip_samples", samples}};
}

namespace {

class StreamLineReader : public LineReader {
 public:
  explicit StreamLineReader(std::istream& in) : in_(in) {}
  bool next(std::string& line) override {
    if (!std::getline(in_, line)) {
      if (in_.bad()) throw IoError("read error on input stream");
      return false;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

 private:
  std::istream& in_;
};

class FileLineReader : public StreamLineReader {
 public:
  explicit FileLineReader(std::unique_ptr<std::ifstream> f) : StreamLineReader(*f), file_(std::move(f)) {}

 private:
  std::unique_ptr<std::ifstream> file_;
};

class GzipLineReader : public LineReader {
 public:
  explicit GzipLineReader(const std::filesystem::path& path) {
    gz_ = gzopen(path.c_str(), "rb");
    if (!gz_) throw IoError("cannot open " + path.string());
    gzbuffer(gz_, 1 << 17);
    buf_.resize(1 << 16);
  }
  ~GzipLineReader() override {
    if (gz_) gzclose(gz_);
  }
  GzipLineReader(const GzipLineReader&) = delete;
  GzipLineReader& operator=(const GzipLineReader&) = delete;

  bool next(std::string& line) override {
    line.clear();
    bool any = false;
    for (;;) {
      if (pos_ == len_) {
        if (eof_) return any;
        int n = gzread(gz_, buf_.data(), static_cast<unsigned>(buf_.size()));
        if (n < 0) {
          int code = 0;
          throw IoError(std::string("gzip read error: ") + gzerror(gz_, &code));
        }
        if (n == 0) {
          eof_ = true;
          return any;
        }
        pos_ = 0;
        len_ = static_cast<std::size_t>(n);
      }
      any = true;
      const char* start = buf_.data() + pos_;
      const void* nl = std::memchr(start, '\n', len_ - pos_);
      if (nl) {
        std::size_t take = static_cast<const char*>(nl) - start;
        line.append(start, take);
        pos_ += take + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
      line.append(start, len_ - pos_);
      pos_ = len_;
    }
  }

 private:
  gzFile gz_ = nullptr;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  bool eof_ = false;
};

bool is_gzip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char magic[2] = {0, 0};
  in.read(reinterpret_cast<char*>(magic), 2);
  return in.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
}

bool is_blank(std::string_view s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

// Reads a required non-empty string field.
const std::string* string_field(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return nullptr;
  const auto& s = it->get_ref<const std::string&>();
  return s.empty() ? nullptr : &s;
}

bool parse_time(const json& v, std::int64_t& seconds, double& frac) {
  double t;
  if (v.is_number_integer()) {
    seconds = v.get<std::int64_t>();
    frac = 0.0;
    return seconds > 0;
  }
  if (v.is_number_float()) {
    t = v.get<double>();
  } else if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s.empty()) return false;
    char* end = nullptr;
    t = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return false;
  } else {
    return false;
  }
  if (!std::isfinite(t) || t <= 0) return false;
  double whole = std::floor(t);
  seconds = static_cast<std::int64_t>(whole);
  frac = t - whole;
  return seconds > 0 || frac > 0;
}

}  // namespace

std::unique_ptr<LineReader> LineReader::open(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("cannot read input " + path.string());
  if (is_gzip(path)) return std::make_unique<GzipLineReader>(path);
  auto f = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*f) throw IoError("cannot open " + path.string());
  return std::make_unique<FileLineReader>(std::move(f));
}

std::unique_ptr<LineReader> LineReader::from_stream(std::istream& in) {
  if (!in) throw IoError("input stream is not readable");
  return std::make_unique<StreamLineReader>(in);
}

std::optional<CommentEvent> parse_record(std::string_view line, const FieldMapping& m, std::string& reason) {
  json obj = json::parse(line.begin(), line.end(), nullptr, false);
  if (obj.is_discarded()) {
    reason = "invalid JSON";
    return std::nullopt;
  }
  if (!obj.is_object()) {
    reason = "record is not an object";
    return std::nullopt;
  }
  CommentEvent e;
  const std::string* s;
  if (!(s = string_field(obj, m.id))) {
    reason = "missing " + m.id;
    return std::nullopt;
  }
  e.event_id = *s;
  if (!(s = string_field(obj, m.author))) {
    reason = "missing " + m.author;
    return std::nullopt;
  }
  e.user_id = *s;
  if (!(s = string_field(obj, m.community))) {
    reason = "missing " + m.community;
    return std::nullopt;
  }
  e.community_id = *s;
  auto tit = obj.find(m.created);
  if (tit == obj.end() || !parse_time(*tit, e.timestamp, e.subsecond)) {
    reason = "missing or invalid " + m.created;
    return std::nullopt;
  }
  auto bit = obj.find(m.body);
  if (bit == obj.end() || !bit->is_string()) {
    reason = "missing " + m.body;
    return std::nullopt;
  }
  e.body = bit->get<std::string>();

  auto sit = obj.find(m.score);
  if (sit != obj.end() && !sit->is_null()) {
    if (sit->is_number_integer()) {
      e.vote_score = sit->get<std::int64_t>();
    } else if (sit->is_number_float()) {
      e.vote_score = static_cast<std::int64_t>(std::llround(sit->get<double>()));
    } else {
      reason = "invalid " + m.score;
      return std::nullopt;
    }
  }
  auto pit = obj.find(m.parent_id);
  if (pit != obj.end() && pit->is_string() && !pit->get_ref<const std::string&>().empty()) {
    e.parent_id = pit->get<std::string>();
  }
  e.is_thread_root = !e.parent_id || !refers_to_comment(*e.parent_id);
  auto kit = obj.find(m.stickied);
  if (kit != obj.end()) {
    if (kit->is_boolean()) {
      e.is_stickied = kit->get<bool>();
    } else if (kit->is_number_integer()) {
      e.is_stickied = kit->get<std::int64_t>() != 0;
    }
  }
  return e;
}

DumpParser::DumpParser(FieldMapping mapping, int threads, std::size_t batch_lines)
    : mapping_(std::move(mapping)), threads_(threads), batch_lines_(batch_lines == 0 ? 1 : batch_lines) {}

ParseReport DumpParser::run(LineReader& reader, const std::function<void(CommentEvent&&)>& sink) {
  ParseReport report;
  std::unordered_set<std::uint64_t> seen_ids;
  std::vector<std::string> lines(batch_lines_);
  std::vector<std::size_t> line_numbers(batch_lines_);
  std::vector<std::optional<CommentEvent>> parsed(batch_lines_);
  std::vector<std::string> reasons(batch_lines_);
  std::size_t physical_line = 0;
  bool more = true;

  auto skip = [&](std::size_t line, std::string reason) {
    ++report.skipped;
    if (report.skip_samples.size() < ParseReport::kMaxSamples) report.skip_samples.push_back({line, std::move(reason)});
  };

  while (more) {
    std::size_t count = 0;
    while (count < batch_lines_) {
      if (!reader.next(lines[count])) {
        more = false;
        break;
      }
      ++physical_line;
      if (is_blank(lines[count])) continue;
      line_numbers[count] = physical_line;
      ++count;
    }
    parallel_for(count, threads_, [&](std::size_t i) {
      reasons[i].clear();
      parsed[i] = parse_record(lines[i], mapping_, reasons[i]);
    });
    for (std::size_t i = 0; i < count; ++i) {
      ++report.lines;
      if (!parsed[i]) {
        skip(line_numbers[i], reasons[i]);
        continue;
      }
      Fnv1a h;
      h.update(parsed[i]->event_id);
      if (!seen_ids.insert(h.value()).second) {
        ++report.duplicates;
        skip(line_numbers[i], "duplicate event id " + parsed[i]->event_id);
        continue;
      }
      ++report.parsed;
      sink(std::move(*parsed[i]));
      parsed[i].reset();
    }
  }
  if (report.lines > 0 && report.skipped * 2 > report.lines) {
    throw DataError("more than half of the input lines are malformed (" + std::to_string(report.skipped) + " of " +
                    std::to_string(report.lines) + "); check the field mapping");
  }
  return report;
}

ParsedDump parse_dump(std::istream& in, const FieldMapping& mapping, int threads) {
  auto reader = LineReader::from_stream(in);
  ParsedDump out;
  out.report = DumpParser(mapping, threads).run(*reader, [&](CommentEvent&& e) { out.events.push_back(std::move(e)); });
  return out;
}

ParsedDump parse_dump_file(const std::filesystem::path& path, const FieldMapping& mapping, int threads) {
  auto reader = LineReader::open(path);
  ParsedDump out;
  out.report = DumpParser(mapping, threads).run(*reader, [&](CommentEvent&& e) { out.events.push_back(std::move(e)); });
  return out;
}

std::string to_dump_line(const CommentEvent& e) {
  json j;
  j["id"] = e.event_id;
  j["author"] = e.user_id;
  j["subreddit"] = e.community_id;
  if (e.subsecond == 0.0) {
    j["created_utc"] = e.timestamp;
  } else {
    j["created_utc"] = e.time();
  }
  j["body"] = e.body;
  j["score"] = e.vote_score;
  if (e.parent_id) {
    j["parent_id"] = *e.parent_id;
  } else {
    j["parent_id"] = nullptr;
  }
  j["stickied"] = e.is_stickied;
  return j.dump();
}

}  // namespace abandon
