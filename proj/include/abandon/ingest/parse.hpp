#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "abandon/ingest/event.hpp"

namespace abandon {

// Names of the record fields in the input dump. The defaults follow the
// common public comment-dump layout.
struct FieldMapping {
  std::string id = "id";
  std::string author = "author";
  std::string community = "subreddit";
  std::string created = "created_utc";
  std::string body = "body";
  std::string score = "score";
  std::string parent_id = "parent_id";
  std::string stickied = "stickied";

  static FieldMapping from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SkippedLine {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct ParseReport {
  std::size_t lines = 0;  // non-blank lines seen
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  std::size_t duplicates = 0;  // included in `skipped`
  // The first few skips, for diagnostics.
  std::vector<SkippedLine> skip_samples;
  static constexpr std::size_t kMaxSamples = 100;

  nlohmann::json to_json() const;
};

// Reads newline-terminated lines from a plain or gzip-compressed source.
class LineReader {
 public:
  virtual ~LineReader() = default;
  // Returns false at end of input. The trailing '\n' (and '\r') is removed.
  virtual bool next(std::string& line) = 0;

  static std::unique_ptr<LineReader> open(const std::filesystem::path& path);
  static std::unique_ptr<LineReader> from_stream(std::istream& in);
};

// Parses one record. Returns the event, or an empty optional with `reason`
// filled in.
std::optional<CommentEvent> parse_record(std::string_view line, const FieldMapping& mapping, std::string& reason);

// Streaming parse: lines are read in batches, parsed (concurrently when
// threads > 1) and handed to `sink` in input order, so output never depends
// on the thread count. Memory is bounded by the batch size. Throws
// DataError when more than half of the lines are malformed.
class DumpParser {
 public:
  DumpParser(FieldMapping mapping, int threads = 1, std::size_t batch_lines = 16384);

  ParseReport run(LineReader& reader, const std::function<void(CommentEvent&&)>& sink);

 private:
  FieldMapping mapping_;
  int threads_;
  std::size_t batch_lines_;
};

struct ParsedDump {
  std::vector<CommentEvent> events;
  ParseReport report;
};

ParsedDump parse_dump(std::istream& in, const FieldMapping& mapping = {}, int threads = 1);
ParsedDump parse_dump_file(const std::filesystem::path& path, const FieldMapping& mapping = {}, int threads = 1);

// Serializes an event in the default dump layout (one JSON object, no newline).
std::string to_dump_line(const CommentEvent& e);

}  // namespace abandon
