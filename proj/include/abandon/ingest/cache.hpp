#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include <json.hpp>

#include "abandon/ingest/event.hpp"

namespace abandon {

inline constexpr std::uint32_t kCacheFormatVersion = 1;

// Writes the three splits as columnar files plus manifest.json. Rows are
// buffered in fixed-size blocks and each block is stored column by column,
// so memory stays bounded however many events are added. Output bytes
// depend only on the events added and their order.
class CacheWriter {
 public:
  explicit CacheWriter(std::filesystem::path dir, std::size_t block_rows = 65536);
  ~CacheWriter();
  CacheWriter(const CacheWriter&) = delete;
  CacheWriter& operator=(const CacheWriter&) = delete;

  void add(SplitTag tag, const CommentEvent& e);
  // Flushes all blocks and writes the manifest; `extra` is stored under
  // the manifest's "info" key.
  void finish(const nlohmann::json& extra = nlohmann::json::object());

 private:
  struct SplitFile;
  std::filesystem::path dir_;
  std::size_t block_rows_;
  std::vector<std::unique_ptr<SplitFile>> files_;
  bool finished_ = false;
};

void write_cache(const SplitSet& splits, const std::filesystem::path& dir,
                 const nlohmann::json& extra = nlohmann::json::object());
SplitSet read_cache(const std::filesystem::path& dir);
nlohmann::json read_cache_manifest(const std::filesystem::path& dir);

}  // namespace abandon
