#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace abandon {

// 64-bit FNV-1a, used for artifact fingerprints (not for security).
class Fnv1a {
 public:
  void update(std::string_view bytes);
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hash_hex(std::string_view bytes);
// Hash of a file's bytes; for a directory, of every regular file in
// lexicographic path order (relative names included).
std::string hash_path(const std::filesystem::path& path);

}  // namespace abandon
