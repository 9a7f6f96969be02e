#include "abandon/common/hash.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <vector>

#include "abandon/common/error.hpp"

namespace abandon {

void Fnv1a::update(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
}

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string hash_hex(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.hex();
}

namespace {
void hash_file_into(Fnv1a& h, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
}
}  // namespace

std::string hash_path(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  Fnv1a h;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      h.update(fs::relative(f, path).generic_string());
      hash_file_into(h, f);
    }
  } else {
    hash_file_into(h, path);
  }
  return h.hex();
}

}  // namespace abandon
