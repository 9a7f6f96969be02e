#include "abandon/common/binary_io.hpp"

namespace abandon {

namespace {
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 34;
}

void BinaryWriter::write_string(const std::string& s) {
  write<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::write_doubles(const std::vector<double>& v) {
  write<std::uint64_t>(v.size());
  for (double d : v) write(d);
}

void BinaryWriter::write_sizes(const std::vector<std::size_t>& v) {
  write<std::uint64_t>(v.size());
  for (auto s : v) write<std::uint64_t>(s);
}

std::string BinaryReader::read_string() {
  auto n = read<std::uint32_t>();
  std::string s(n, '\0');
  in_.read(s.data(), n);
  if (in_.gcount() != static_cast<std::streamsize>(n)) throw DataError("unexpected end of binary stream");
  return s;
}

std::vector<double> BinaryReader::read_doubles() {
  auto n = read<std::uint64_t>();
  if (n > kMaxLength) throw DataError("corrupt binary stream: vector too long");
  std::vector<double> v(n);
  for (auto& d : v) d = read<double>();
  return v;
}

std::vector<std::size_t> BinaryReader::read_sizes() {
  auto n = read<std::uint64_t>();
  if (n > kMaxLength) throw DataError("corrupt binary stream: vector too long");
  std::vector<std::size_t> v(n);
  for (auto& s : v) s = static_cast<std::size_t>(read<std::uint64_t>());
  return v;
}

void BinaryReader::expect_magic(const char (&magic)[5], const std::string& what) {
  char buf[4];
  in_.read(buf, 4);
  if (in_.gcount() != 4 || std::memcmp(buf, magic, 4) != 0) throw DataError("not a " + what + " file (bad magic)");
}

}  // namespace abandon
