#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "abandon/common/error.hpp"

namespace abandon {

// Little-endian binary serialization used by model, feature and cache files.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <class T>
    requires std::is_arithmetic_v<T>
  void write(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_.write(buf, sizeof(T));
  }

  void write_string(const std::string& s);
  void write_doubles(const std::vector<double>& v);
  void write_sizes(const std::vector<std::size_t>& v);
  void write_bytes(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  template <class T>
    requires std::is_arithmetic_v<T>
  T read() {
    char buf[sizeof(T)];
    in_.read(buf, sizeof(T));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) throw DataError("unexpected end of binary stream");
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  std::string read_string();
  std::vector<double> read_doubles();
  std::vector<std::size_t> read_sizes();
  // Reads a 4-byte magic tag and throws if it differs.
  void expect_magic(const char (&magic)[5], const std::string& what);

 private:
  std::istream& in_;
};

}  // namespace abandon
