#pragma once

// Line-oriented, self-describing text archive for trained artifacts. One field
// per line: `key payload`. Reals are written as hexadecimal floating point so
// a save/load round trip is bit-exact.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixintent/numerics.hpp"

namespace mixintent {

class ArchiveWriter {
 public:
  explicit ArchiveWriter(std::ostream& out) : out_(out) {}

  void write(std::string_view key, std::uint64_t value);
  void write(std::string_view key, double value);
  void write(std::string_view key, std::string_view value);
  void write(std::string_view key, std::span<const double> values);
  void write(std::string_view key, const std::vector<std::string>& values);
  void write(std::string_view key, std::span<const std::size_t> values);
  void write(std::string_view key, const Matrix& m);

 private:
  std::ostream& out_;
};

class ArchiveReader {
 public:
  explicit ArchiveReader(std::istream& in) : in_(in) {}

  std::uint64_t read_u64(std::string_view key);
  std::size_t read_size(std::string_view key) { return static_cast<std::size_t>(read_u64(key)); }
  double read_double(std::string_view key);
  std::string read_string(std::string_view key);
  std::vector<double> read_doubles(std::string_view key);
  std::vector<std::string> read_strings(std::string_view key);
  std::vector<std::size_t> read_sizes(std::string_view key);
  Matrix read_matrix(std::string_view key);

  // Key of the next field without consuming it.
  std::string peek_key();

 private:
  std::string next_payload(std::string_view key);

  std::istream& in_;
  std::size_t line_ = 0;
  std::string buffered_;
  bool has_buffered_ = false;
};

}  // namespace mixintent
