#include "mixintent/archive.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "mixintent/error.hpp"

namespace mixintent {
namespace {

void append_hex(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  out.append(buf);
}

}  // namespace

void ArchiveWriter::write(std::string_view key, std::uint64_t value) { out_ << key << ' ' << value << '\n'; }

void ArchiveWriter::write(std::string_view key, double value) {
  std::string line(key);
  line.push_back(' ');
  append_hex(line, value);
  out_ << line << '\n';
}

void ArchiveWriter::write(std::string_view key, std::string_view value) {
  if (value.find('\n') != std::string_view::npos) throw ArgumentError("archive strings cannot contain newlines");
  out_ << key << ' ' << value.size() << ' ' << value << '\n';
}

void ArchiveWriter::write(std::string_view key, std::span<const double> values) {
  std::string line(key);
  line.append(" ").append(std::to_string(values.size()));
  for (double v : values) {
    line.push_back(' ');
    append_hex(line, v);
  }
  out_ << line << '\n';
}

void ArchiveWriter::write(std::string_view key, const std::vector<std::string>& values) {
  write(key, static_cast<std::uint64_t>(values.size()));
  for (const std::string& v : values) write("-", v);
}

void ArchiveWriter::write(std::string_view key, std::span<const std::size_t> values) {
  out_ << key << ' ' << values.size();
  for (std::size_t v : values) out_ << ' ' << v;
  out_ << '\n';
}

void ArchiveWriter::write(std::string_view key, const Matrix& m) {
  out_ << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
  write("values", m.flat());
}

std::string ArchiveReader::peek_key() {
  if (!has_buffered_) {
    if (!std::getline(in_, buffered_)) return {};
    ++line_;
    has_buffered_ = true;
  }
  return buffered_.substr(0, buffered_.find(' '));
}

std::string ArchiveReader::next_payload(std::string_view key) {
  if (!has_buffered_) {
    if (!std::getline(in_, buffered_)) throw ParseError("unexpected end of archive, expected '" + std::string(key) + "'", line_ + 1);
    ++line_;
  }
  has_buffered_ = false;
  const auto space = buffered_.find(' ');
  const std::string found = buffered_.substr(0, space);
  if (found != key) throw ParseError("expected '" + std::string(key) + "', found '" + found + "'", line_);
  return space == std::string::npos ? std::string() : buffered_.substr(space + 1);
}

std::uint64_t ArchiveReader::read_u64(std::string_view key) {
  const std::string payload = next_payload(key);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(payload.c_str(), &end, 10);
  if (errno != 0 || end == payload.c_str() || *end != '\0') throw ParseError("bad integer for '" + std::string(key) + "'", line_);
  return v;
}

double ArchiveReader::read_double(std::string_view key) {
  const std::string payload = next_payload(key);
  char* end = nullptr;
  const double v = std::strtod(payload.c_str(), &end);
  if (end == payload.c_str() || *end != '\0') throw ParseError("bad real for '" + std::string(key) + "'", line_);
  return v;
}

std::string ArchiveReader::read_string(std::string_view key) {
  const std::string payload = next_payload(key);
  const auto space = payload.find(' ');
  if (space == std::string::npos) throw ParseError("bad string for '" + std::string(key) + "'", line_);
  const std::size_t len = std::strtoull(payload.substr(0, space).c_str(), nullptr, 10);
  std::string value = payload.substr(space + 1);
  if (value.size() != len) throw ParseError("string length mismatch for '" + std::string(key) + "'", line_);
  return value;
}

std::vector<double> ArchiveReader::read_doubles(std::string_view key) {
  const std::string payload = next_payload(key);
  const char* p = payload.c_str();
  char* end = nullptr;
  const std::size_t n = std::strtoull(p, &end, 10);
  if (end == p) throw ParseError("bad array length for '" + std::string(key) + "'", line_);
  std::vector<double> out;
  out.reserve(n);
  p = end;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::strtod(p, &end);
    if (end == p) throw ParseError("array '" + std::string(key) + "' holds fewer than " + std::to_string(n) + " values", line_);
    out.push_back(v);
    p = end;
  }
  return out;
}

std::vector<std::string> ArchiveReader::read_strings(std::string_view key) {
  const std::size_t n = read_size(key);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(read_string("-"));
  return out;
}

std::vector<std::size_t> ArchiveReader::read_sizes(std::string_view key) {
  const std::string payload = next_payload(key);
  const char* p = payload.c_str();
  char* end = nullptr;
  const std::size_t n = std::strtoull(p, &end, 10);
  std::vector<std::size_t> out;
  out.reserve(n);
  p = end;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = std::strtoull(p, &end, 10);
    if (end == p) throw ParseError("short integer array '" + std::string(key) + "'", line_);
    out.push_back(v);
    p = end;
  }
  return out;
}

Matrix ArchiveReader::read_matrix(std::string_view key) {
  const std::string payload = next_payload(key);
  std::size_t rows = 0, cols = 0;
  if (std::sscanf(payload.c_str(), "%zu %zu", &rows, &cols) != 2) throw ParseError("bad matrix header", line_);
  std::vector<double> values = read_doubles("values");
  if (values.size() != rows * cols) throw ParseError("matrix value count mismatch", line_);
  return Matrix(rows, cols, std::move(values));
}

}  // namespace mixintent
