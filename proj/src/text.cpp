#include "mixintent/text.hpp"

#include <cstdint>

namespace mixintent {
namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

struct CodePoint {
  char32_t value;
  std::size_t length;
};

// Lenient decoder: an invalid byte decodes as kInvalid with length 1 and is
// copied through verbatim.
CodePoint decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {kInvalid, 1};
  }
  if (pos + len > s.size()) return {kInvalid, 1};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {kInvalid, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x0964: case 0x0965:  // Devanagari danda, double danda
    case 0x3001: case 0x3002:
      return true;
    default:
      return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E);
  }
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  // Latin Extended-A: even code point upper, odd lower, except the 0x138-0x148 and 0x178-0x17E runs.
  if (c == 0x130) return 'i';
  if (c >= 0x100 && c <= 0x137) return c | 1;
  if (c >= 0x139 && c <= 0x148) return (c & 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c | 1;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c & 1) ? c + 1 : c;
  return c;
}

struct Decoded {
  char32_t cp;
  std::string_view raw;
};

std::vector<Decoded> decode_all(std::string_view text) {
  std::vector<Decoded> out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    const CodePoint cp = decode(text, pos);
    out.push_back({cp.value, text.substr(pos, cp.length)});
    pos += cp.length;
  }
  return out;
}

void append_lower(const Decoded& d, std::string& out) {
  if (d.cp == kInvalid) {
    out.append(d.raw);
  } else {
    encode(to_lower(d.cp), out);
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  const std::vector<Decoded> cps = decode_all(text);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_space(cps[i].cp)) ++i;
    std::size_t begin = i;
    while (i < cps.size() && !is_space(cps[i].cp)) ++i;
    std::size_t end = i;
    while (begin < end && is_punct(cps[begin].cp)) ++begin;
    while (end > begin && is_punct(cps[end - 1].cp)) --end;
    if (begin == end) continue;
    std::string token;
    for (std::size_t k = begin; k < end; ++k) append_lower(cps[k], token);
    tokens.push_back(std::move(token));
  }
  return tokens;
}

std::string normalize_text(std::string_view text) {
  const std::vector<Decoded> cps = decode_all(text);
  std::string out;
  bool pending_space = false;
  for (const Decoded& d : cps) {
    if (is_space(d.cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_lower(d, out);
  }
  return out;
}

std::string join(const std::vector<std::string>& pieces, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(pieces[i]);
  }
  return out;
}

}  // namespace mixintent
