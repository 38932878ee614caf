#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mixintent {

// Lowercases Latin letters, splits on Unicode whitespace and strips leading and
// trailing punctuation from each piece. Pieces that become empty are dropped.
// Devanagari (and any other script) passes through untouched.
std::vector<std::string> tokenize(std::string_view text);

// Lowercased, whitespace-collapsed, trimmed form used as a sentence key.
std::string normalize_text(std::string_view text);

std::string join(const std::vector<std::string>& pieces, std::string_view sep);

}  // namespace mixintent
