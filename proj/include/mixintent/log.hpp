#pragma once

#include <string_view>

namespace mixintent {

enum class Verbosity { Quiet = 0, Warn = 1, Info = 2 };

void set_verbosity(Verbosity v);
Verbosity verbosity();

// One line to stderr, prefixed with the level; thread-safe.
void log_warning(std::string_view message);
void log_info(std::string_view message);

}  // namespace mixintent
