#include "mixintent/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace mixintent {
namespace {
std::atomic<Verbosity> g_verbosity{Verbosity::Warn};
std::mutex g_mutex;
}  // namespace

void set_verbosity(Verbosity v) { g_verbosity.store(v); }
Verbosity verbosity() { return g_verbosity.load(); }

void log_warning(std::string_view message) {
  if (verbosity() < Verbosity::Warn) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

void log_info(std::string_view message) {
  if (verbosity() < Verbosity::Info) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "info: " << message << '\n';
}

}  // namespace mixintent
