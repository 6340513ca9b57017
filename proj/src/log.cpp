#include "pnp/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace pnp {

namespace {

LogLevel from_env() {
  const char* v = std::getenv("PNP_LOG");
  if (!v) return LogLevel::info;
  const std::string s(v);
  if (s == "error") return LogLevel::error;
  if (s == "debug") return LogLevel::debug;
  return LogLevel::info;
}

std::atomic<int>& level_store() {
  static std::atomic<int> lvl{static_cast<int>(from_env())};
  return lvl;
}

std::mutex& out_mutex() {
  static std::mutex m;
  return m;
}

void emit(LogLevel lvl, const char* tag, const std::string& msg) {
  if (static_cast<int>(lvl) > level_store().load()) return;
  std::lock_guard<std::mutex> lock(out_mutex());
  std::cerr << "[" << tag << "] " << msg << '\n';
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_store().load()); }
void set_log_level(LogLevel level) { level_store().store(static_cast<int>(level)); }

void log_error(const std::string& msg) { emit(LogLevel::error, "error", msg); }
void log_info(const std::string& msg) { emit(LogLevel::info, "info", msg); }
void log_debug(const std::string& msg) { emit(LogLevel::debug, "debug", msg); }

}  // namespace pnp
