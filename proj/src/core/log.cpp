#include "spdc/core/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace spdc::log {

namespace {
std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

void emit(const char* tag, std::string_view msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::clog << '[' << tag << "] " << msg << '\n';
}
}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void info(std::string_view msg) {
  if (g_level.load() <= Level::info) emit("info", msg);
}

void warn(std::string_view msg) {
  if (g_level.load() <= Level::warn) emit("warn", msg);
}

}  // namespace spdc::log
