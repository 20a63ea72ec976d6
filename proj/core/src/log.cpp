#include "stylespace/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace stylespace::log {
namespace {

std::atomic<Level> g_level{Level::kWarn};
std::mutex g_mutex;

std::string_view name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "info";
}

}  // namespace

void set_level(Level level) { g_level.store(level); }

void emit(Level level, std::string_view event, const Json& fields) {
  if (level < g_level.load()) return;
  Json line = Json::object();
  line["level"] = name(level);
  line["event"] = event;
  if (fields.is_object()) {
    for (auto it = fields.begin(); it != fields.end(); ++it) line[it.key()] = it.value();
  }
  const std::string text = line.dump();
  std::lock_guard lock(g_mutex);
  std::cerr << text << '\n';
}

}  // namespace stylespace::log
