#pragma once

#include <string_view>

#include "stylespace/io.hpp"

namespace stylespace::log {

enum class Level { kDebug, kInfo, kWarn, kError };

void set_level(Level level);

/// Emits one JSON object per line on stderr: {"level", "event", ...fields}.
void emit(Level level, std::string_view event, const Json& fields = Json::object());

inline void info(std::string_view event, const Json& fields = Json::object()) {
  emit(Level::kInfo, event, fields);
}
inline void warn(std::string_view event, const Json& fields = Json::object()) {
  emit(Level::kWarn, event, fields);
}

}  // namespace stylespace::log
