#pragma once

#include <string_view>

namespace spdc::log {

enum class Level { debug, info, warn, error, off };

void set_level(Level level);
Level level();

void info(std::string_view msg);
void warn(std::string_view msg);

}  // namespace spdc::log
