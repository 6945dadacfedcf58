// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Diagnostics go to stderr only. Verbosity comes from NVBM_LOG
// (off|info|debug, default info); warnings and errors are always printed
// unless NVBM_LOG=off.

#ifndef NVBM_LOG_H_
#define NVBM_LOG_H_

#include <string_view>

namespace nvbm::log {

enum class Level { kOff = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

Level level();
void set_level(Level level);
Level parse_level(std::string_view text);

void write(Level level, std::string_view message);
inline void warn(std::string_view m) { write(Level::kWarn, m); }
inline void info(std::string_view m) { write(Level::kInfo, m); }
inline void debug(std::string_view m) { write(Level::kDebug, m); }

}  // namespace nvbm::log

#endif  // NVBM_LOG_H_
