// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/log.h"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace nvbm::log {

namespace {

Level from_env() {
  const char *env = std::getenv("NVBM_LOG");
  return env ? parse_level(env) : Level::kInfo;
}

std::atomic<int> &current() {
  static std::atomic<int> lvl{static_cast<int>(from_env())};
  return lvl;
}

}  // namespace

Level parse_level(std::string_view text) {
  if (text == "off") return Level::kOff;
  if (text == "debug") return Level::kDebug;
  if (text == "warn") return Level::kWarn;
  return Level::kInfo;
}

Level level() { return static_cast<Level>(current().load()); }

void set_level(Level lvl) { current().store(static_cast<int>(lvl)); }

void write(Level lvl, std::string_view message) {
  if (lvl == Level::kOff || static_cast<int>(lvl) > current().load()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  const char *tag = lvl == Level::kWarn   ? "warning"
                    : lvl == Level::kInfo ? "info"
                                          : "debug";
  std::cerr << "nvbm: " << tag << ": " << message << '\n';
}

}  // namespace nvbm::log
