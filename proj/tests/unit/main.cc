// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>

#include "nvbm/log.h"

int main(int argc, char **argv) {
  // Keep info chatter out of test output unless asked for.
  if (!std::getenv("NVBM_LOG")) nvbm::log::set_level(nvbm::log::Level::kWarn);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
