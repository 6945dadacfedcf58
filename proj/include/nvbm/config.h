// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Register command sequences and the configuration file format:
//
//   write_reg 0x<addr> 0x<data>
//   read_reg  0x<addr> 0x<expected> 0x<mask> (poll|once)
//
// Values are written as 8 lower-case hex digits. Lines starting with '#'
// and blank lines are ignored on input.

#ifndef NVBM_CONFIG_H_
#define NVBM_CONFIG_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nvbm/trace.h"

namespace nvbm {

struct Command {
  enum class Kind : std::uint8_t { kWriteReg, kReadReg };

  Kind kind = Kind::kWriteReg;
  std::uint32_t addr = 0;
  // Write data, or the expected (pre-masked) value of a read.
  std::uint32_t data = 0;
  std::uint32_t mask = 0xffffffffu;
  bool poll = false;

  static Command write_reg(std::uint32_t addr, std::uint32_t data) {
    return {Kind::kWriteReg, addr, data, 0xffffffffu, false};
  }
  static Command read_reg(std::uint32_t addr, std::uint32_t expected,
                          std::uint32_t mask, bool poll) {
    return {Kind::kReadReg, addr, expected & mask, mask, poll};
  }

  bool is_write() const { return kind == Kind::kWriteReg; }
  bool operator==(const Command &) const = default;
};

struct PollPolicy {
  enum class Mode : std::uint8_t { kPollAll, kPollListed, kStrictAll };

  Mode mode = Mode::kPollAll;
  std::set<std::uint32_t> listed;  // only meaningful for kPollListed
  std::uint32_t default_mask = 0xffffffffu;
  std::map<std::uint32_t, std::uint32_t> masks;  // per-address overrides

  std::uint32_t mask_for(std::uint32_t addr) const;
  bool polls(std::uint32_t addr) const;
};

std::vector<Command> to_commands(const std::vector<CsbTransaction> &csb,
                                 const PollPolicy &policy = {});

std::string format_command(const Command &cmd);
std::string emit_config(const std::vector<Command> &cmds);

// Throws ConfigSyntaxError with the offending line number. A read_reg whose
// expected value has bits outside its mask is rejected.
std::vector<Command> parse_config(std::string_view text);

}  // namespace nvbm

#endif  // NVBM_CONFIG_H_
