// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/config.h"

#include "nvbm/errors.h"
#include "nvbm/text.h"

namespace nvbm {

std::uint32_t PollPolicy::mask_for(std::uint32_t addr) const {
  auto it = masks.find(addr);
  return it == masks.end() ? default_mask : it->second;
}

bool PollPolicy::polls(std::uint32_t addr) const {
  switch (mode) {
    case Mode::kPollAll:
      return true;
    case Mode::kPollListed:
      return listed.count(addr) != 0;
    case Mode::kStrictAll:
      return false;
  }
  return true;
}

std::vector<Command> to_commands(const std::vector<CsbTransaction> &csb,
                                 const PollPolicy &policy) {
  std::vector<Command> cmds;
  cmds.reserve(csb.size());
  for (const auto &t : csb) {
    if (t.is_write)
      cmds.push_back(Command::write_reg(t.addr, t.data));
    else
      cmds.push_back(Command::read_reg(t.addr, t.data, policy.mask_for(t.addr),
                                       policy.polls(t.addr)));
  }
  return cmds;
}

std::string format_command(const Command &cmd) {
  if (cmd.is_write())
    return "write_reg " + hex32(cmd.addr) + " " + hex32(cmd.data);
  return "read_reg " + hex32(cmd.addr) + " " + hex32(cmd.data) + " " +
         hex32(cmd.mask) + (cmd.poll ? " poll" : " once");
}

std::string emit_config(const std::vector<Command> &cmds) {
  std::string out;
  for (const auto &cmd : cmds) {
    out += format_command(cmd);
    out += '\n';
  }
  return out;
}

namespace {

std::uint32_t field32(std::string_view tok, std::size_t line) {
  auto v = parse_hex(tok);
  if (!v || *v > 0xffffffffu)
    throw ConfigSyntaxError("expected 32-bit hex value, got `" +
                                std::string(tok) + "'",
                            line);
  return static_cast<std::uint32_t>(*v);
}

}  // namespace

std::vector<Command> parse_config(std::string_view text) {
  std::vector<Command> cmds;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto toks = split_ws(line);
    if (toks[0] == "write_reg") {
      if (toks.size() != 3)
        throw ConfigSyntaxError("write_reg takes 2 operands", lineno);
      cmds.push_back(Command::write_reg(field32(toks[1], lineno),
                                        field32(toks[2], lineno)));
    } else if (toks[0] == "read_reg") {
      if (toks.size() != 5)
        throw ConfigSyntaxError("read_reg takes 4 operands", lineno);
      auto addr = field32(toks[1], lineno);
      auto expected = field32(toks[2], lineno);
      auto mask = field32(toks[3], lineno);
      if (toks[4] != "poll" && toks[4] != "once")
        throw ConfigSyntaxError("read_reg mode must be poll or once", lineno);
      if (expected & ~mask)
        throw ConfigSyntaxError("expected value has bits outside mask", lineno);
      cmds.push_back(Command::read_reg(addr, expected, mask, toks[4] == "poll"));
    } else {
      throw ConfigSyntaxError("unknown command `" + std::string(toks[0]) + "'",
                              lineno);
    }
  }
  return cmds;
}

}  // namespace nvbm
