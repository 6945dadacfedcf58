// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <set>

#include "../support/oracles.h"
#include "nvbm/codegen.h"
#include "nvbm/config.h"
#include "nvbm/errors.h"
#include "nvbm/rv32.h"

using namespace nvbm;

namespace {

bool contains_in_order(const std::string &text, std::initializer_list<std::string> lines) {
  std::size_t pos = 0;
  for (const auto &l : lines) {
    pos = text.find("    " + l + "\n", pos);
    if (pos == std::string::npos) return false;
    pos += l.size();
  }
  return true;
}

const char *kEpilogue =
    "    # success epilogue\n"
    "    lui x5, 0x20100\n"
    "    addi x5, x5, -0x10\n"
    "    lui x6, 0x600d6\n"
    "    addi x6, x6, 0xd\n"
    "    sw x6, 0(x5)\n"
    "done:\n"
    "    jal x0, done\n";

}  // namespace

TEST_CASE("single write") {
  auto s = emit_asm({Command::write_reg(0x3004, 0x1)});
  CHECK(contains_in_order(s, {"lui x5, 0x3", "addi x5, x5, 0x4", "lui x6, 0x0",
                              "addi x6, x6, 0x1", "sw x6, 0(x5)"}));
  CHECK(s.find(kEpilogue) != std::string::npos);
  CHECK(s.find("fail:") == std::string::npos);
}

TEST_CASE("empty command list is epilogue only") {
  CHECK(emit_asm({}) == std::string("    # nvbm register replay: 0 commands\n") + kEpilogue);
  auto p = rv32::assemble(emit_asm({}));
  CHECK(p.words.size() == 6);
}

TEST_CASE("poll read loop") {
  auto s = emit_asm({Command::read_reg(0xc, 0x1, 0xffffffff, true)});
  CHECK(s.find("poll0:\n    lw x6, 0(x5)\n    and x6, x6, x7\n    bne x6, x28, poll0\n") !=
        std::string::npos);
  CHECK(contains_in_order(s, {"addi x5, x5, 0xc", "addi x7, x7, -0x1", "addi x28, x28, 0x1"}));
}

TEST_CASE("once read branches to the failure handler") {
  auto s = emit_asm({Command::read_reg(0x10, 0x0, 0xff, false)});
  CHECK(s.find("    lw x6, 0(x5)\n    and x6, x6, x7\n    beq x6, x28, ok0\n"
               "    jal x0, fail\nok0:\n") != std::string::npos);
  CHECK(contains_in_order(s, {"lui x6, 0xbaadc", "addi x6, x6, -0x553"}));
  CHECK(s.find("halt:\n    jal x0, halt\n") != std::string::npos);
}

TEST_CASE("far failure handler stays reachable") {
  std::vector<Command> cmds = {Command::read_reg(0x10, 0x0, 0xff, false)};
  for (int i = 0; i < 2000; ++i) cmds.push_back(Command::write_reg(0x3004, i));
  auto prog = rv32::assemble(emit_asm(cmds));
  CHECK(prog.symbols.at("fail") - prog.symbols.at("ok0") > 4096);
}

TEST_CASE("address validation") {
  CHECK_THROWS_AS(emit_asm({Command::write_reg(0x100000, 0)}), AddressOutOfWindow);
  CHECK_THROWS_AS(emit_asm({Command::write_reg(0x3006, 0)}), AddressOutOfWindow);
  CHECK_THROWS_AS(emit_asm({Command::read_reg(0x200000, 0, 1, true)}), AddressOutOfWindow);
  CodegenOptions bad_mailbox;
  bad_mailbox.result_addr = 0x1000;
  CHECK_THROWS_AS(emit_asm({}, MemoryMap{}, bad_mailbox), AddressOutOfWindow);

  CodegenOptions scaled;
  scaled.csb_addr_scale = 4;
  CHECK(register_byte_addr(0x3fffc, scaled) == 0xffff0);
  CHECK_NOTHROW(emit_asm({Command::write_reg(0x3ffff, 0)}, MemoryMap{}, scaled));
  CHECK_THROWS_AS(emit_asm({Command::write_reg(0x40000, 0)}, MemoryMap{}, scaled),
                  AddressOutOfWindow);
}

TEST_CASE("property: generated code uses only scratch registers") {
  std::mt19937_64 rng(31);
  const std::set<unsigned> allowed = {0, 5, 6, 7, 28};
  const PollPolicy::Mode modes[] = {PollPolicy::Mode::kPollAll, PollPolicy::Mode::kStrictAll};
  for (int round = 0; round < 100; ++round) {
    PollPolicy pol;
    pol.mode = modes[round % 2];
    auto cmds = to_commands(testing::random_csb_trace(rng, rng() % 100), pol);
    auto prog = rv32::assemble(emit_asm(cmds));
    REQUIRE_FALSE(prog.words.empty());
    for (auto w : prog.words) {
      auto i = rv32::decode_or_throw(w);
      CHECK(allowed.count(i.rd));
      CHECK(allowed.count(i.rs1));
      CHECK(allowed.count(i.rs2));
    }
  }
}

TEST_CASE("property: every program is assemblable and in range") {
  std::mt19937_64 rng(32);
  for (int round = 0; round < 50; ++round) {
    auto cmds = to_commands(testing::random_csb_trace(rng, rng() % 300));
    auto prog = rv32::assemble(emit_asm(cmds), 0x1000);
    for (const auto &[name, addr] : prog.symbols) {
      CHECK(addr >= prog.origin);
      CHECK(addr < prog.origin + 4 * prog.words.size());
    }
  }
}
