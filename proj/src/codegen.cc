// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/codegen.h"

#include <set>

#include "nvbm/errors.h"
#include "nvbm/rv32.h"
#include "nvbm/text.h"

namespace nvbm {

std::uint32_t register_byte_addr(std::uint32_t addr, const CodegenOptions &opts) {
  std::uint64_t scaled = std::uint64_t{addr} * opts.csb_addr_scale;
  if (scaled > 0xffffffffu)
    throw AddressOutOfWindow("register address " + hex32(addr) +
                             " overflows after scaling");
  return static_cast<std::uint32_t>(scaled);
}

namespace {

class AsmWriter {
 public:
  void label(const std::string &name) { out_ += name + ":\n"; }
  void comment(const std::string &text) { out_ += "    # " + text + "\n"; }
  void op(const std::string &text) { out_ += "    " + text + "\n"; }

  // lui + addi pair, emitted even when one half is zero so every
  // materialization has the same shape.
  void load_const(const std::string &reg, std::uint32_t value) {
    auto [hi, lo] = rv32::split_hi_lo(value);
    op("lui " + reg + ", " + rv32::format_imm(static_cast<std::int32_t>(hi)));
    op("addi " + reg + ", " + reg + ", " + rv32::format_imm(lo));
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

}  // namespace

std::string emit_asm(const std::vector<Command> &cmds, const MemoryMap &map,
                     const CodegenOptions &opts) {
  std::set<std::uint8_t> distinct(opts.scratch_regs.begin(), opts.scratch_regs.end());
  if (distinct.size() != 4 || distinct.count(0) || *distinct.rbegin() > 31)
    throw InvalidRegister("scratch registers must be four distinct registers x1..x31");
  if (opts.csb_addr_scale != 1 && opts.csb_addr_scale != 4)
    throw AddressOutOfWindow("csb_addr_scale must be 1 or 4");
  if (!map.dram_contains(opts.result_addr, 4) || opts.result_addr % 4)
    throw AddressOutOfWindow("result_addr " + hex32(opts.result_addr) +
                             " is not a word-aligned DRAM address");

  const std::string ra = "x" + std::to_string(opts.scratch_regs[0]);
  const std::string rd = "x" + std::to_string(opts.scratch_regs[1]);
  const std::string rm = "x" + std::to_string(opts.scratch_regs[2]);
  const std::string re = "x" + std::to_string(opts.scratch_regs[3]);

  AsmWriter w;
  w.comment("nvbm register replay: " + std::to_string(cmds.size()) + " commands");
  bool needs_fail = false;
  std::size_t poll_index = 0, check_index = 0;
  for (const auto &cmd : cmds) {
    const std::uint32_t addr = register_byte_addr(cmd.addr, opts);
    if (!map.in_nvdla(addr) || addr % 4)
      throw AddressOutOfWindow("register address " + hex32(addr) +
                               " is not a word-aligned NVDLA address");
    w.comment(format_command(cmd));
    w.load_const(ra, addr);
    if (cmd.is_write()) {
      w.load_const(rd, cmd.data);
      w.op("sw " + rd + ", 0(" + ra + ")");
      continue;
    }
    w.load_const(rm, cmd.mask);
    w.load_const(re, cmd.data);
    if (cmd.poll) {
      const std::string loop = "poll" + std::to_string(poll_index++);
      w.label(loop);
      w.op("lw " + rd + ", 0(" + ra + ")");
      w.op("and " + rd + ", " + rd + ", " + rm);
      w.op("bne " + rd + ", " + re + ", " + loop);
      continue;
    }
    // `fail` can lie beyond branch range in long programs, so hop over a jal.
    needs_fail = true;
    const std::string ok = "ok" + std::to_string(check_index++);
    w.op("lw " + rd + ", 0(" + ra + ")");
    w.op("and " + rd + ", " + rd + ", " + rm);
    w.op("beq " + rd + ", " + re + ", " + ok);
    w.op("jal x0, fail");
    w.label(ok);
  }

  w.comment("success epilogue");
  w.load_const(ra, opts.result_addr);
  w.load_const(rd, opts.success_code);
  w.op("sw " + rd + ", 0(" + ra + ")");
  w.label("done");
  w.op("jal x0, done");

  if (needs_fail) {
    w.label("fail");
    w.load_const(ra, opts.result_addr);
    w.load_const(rd, opts.failure_code);
    w.op("sw " + rd + ", 0(" + ra + ")");
    w.label("halt");
    w.op("jal x0, halt");
  }
  return w.take();
}

}  // namespace nvbm
