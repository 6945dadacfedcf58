// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Miniature RV32I toolchain: encoder, decoder, two-pass assembler and
// disassembler for the subset the code generator emits.
//
// Assembly grammar: one instruction per line, optional `label:` prefix (or
// a label on its own line), `#` comments, registers x0..x31, immediates in
// decimal or 0x-hex with optional sign. Branch and jump targets are a
// label, `.` (the instruction's own address) or a signed byte offset.

#ifndef NVBM_RV32_H_
#define NVBM_RV32_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvbm::rv32 {

enum class Op : std::uint8_t {
  kLui, kAuipc, kAddi, kAndi, kAnd, kLw, kSw, kBeq, kBne, kJal, kJalr, kEbreak,
};

enum class Format : std::uint8_t { kR, kI, kS, kB, kU, kJ, kSystem };

const char *mnemonic(Op op);
std::optional<Op> op_from_mnemonic(std::string_view name);
Format format_of(Op op);

// Operand fields the format does not use are zero. `imm` holds the raw
// 20-bit field for U-type, and the sign-extended byte offset or immediate
// for the others.
struct Instruction {
  Op op = Op::kAddi;
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  std::int32_t imm = 0;

  bool operator==(const Instruction &) const = default;
};

// Throws InvalidRegister or ImmediateOutOfRange.
std::uint32_t encode_instr(const Instruction &inst);
std::optional<Instruction> decode_instr(std::uint32_t word);
// Throws UndecodableWord.
Instruction decode_or_throw(std::uint32_t word);

// ALU/U-type immediate as written in canonical text: 0x-hex with a
// leading '-' for negative values.
std::string format_imm(std::int32_t value);

// Canonical text, with targets as numeric offsets.
std::string format_instr(const Instruction &inst);

// Upper/lower split for `lui` + `addi`: (hi << 12) + sext(lo) == value.
struct HiLo {
  std::uint32_t hi;  // 20-bit lui field
  std::int32_t lo;   // signed 12-bit addi immediate
};
HiLo split_hi_lo(std::uint32_t value);

struct Program {
  std::uint32_t origin = 0;
  std::vector<std::uint32_t> words;
  std::map<std::string, std::uint32_t> symbols;

  bool operator==(const Program &) const = default;
};

// Two passes: labels, then encoding. Errors carry the source line.
Program assemble(std::string_view source, std::uint32_t origin = 0);
std::string disassemble(const Program &program);

}  // namespace nvbm::rv32

#endif  // NVBM_RV32_H_
