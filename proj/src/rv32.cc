// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/rv32.h"

#include <cctype>

#include "nvbm/errors.h"
#include "nvbm/text.h"

namespace nvbm::rv32 {

namespace {

struct OpInfo {
  Op op;
  const char *name;
  Format format;
  std::uint32_t opcode;
  std::uint32_t funct3;
};

constexpr OpInfo kOps[] = {
    {Op::kLui, "lui", Format::kU, 0x37, 0},
    {Op::kAuipc, "auipc", Format::kU, 0x17, 0},
    {Op::kAddi, "addi", Format::kI, 0x13, 0},
    {Op::kAndi, "andi", Format::kI, 0x13, 7},
    {Op::kAnd, "and", Format::kR, 0x33, 7},
    {Op::kLw, "lw", Format::kI, 0x03, 2},
    {Op::kSw, "sw", Format::kS, 0x23, 2},
    {Op::kBeq, "beq", Format::kB, 0x63, 0},
    {Op::kBne, "bne", Format::kB, 0x63, 1},
    {Op::kJal, "jal", Format::kJ, 0x6f, 0},
    {Op::kJalr, "jalr", Format::kI, 0x67, 0},
    {Op::kEbreak, "ebreak", Format::kSystem, 0x73, 0},
};

constexpr std::uint32_t kEbreakWord = 0x00100073;

const OpInfo &info(Op op) { return kOps[static_cast<std::size_t>(op)]; }

std::uint32_t bits(std::uint32_t value, int hi, int lo) {
  return (value >> lo) & ((1u << (hi - lo + 1)) - 1);
}

std::int32_t sext(std::uint32_t value, int width) {
  const std::uint32_t sign = 1u << (width - 1);
  return static_cast<std::int32_t>((value ^ sign) - sign);
}

void check_reg(std::uint8_t r) {
  if (r > 31) throw InvalidRegister("register x" + std::to_string(r) + " does not exist");
}

void check_imm(const Instruction &inst, std::int64_t lo, std::int64_t hi,
               bool even) {
  if (inst.imm < lo || inst.imm > hi || (even && (inst.imm & 1)))
    throw ImmediateOutOfRange(std::string(mnemonic(inst.op)) + " immediate " +
                              std::to_string(inst.imm) + " out of range [" +
                              std::to_string(lo) + ", " + std::to_string(hi) +
                              "]" + (even ? " or odd" : ""));
}

}  // namespace

const char *mnemonic(Op op) { return info(op).name; }

std::optional<Op> op_from_mnemonic(std::string_view name) {
  for (const auto &i : kOps)
    if (name == i.name) return i.op;
  return std::nullopt;
}

Format format_of(Op op) { return info(op).format; }

std::uint32_t encode_instr(const Instruction &inst) {
  const OpInfo &oi = info(inst.op);
  check_reg(inst.rd);
  check_reg(inst.rs1);
  check_reg(inst.rs2);
  const std::uint32_t rd = inst.rd, rs1 = inst.rs1, rs2 = inst.rs2;
  const auto imm = static_cast<std::uint32_t>(inst.imm);
  switch (oi.format) {
    case Format::kR:
      return rs2 << 20 | rs1 << 15 | oi.funct3 << 12 | rd << 7 | oi.opcode;
    case Format::kI:
      check_imm(inst, -2048, 2047, false);
      return bits(imm, 11, 0) << 20 | rs1 << 15 | oi.funct3 << 12 | rd << 7 |
             oi.opcode;
    case Format::kS:
      check_imm(inst, -2048, 2047, false);
      return bits(imm, 11, 5) << 25 | rs2 << 20 | rs1 << 15 |
             oi.funct3 << 12 | bits(imm, 4, 0) << 7 | oi.opcode;
    case Format::kB:
      check_imm(inst, -4096, 4094, true);
      return bits(imm, 12, 12) << 31 | bits(imm, 10, 5) << 25 | rs2 << 20 |
             rs1 << 15 | oi.funct3 << 12 | bits(imm, 4, 1) << 8 |
             bits(imm, 11, 11) << 7 | oi.opcode;
    case Format::kU:
      check_imm(inst, 0, 0xfffff, false);
      return imm << 12 | rd << 7 | oi.opcode;
    case Format::kJ:
      check_imm(inst, -(1 << 20), (1 << 20) - 2, true);
      return bits(imm, 20, 20) << 31 | bits(imm, 10, 1) << 21 |
             bits(imm, 11, 11) << 20 | bits(imm, 19, 12) << 12 | rd << 7 |
             oi.opcode;
    case Format::kSystem:
      return kEbreakWord;
  }
  return kEbreakWord;
}

std::optional<Instruction> decode_instr(std::uint32_t w) {
  const std::uint32_t opcode = bits(w, 6, 0);
  const auto rd = static_cast<std::uint8_t>(bits(w, 11, 7));
  const std::uint32_t funct3 = bits(w, 14, 12);
  const auto rs1 = static_cast<std::uint8_t>(bits(w, 19, 15));
  const auto rs2 = static_cast<std::uint8_t>(bits(w, 24, 20));
  const std::uint32_t funct7 = bits(w, 31, 25);
  const std::int32_t i_imm = sext(bits(w, 31, 20), 12);

  switch (opcode) {
    case 0x37:
      return Instruction{Op::kLui, rd, 0, 0, static_cast<std::int32_t>(bits(w, 31, 12))};
    case 0x17:
      return Instruction{Op::kAuipc, rd, 0, 0, static_cast<std::int32_t>(bits(w, 31, 12))};
    case 0x13:
      if (funct3 == 0) return Instruction{Op::kAddi, rd, rs1, 0, i_imm};
      if (funct3 == 7) return Instruction{Op::kAndi, rd, rs1, 0, i_imm};
      return std::nullopt;
    case 0x33:
      if (funct3 == 7 && funct7 == 0) return Instruction{Op::kAnd, rd, rs1, rs2, 0};
      return std::nullopt;
    case 0x03:
      if (funct3 == 2) return Instruction{Op::kLw, rd, rs1, 0, i_imm};
      return std::nullopt;
    case 0x23:
      if (funct3 == 2)
        return Instruction{Op::kSw, 0, rs1, rs2,
                           sext(bits(w, 31, 25) << 5 | bits(w, 11, 7), 12)};
      return std::nullopt;
    case 0x63: {
      if (funct3 > 1) return std::nullopt;
      std::int32_t off = sext(bits(w, 31, 31) << 12 | bits(w, 7, 7) << 11 |
                                  bits(w, 30, 25) << 5 | bits(w, 11, 8) << 1,
                              13);
      return Instruction{funct3 == 0 ? Op::kBeq : Op::kBne, 0, rs1, rs2, off};
    }
    case 0x6f: {
      std::int32_t off = sext(bits(w, 31, 31) << 20 | bits(w, 19, 12) << 12 |
                                  bits(w, 20, 20) << 11 | bits(w, 30, 21) << 1,
                              21);
      return Instruction{Op::kJal, rd, 0, 0, off};
    }
    case 0x67:
      if (funct3 == 0) return Instruction{Op::kJalr, rd, rs1, 0, i_imm};
      return std::nullopt;
    case 0x73:
      if (w == kEbreakWord) return Instruction{Op::kEbreak, 0, 0, 0, 0};
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

Instruction decode_or_throw(std::uint32_t word) {
  auto inst = decode_instr(word);
  if (!inst) throw UndecodableWord("word " + hex32(word) + " is not in the supported RV32I subset");
  return *inst;
}

namespace {

std::string reg(std::uint8_t r) { return "x" + std::to_string(r); }

}  // namespace

std::string format_imm(std::int32_t v) {
  std::int64_t wide = v;
  std::string out = wide < 0 ? "-0x" : "0x";
  std::uint64_t mag = static_cast<std::uint64_t>(wide < 0 ? -wide : wide);
  std::string digits = hex_digits(mag, 8);
  auto nz = digits.find_first_not_of('0');
  out += nz == std::string::npos ? "0" : digits.substr(nz);
  return out;
}

std::string format_instr(const Instruction &i) {
  const std::string m = mnemonic(i.op);
  switch (i.op) {
    case Op::kLui:
    case Op::kAuipc:
      return m + " " + reg(i.rd) + ", " + format_imm(i.imm);
    case Op::kAddi:
    case Op::kAndi:
      return m + " " + reg(i.rd) + ", " + reg(i.rs1) + ", " + format_imm(i.imm);
    case Op::kAnd:
      return m + " " + reg(i.rd) + ", " + reg(i.rs1) + ", " + reg(i.rs2);
    case Op::kLw:
    case Op::kJalr:
      return m + " " + reg(i.rd) + ", " + std::to_string(i.imm) + "(" + reg(i.rs1) + ")";
    case Op::kSw:
      return m + " " + reg(i.rs2) + ", " + std::to_string(i.imm) + "(" + reg(i.rs1) + ")";
    case Op::kBeq:
    case Op::kBne:
      return m + " " + reg(i.rs1) + ", " + reg(i.rs2) + ", " + std::to_string(i.imm);
    case Op::kJal:
      return m + " " + reg(i.rd) + ", " + std::to_string(i.imm);
    case Op::kEbreak:
      return m;
  }
  return m;
}

HiLo split_hi_lo(std::uint32_t value) {
  return {((value + 0x800u) >> 12) & 0xfffffu, sext(value & 0xfffu, 12)};
}

namespace {

struct SourceLine {
  std::size_t lineno;
  std::uint32_t addr;
  std::string_view mnemonic;
  std::vector<std::string_view> operands;
};

bool is_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '.'))
    return false;
  if (s == ".") return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$'))
      return false;
  return true;
}

std::uint8_t parse_reg(std::string_view tok, std::size_t lineno) {
  if (tok.size() >= 2 && tok[0] == 'x') {
    auto n = parse_dec(tok.substr(1));
    if (n && *n <= 31 && (tok.size() == 2 || tok[1] != '0'))
      return static_cast<std::uint8_t>(*n);
  }
  throw InvalidRegister("invalid register `" + std::string(tok) + "'", lineno);
}

std::int32_t parse_imm(std::string_view tok, std::size_t lineno) {
  auto v = parse_int(tok);
  if (!v) throw AsmSyntaxError("invalid immediate `" + std::string(tok) + "'", lineno);
  if (*v < INT32_MIN || *v > INT32_MAX)
    throw ImmediateOutOfRange("immediate `" + std::string(tok) + "' exceeds 32 bits", lineno);
  return static_cast<std::int32_t>(*v);
}

// `imm(xN)`
void parse_mem_operand(std::string_view tok, std::size_t lineno,
                       std::int32_t &imm, std::uint8_t &base) {
  auto open = tok.find('(');
  if (open == std::string_view::npos || tok.back() != ')')
    throw AsmSyntaxError("expected offset(register), got `" + std::string(tok) + "'", lineno);
  auto off = trim(tok.substr(0, open));
  imm = off.empty() ? 0 : parse_imm(off, lineno);
  base = parse_reg(trim(tok.substr(open + 1, tok.size() - open - 2)), lineno);
}

}  // namespace

Program assemble(std::string_view source, std::uint32_t origin) {
  Program prog;
  prog.origin = origin;
  std::vector<SourceLine> insts;

  // Pass 1: labels and instruction addresses.
  auto lines = split_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    auto line = lines[i];
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    const auto here = static_cast<std::uint32_t>(origin + 4 * insts.size());
    while (true) {
      auto colon = line.find(':');
      if (colon == std::string_view::npos) break;
      auto label = trim(line.substr(0, colon));
      if (!is_ident(label))
        throw AsmSyntaxError("invalid label `" + std::string(label) + "'", lineno);
      if (!prog.symbols.emplace(std::string(label), here).second)
        throw DuplicateLabel("label `" + std::string(label) + "' defined twice", lineno);
      line = trim(line.substr(colon + 1));
    }
    if (line.empty()) continue;

    SourceLine sl{lineno, here, {}, {}};
    auto space = line.find_first_of(" \t");
    sl.mnemonic = line.substr(0, space);
    if (space != std::string_view::npos) {
      auto rest = trim(line.substr(space));
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        auto comma = rest.find(',', pos);
        if (comma == std::string_view::npos) comma = rest.size();
        sl.operands.push_back(trim(rest.substr(pos, comma - pos)));
        pos = comma + 1;
      }
    }
    insts.push_back(sl);
  }

  // Pass 2: encoding.
  prog.words.reserve(insts.size());
  for (const auto &sl : insts) {
    auto op = op_from_mnemonic(sl.mnemonic);
    if (!op)
      throw UnknownMnemonic("unknown mnemonic `" + std::string(sl.mnemonic) + "'", sl.lineno);

    auto expect = [&](std::size_t n) {
      if (sl.operands.size() != n)
        throw AsmSyntaxError(std::string(mnemonic(*op)) + " takes " +
                                 std::to_string(n) + " operands",
                             sl.lineno);
      for (auto o : sl.operands)
        if (o.empty()) throw AsmSyntaxError("empty operand", sl.lineno);
    };
    auto target = [&](std::string_view tok) -> std::int32_t {
      if (tok == ".") return 0;
      if (is_ident(tok)) {
        auto it = prog.symbols.find(std::string(tok));
        if (it == prog.symbols.end())
          throw UndefinedLabel("undefined label `" + std::string(tok) + "'", sl.lineno);
        return static_cast<std::int32_t>(it->second - sl.addr);
      }
      return parse_imm(tok, sl.lineno);
    };

    Instruction inst;
    inst.op = *op;
    switch (format_of(*op)) {
      case Format::kU:
        expect(2);
        inst.rd = parse_reg(sl.operands[0], sl.lineno);
        inst.imm = parse_imm(sl.operands[1], sl.lineno);
        break;
      case Format::kR:
        expect(3);
        inst.rd = parse_reg(sl.operands[0], sl.lineno);
        inst.rs1 = parse_reg(sl.operands[1], sl.lineno);
        inst.rs2 = parse_reg(sl.operands[2], sl.lineno);
        break;
      case Format::kI:
        if (*op == Op::kLw || *op == Op::kJalr) {
          expect(2);
          inst.rd = parse_reg(sl.operands[0], sl.lineno);
          parse_mem_operand(sl.operands[1], sl.lineno, inst.imm, inst.rs1);
        } else {
          expect(3);
          inst.rd = parse_reg(sl.operands[0], sl.lineno);
          inst.rs1 = parse_reg(sl.operands[1], sl.lineno);
          inst.imm = parse_imm(sl.operands[2], sl.lineno);
        }
        break;
      case Format::kS:
        expect(2);
        inst.rs2 = parse_reg(sl.operands[0], sl.lineno);
        parse_mem_operand(sl.operands[1], sl.lineno, inst.imm, inst.rs1);
        break;
      case Format::kB:
        expect(3);
        inst.rs1 = parse_reg(sl.operands[0], sl.lineno);
        inst.rs2 = parse_reg(sl.operands[1], sl.lineno);
        inst.imm = target(sl.operands[2]);
        break;
      case Format::kJ:
        expect(2);
        inst.rd = parse_reg(sl.operands[0], sl.lineno);
        inst.imm = target(sl.operands[1]);
        break;
      case Format::kSystem:
        if (!sl.operands.empty())
          throw AsmSyntaxError("ebreak takes no operands", sl.lineno);
        break;
    }
    try {
      prog.words.push_back(encode_instr(inst));
    } catch (const ImmediateOutOfRange &e) {
      throw ImmediateOutOfRange(e.what(), sl.lineno);
    }
  }
  return prog;
}

std::string disassemble(const Program &program) {
  std::string out;
  for (auto w : program.words) {
    out += format_instr(decode_or_throw(w));
    out += '\n';
  }
  return out;
}

}  // namespace nvbm::rv32
