// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/soc.h"

#include <stdexcept>

#include "nvbm/errors.h"
#include "nvbm/text.h"

namespace nvbm::soc {

const char *master_name(Master m) {
  return m == Master::kCpu ? "cpu" : "dbb";
}

Grant arbiter_grant(RequestSet requests, const ArbiterState &state) {
  const RequestSet cpu = request_bit(Master::kCpu);
  const RequestSet dbb = request_bit(Master::kDbb);
  if (!(requests & (cpu | dbb)))
    throw std::invalid_argument("arbiter_grant: no requesting master");

  Master winner;
  if (requests == cpu) {
    winner = Master::kCpu;
  } else if (requests == dbb) {
    winner = Master::kDbb;
  } else {
    switch (state.policy) {
      case ArbiterPolicy::kCpuFirst:
        winner = Master::kCpu;
        break;
      case ArbiterPolicy::kDbbFirst:
        winner = Master::kDbb;
        break;
      case ArbiterPolicy::kRoundRobin:
      default: {
        auto next = (static_cast<unsigned>(state.last_granted) + 1) % kNumMasters;
        winner = static_cast<Master>(next);
        break;
      }
    }
  }
  ArbiterState out = state;
  out.last_granted = winner;
  return {winner, out};
}

std::uint8_t Dram::read_byte(std::uint64_t addr) const {
  auto it = pages_.find(addr >> kPageBits);
  if (it == pages_.end()) return 0;
  return (*it->second)[addr & ((1u << kPageBits) - 1)];
}

void Dram::write_byte(std::uint64_t addr, std::uint8_t value) {
  auto &page = pages_[addr >> kPageBits];
  if (!page) page = std::make_unique<Page>();  // value-initialized: zeros
  (*page)[addr & ((1u << kPageBits) - 1)] = value;
}

std::uint32_t Dram::read_word(std::uint64_t addr) const {
  std::uint32_t w = 0;
  for (unsigned i = 0; i < 4; ++i) w |= std::uint32_t{read_byte(addr + i)} << (8 * i);
  return w;
}

void Dram::write_word(std::uint64_t addr, std::uint32_t value) {
  for (unsigned i = 0; i < 4; ++i)
    write_byte(addr + i, static_cast<std::uint8_t>(value >> (8 * i)));
}

void Dram::load(const MemoryImage &image) {
  for (const auto &[addr, bytes] : image.spans()) {
    if (!map_.dram_contains(addr, bytes.size()))
      throw AddressOutOfWindow("image span at " + hex_addr(addr) +
                               " lies outside DRAM");
    for (std::size_t i = 0; i < bytes.size(); ++i) write_byte(addr + i, bytes[i]);
  }
}

std::array<std::uint32_t, 2> split_beat(std::uint64_t beat) {
  return {static_cast<std::uint32_t>(beat), static_cast<std::uint32_t>(beat >> 32)};
}

std::uint64_t join_beat(std::uint32_t low, std::uint32_t high) {
  return std::uint64_t{high} << 32 | low;
}

std::vector<WordAccess> split_transaction(const DbbTransaction &t,
                                          std::uint64_t addr) {
  if (t.payload.size() % 4)
    throw PayloadLengthError("DBB payload of " + std::to_string(t.payload.size()) +
                             " bytes cannot be split into words");
  std::vector<WordAccess> out;
  out.reserve(t.payload.size() / 4);
  for (std::size_t i = 0; i < t.payload.size(); i += 4) {
    std::uint32_t w = std::uint32_t{t.payload[i]} |
                      std::uint32_t{t.payload[i + 1]} << 8 |
                      std::uint32_t{t.payload[i + 2]} << 16 |
                      std::uint32_t{t.payload[i + 3]} << 24;
    out.push_back({t.seq, addr + i, w, t.is_write});
  }
  return out;
}

std::vector<ScriptEntry> script_from_commands(const std::vector<Command> &cmds,
                                              const CodegenOptions &opts,
                                              std::uint64_t delay) {
  std::vector<ScriptEntry> script;
  for (const auto &c : cmds)
    if (!c.is_write())
      script.push_back({register_byte_addr(c.addr, opts), c.data, delay});
  return script;
}

std::optional<std::uint32_t> ScriptedNvdla::read(std::uint32_t addr) {
  ++reads_;
  if (head_ >= script_.size() || script_[head_].addr != addr) return std::nullopt;
  const auto &entry = script_[head_];
  if (served_at_head_ < entry.delay) {
    ++served_at_head_;
    return ~entry.value;
  }
  ++head_;
  served_at_head_ = 0;
  return entry.value;
}

DbbReplayer::DbbReplayer(const std::vector<DbbTransaction> &dbb,
                         const AddressRebase &rebase, const MemoryMap &map) {
  for (const auto &t : dbb) {
    if (t.payload.empty()) continue;
    const std::uint64_t base = rebase_addr(t.addr, rebase);
    rebase_addr(t.end() - 1, rebase);
    if (!map.dram_contains(base, t.payload.size()))
      throw AddressOutOfWindow("DBB transaction " + std::to_string(t.seq) +
                               " rebased to " + hex_addr(base) +
                               " leaves DRAM");
    auto words = split_transaction(t, base);
    accesses_.insert(accesses_.end(), words.begin(), words.end());
    ++report_.transactions;
  }
}

void DbbReplayer::step(Dram &dram) {
  const WordAccess &a = accesses_[next_++];
  ++report_.word_accesses;
  if (a.is_write) {
    dram.write_word(a.addr, a.word);
    return;
  }
  std::uint32_t actual = dram.read_word(a.addr);
  if (actual != a.word && last_mismatch_seq_ != a.seq) {
    report_.mismatches.push_back({a.seq, a.addr, a.word, actual});
    last_mismatch_seq_ = a.seq;
  }
}

ReplayReport replay_dbb(const MemoryImage &image,
                        const std::vector<DbbTransaction> &dbb,
                        const AddressRebase &rebase, const MemoryMap &map) {
  Dram dram(map);
  dram.load(image);
  DbbReplayer replayer(dbb, rebase, map);
  ArbiterState arbiter;
  while (replayer.pending()) {
    arbiter = arbiter_grant(request_bit(Master::kDbb), arbiter).state;
    replayer.step(dram);
  }
  return replayer.report();
}

const char *status_name(Status s) {
  switch (s) {
    case Status::kRunning:
      return "running";
    case Status::kSuccess:
      return "success";
    case Status::kFailure:
      return "failure";
    case Status::kWatchdogExpired:
      return "watchdog_expired";
    case Status::kBusFault:
      return "bus_fault";
    case Status::kScriptMismatch:
      return "script_mismatch";
    case Status::kUnsupportedInstruction:
      return "unsupported_instruction";
  }
  return "unknown";
}

Soc::Soc(const rv32::Program &program, const MemoryImage &image,
         std::vector<ScriptEntry> script, const SimOptions &options)
    : program_(program),
      options_(options),
      dram_(options.map),
      nvdla_(std::move(script)) {
  if (options.watchdog == 0)
    throw std::invalid_argument("watchdog must be greater than zero");
  if (program.words.size() > options.program_words)
    throw std::invalid_argument("program of " + std::to_string(program.words.size()) +
                                " words exceeds program memory of " +
                                std::to_string(options.program_words) + " words");
  options_.map.validate();
  arbiter_.policy = options.policy;
  dram_.load(image);
  pc_ = program.origin;
}

void Soc::attach_replay(const std::vector<DbbTransaction> &dbb,
                        const AddressRebase &rebase) {
  replayer_ = std::make_unique<DbbReplayer>(dbb, rebase, options_.map);
}

std::optional<std::uint32_t> Soc::fetch() {
  if (pc_ < program_.origin || pc_ % 4) return std::nullopt;
  std::uint64_t index = (pc_ - program_.origin) / 4;
  if (index >= program_.words.size()) return std::nullopt;
  return program_.words[index];
}

std::optional<std::uint32_t> Soc::pending_dram_access() {
  auto word = fetch();
  if (!word) return std::nullopt;
  auto inst = rv32::decode_instr(*word);
  if (!inst || (inst->op != rv32::Op::kLw && inst->op != rv32::Op::kSw))
    return std::nullopt;
  std::uint32_t addr = regs_[inst->rs1] + static_cast<std::uint32_t>(inst->imm);
  if (addr % 4 || decode_address(addr, options_.map) != Target::kDram)
    return std::nullopt;
  return addr;
}

void Soc::halt(Status s, std::string detail) {
  status_ = s;
  detail_ = std::move(detail);
}

StepEvent Soc::execute() {
  using rv32::Op;
  StepEvent ev;
  if (status_ != Status::kRunning) return {StepEvent::Kind::kHalt, pc_, 0};

  auto word = fetch();
  if (!word) {
    halt(Status::kBusFault, "instruction fetch outside program memory at " + hex32(pc_));
    return {StepEvent::Kind::kFault, pc_, 0};
  }
  auto decoded = rv32::decode_instr(*word);
  if (!decoded) {
    halt(Status::kUnsupportedInstruction,
         "unsupported instruction " + hex32(*word) + " at " + hex32(pc_));
    return {StepEvent::Kind::kFault, pc_, *word};
  }
  const rv32::Instruction &i = *decoded;
  const std::uint32_t rs1 = regs_[i.rs1];
  const std::uint32_t rs2 = regs_[i.rs2];
  const auto imm = static_cast<std::uint32_t>(i.imm);
  std::uint32_t next = pc_ + 4;
  bool control = false;
  auto write_rd = [&](std::uint32_t v) {
    if (i.rd) regs_[i.rd] = v;
  };
  auto bus_fault = [&](std::uint32_t addr, const char *what) {
    halt(Status::kBusFault, std::string(what) + " at " + hex32(addr) + " (pc " +
                                hex32(pc_) + ")");
    return StepEvent{StepEvent::Kind::kFault, addr, 0};
  };

  switch (i.op) {
    case Op::kLui:
      write_rd(imm << 12);
      break;
    case Op::kAuipc:
      write_rd(pc_ + (imm << 12));
      break;
    case Op::kAddi:
      write_rd(rs1 + imm);
      break;
    case Op::kAndi:
      write_rd(rs1 & imm);
      break;
    case Op::kAnd:
      write_rd(rs1 & rs2);
      break;
    case Op::kLw: {
      const std::uint32_t addr = rs1 + imm;
      if (addr % 4) return bus_fault(addr, "misaligned load");
      switch (decode_address(addr, options_.map)) {
        case Target::kNvdla: {
          auto v = nvdla_.read(addr);
          if (!v) {
            halt(Status::kScriptMismatch,
                 "register read at " + hex32(addr) + " does not match the script");
            return {StepEvent::Kind::kFault, addr, 0};
          }
          write_rd(*v);
          ev = {StepEvent::Kind::kNvdlaRead, addr, *v};
          break;
        }
        case Target::kDram: {
          std::uint32_t v = dram_.read_word(addr);
          write_rd(v);
          ev = {StepEvent::Kind::kDramRead, addr, v};
          break;
        }
        case Target::kFault:
          return bus_fault(addr, "load from unmapped address");
      }
      break;
    }
    case Op::kSw: {
      const std::uint32_t addr = rs1 + imm;
      if (addr % 4) return bus_fault(addr, "misaligned store");
      switch (decode_address(addr, options_.map)) {
        case Target::kNvdla:
          nvdla_.write(addr, rs2);
          ev = {StepEvent::Kind::kNvdlaWrite, addr, rs2};
          break;
        case Target::kDram:
          dram_.write_word(addr, rs2);
          ev = {StepEvent::Kind::kDramWrite, addr, rs2};
          break;
        case Target::kFault:
          return bus_fault(addr, "store to unmapped address");
      }
      break;
    }
    case Op::kBeq:
    case Op::kBne:
      control = true;
      if ((rs1 == rs2) == (i.op == Op::kBeq)) next = pc_ + imm;
      break;
    case Op::kJal:
      control = i.rd == 0;
      write_rd(pc_ + 4);
      next = pc_ + imm;
      break;
    case Op::kJalr:
      control = i.rd == 0;
      write_rd(pc_ + 4);
      next = (rs1 + imm) & ~1u;
      break;
    case Op::kEbreak:
      ++retired_;
      halt(dram_.read_word(options_.result_addr) == options_.success_code
               ? Status::kSuccess
               : Status::kFailure);
      return {StepEvent::Kind::kHalt, pc_, 0};
  }

  ++retired_;
  if (control && next == pc_) {
    // Parked in a self-loop: the program is done.
    halt(dram_.read_word(options_.result_addr) == options_.success_code
             ? Status::kSuccess
             : Status::kFailure);
    return {StepEvent::Kind::kHalt, pc_, 0};
  }
  pc_ = next;
  if (retired_ >= options_.watchdog)
    halt(Status::kWatchdogExpired,
         "watchdog expired after " + std::to_string(retired_) + " instructions");
  return ev;
}

StepEvent Soc::step() {
  if (!cpu_halted() && pending_dram_access()) {
    arbiter_ = arbiter_grant(request_bit(Master::kCpu), arbiter_).state;
    ++grants_[static_cast<std::size_t>(Master::kCpu)];
  }
  return execute();
}

void Soc::cycle() {
  if (finished()) return;
  RequestSet requests = 0;
  const bool cpu_wants = !cpu_halted() && pending_dram_access().has_value();
  if (cpu_wants) requests |= request_bit(Master::kCpu);
  if (replayer_ && replayer_->pending()) requests |= request_bit(Master::kDbb);

  bool cpu_runs = !cpu_halted();
  if (requests) {
    auto grant = arbiter_grant(requests, arbiter_);
    arbiter_ = grant.state;
    ++grants_[static_cast<std::size_t>(grant.granted)];
    if (options_.record_grants)
      grant_log_.push_back({cycles_, requests, grant.granted});
    if (grant.granted == Master::kDbb) {
      replayer_->step(dram_);
      if (cpu_wants) cpu_runs = false;  // stalled this cycle
    }
  }
  if (cpu_runs) execute();
  ++cycles_;
}

bool Soc::finished() const {
  return cpu_halted() && !(replayer_ && replayer_->pending());
}

SimResult Soc::run() {
  while (!finished()) cycle();
  SimResult r;
  r.status = status_;
  r.observed_writes = nvdla_.write_log();
  r.retired_instructions = retired_;
  r.bus_grants = grants_;
  r.bus_cycles = cycles_;
  r.nvdla_reads = nvdla_.reads();
  r.mailbox = dram_.read_word(options_.result_addr);
  r.final_pc = pc_;
  r.detail = detail_;
  if (replayer_) r.replay = replayer_->report();
  r.grant_log = grant_log_;
  return r;
}

SimResult run(const rv32::Program &program, const MemoryImage &image,
              std::vector<ScriptEntry> script, const SimOptions &options,
              const std::vector<DbbTransaction> *replay_dbb,
              const AddressRebase &rebase) {
  Soc soc(program, image, std::move(script), options);
  if (replay_dbb) soc.attach_replay(*replay_dbb, rebase);
  return soc.run();
}

std::string format_result(const SimResult &r) {
  std::string out;
  auto kv = [&](const std::string &k, const std::string &v) {
    out += k + " = " + v + "\n";
  };
  kv("status", status_name(r.status));
  kv("retired_instructions", std::to_string(r.retired_instructions));
  kv("bus_cycles", std::to_string(r.bus_cycles));
  kv("grants.cpu", std::to_string(r.bus_grants[0]));
  kv("grants.dbb", std::to_string(r.bus_grants[1]));
  kv("nvdla_reads", std::to_string(r.nvdla_reads));
  kv("observed_writes", std::to_string(r.observed_writes.size()));
  kv("mailbox", hex32(r.mailbox));
  if (r.replay) {
    kv("replay.transactions", std::to_string(r.replay->transactions));
    kv("replay.word_accesses", std::to_string(r.replay->word_accesses));
    kv("replay.mismatches", std::to_string(r.replay->mismatches.size()));
  }
  if (!r.detail.empty()) kv("detail", r.detail);
  return out;
}

}  // namespace nvbm::soc
