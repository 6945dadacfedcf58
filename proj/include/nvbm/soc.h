// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Functional SoC model. An RV32I core fetches from its own program memory
// and issues data accesses on a bus that decodes the NVDLA register window
// and DRAM. DRAM is shared through an arbiter with a DBB replay master whose
// 64-bit beats pass through a 64->32 width converter.
//
// Each cycle grants DRAM to at most one master. The core executes at most
// one instruction per cycle and stalls while the replayer holds the grant.

#ifndef NVBM_SOC_H_
#define NVBM_SOC_H_

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nvbm/codegen.h"
#include "nvbm/config.h"
#include "nvbm/image.h"
#include "nvbm/memory_map.h"
#include "nvbm/rv32.h"
#include "nvbm/trace.h"

namespace nvbm::soc {

// ---------------------------------------------------------------- arbiter

enum class Master : std::uint8_t { kCpu = 0, kDbb = 1 };
inline constexpr std::size_t kNumMasters = 2;
const char *master_name(Master m);

// Bit i set when master i requests.
using RequestSet = std::uint8_t;
inline constexpr RequestSet request_bit(Master m) {
  return static_cast<RequestSet>(1u << static_cast<unsigned>(m));
}

enum class ArbiterPolicy : std::uint8_t { kRoundRobin, kCpuFirst, kDbbFirst };

struct ArbiterState {
  ArbiterPolicy policy = ArbiterPolicy::kRoundRobin;
  // Initialised so the first round-robin grant goes to the CPU.
  Master last_granted = Master::kDbb;
};

struct Grant {
  Master granted;
  ArbiterState state;
};

// Exactly one requester wins. Round robin picks the first requester after
// `last_granted` in cyclic order. Throws std::invalid_argument when
// `requests` is empty.
Grant arbiter_grant(RequestSet requests, const ArbiterState &state);

// ------------------------------------------------------------------- DRAM

class Dram {
 public:
  explicit Dram(const MemoryMap &map) : map_(map) {}

  // Addresses are absolute bus addresses inside the DRAM window; callers
  // check the window. Unwritten bytes read as zero.
  std::uint8_t read_byte(std::uint64_t addr) const;
  void write_byte(std::uint64_t addr, std::uint8_t value);
  std::uint32_t read_word(std::uint64_t addr) const;
  void write_word(std::uint64_t addr, std::uint32_t value);

  // Throws AddressOutOfWindow when any populated byte lies outside DRAM.
  void load(const MemoryImage &image);

  const MemoryMap &map() const { return map_; }

 private:
  static constexpr unsigned kPageBits = 12;
  using Page = std::array<std::uint8_t, 1u << kPageBits>;
  MemoryMap map_;
  std::unordered_map<std::uint64_t, std::unique_ptr<Page>> pages_;
};

// -------------------------------------------------------- width converter

struct WordAccess {
  std::uint64_t seq = 0;  // owning DBB transaction
  std::uint64_t addr = 0;
  std::uint32_t word = 0;
  bool is_write = false;

  bool operator==(const WordAccess &) const = default;
};

// A 64-bit beat as two 32-bit halves, low word first.
std::array<std::uint32_t, 2> split_beat(std::uint64_t beat);
std::uint64_t join_beat(std::uint32_t low, std::uint32_t high);

// Splits a DBB transaction (already rebased to `addr`) into consecutive
// little-endian 32-bit accesses in address order.
std::vector<WordAccess> split_transaction(const DbbTransaction &t,
                                          std::uint64_t addr);

// ------------------------------------------------------- scripted NVDLA

struct ScriptEntry {
  std::uint32_t addr = 0;  // register byte address
  std::uint32_t value = 0;
  // The first `delay` reads at this position answer ~value, which never
  // satisfies a non-zero mask.
  std::uint64_t delay = 0;

  bool operator==(const ScriptEntry &) const = default;
};

// One entry per read_reg, answering its expected value.
std::vector<ScriptEntry> script_from_commands(const std::vector<Command> &cmds,
                                              const CodegenOptions &opts = {},
                                              std::uint64_t delay = 0);

class ScriptedNvdla {
 public:
  explicit ScriptedNvdla(std::vector<ScriptEntry> script = {})
      : script_(std::move(script)) {}

  void write(std::uint32_t addr, std::uint32_t data) {
    write_log_.emplace_back(addr, data);
  }
  // nullopt when the address does not match the script head (or the script
  // is exhausted).
  std::optional<std::uint32_t> read(std::uint32_t addr);

  const std::vector<std::pair<std::uint32_t, std::uint32_t>> &write_log() const {
    return write_log_;
  }
  std::uint64_t reads() const { return reads_; }
  std::size_t remaining() const { return script_.size() - head_; }

 private:
  std::vector<ScriptEntry> script_;
  std::size_t head_ = 0;
  std::uint64_t served_at_head_ = 0;
  std::uint64_t reads_ = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> write_log_;
};

// ----------------------------------------------------------- DBB replay

struct ReplayMismatch {
  std::uint64_t seq = 0;   // DBB transaction
  std::uint64_t addr = 0;  // rebased address of the first mismatching word
  std::uint32_t expected = 0;
  std::uint32_t actual = 0;

  bool operator==(const ReplayMismatch &) const = default;
};

struct ReplayReport {
  std::uint64_t transactions = 0;
  std::uint64_t word_accesses = 0;
  // At most one entry per read transaction, in trace order.
  std::vector<ReplayMismatch> mismatches;

  bool clean() const { return mismatches.empty(); }
};

// Second bus master: issues the word accesses of each transaction in order,
// one per grant. Writes update DRAM; reads are compared against it.
class DbbReplayer {
 public:
  // Throws AddressOutOfWindow when a rebased transaction leaves DRAM.
  DbbReplayer(const std::vector<DbbTransaction> &dbb,
              const AddressRebase &rebase, const MemoryMap &map);

  bool pending() const { return next_ < accesses_.size(); }
  void step(Dram &dram);
  const ReplayReport &report() const { return report_; }

 private:
  std::vector<WordAccess> accesses_;
  std::size_t next_ = 0;
  std::optional<std::uint64_t> last_mismatch_seq_;
  ReplayReport report_;
};

ReplayReport replay_dbb(const MemoryImage &image,
                        const std::vector<DbbTransaction> &dbb,
                        const AddressRebase &rebase, const MemoryMap &map = {});

// ------------------------------------------------------------ simulation

enum class Status : std::uint8_t {
  kRunning,
  kSuccess,
  kFailure,
  kWatchdogExpired,
  kBusFault,
  kScriptMismatch,
  kUnsupportedInstruction,
};
const char *status_name(Status s);

struct GrantRecord {
  std::uint64_t cycle = 0;
  RequestSet requests = 0;
  Master granted = Master::kCpu;
};

struct SimOptions {
  MemoryMap map;
  std::uint32_t result_addr = kDefaultResultAddr;
  std::uint32_t success_code = kSuccessCode;
  // Maximum retired instructions; must be > 0.
  std::uint64_t watchdog = 10'000'000;
  ArbiterPolicy policy = ArbiterPolicy::kRoundRobin;
  std::size_t program_words = 1u << 16;
  bool record_grants = false;
};

struct SimResult {
  Status status = Status::kRunning;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> observed_writes;
  std::uint64_t retired_instructions = 0;
  std::array<std::uint64_t, kNumMasters> bus_grants{};
  std::uint64_t bus_cycles = 0;
  std::uint64_t nvdla_reads = 0;
  std::uint32_t mailbox = 0;
  std::uint32_t final_pc = 0;
  std::string detail;  // fault description, empty on success
  std::optional<ReplayReport> replay;
  std::vector<GrantRecord> grant_log;  // only with record_grants
};

struct StepEvent {
  enum class Kind : std::uint8_t {
    kNone, kNvdlaWrite, kNvdlaRead, kDramWrite, kDramRead, kHalt, kFault
  };
  Kind kind = Kind::kNone;
  std::uint32_t addr = 0;
  std::uint32_t data = 0;
};

// One SoC instance. Not thread-safe; independent instances may run
// concurrently.
class Soc {
 public:
  // Throws std::invalid_argument for watchdog == 0 or a program larger than
  // program memory, AddressOutOfWindow for an image outside DRAM.
  Soc(const rv32::Program &program, const MemoryImage &image,
      std::vector<ScriptEntry> script, const SimOptions &options);

  void attach_replay(const std::vector<DbbTransaction> &dbb,
                     const AddressRebase &rebase);

  // Executes one CPU instruction with immediate DRAM access (no contention).
  StepEvent step();
  // One bus cycle: arbitrate, then let the granted master (and the core,
  // if it needs no DRAM access) advance.
  void cycle();
  bool cpu_halted() const { return status_ != Status::kRunning; }
  bool finished() const;

  // Runs to completion and collects the result.
  SimResult run();

  std::uint32_t reg(unsigned r) const { return regs_[r]; }
  std::uint32_t pc() const { return pc_; }
  const Dram &dram() const { return dram_; }
  const ScriptedNvdla &nvdla() const { return nvdla_; }

 private:
  std::optional<std::uint32_t> fetch();
  // DRAM address the next instruction will access, if any.
  std::optional<std::uint32_t> pending_dram_access();
  StepEvent execute();
  void halt(Status s, std::string detail = {});

  rv32::Program program_;
  SimOptions options_;
  Dram dram_;
  ScriptedNvdla nvdla_;
  std::unique_ptr<DbbReplayer> replayer_;
  ArbiterState arbiter_;

  std::array<std::uint32_t, 32> regs_{};
  std::uint32_t pc_ = 0;
  Status status_ = Status::kRunning;
  std::string detail_;
  std::uint64_t retired_ = 0;
  std::uint64_t cycles_ = 0;
  std::array<std::uint64_t, kNumMasters> grants_{};
  std::vector<GrantRecord> grant_log_;
};

// Convenience wrapper: build a Soc, optionally attach a DBB replay, run.
SimResult run(const rv32::Program &program, const MemoryImage &image,
              std::vector<ScriptEntry> script, const SimOptions &options,
              const std::vector<DbbTransaction> *replay_dbb = nullptr,
              const AddressRebase &rebase = {});

// `key = value` lines: status, retired_instructions, bus_cycles,
// grants.cpu, grants.dbb, nvdla_reads, observed_writes, mailbox and replay
// counters when a replay ran.
std::string format_result(const SimResult &result);

}  // namespace nvbm::soc

#endif  // NVBM_SOC_H_
