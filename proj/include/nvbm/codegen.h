// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#ifndef NVBM_CODEGEN_H_
#define NVBM_CODEGEN_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nvbm/config.h"
#include "nvbm/memory_map.h"

namespace nvbm {

inline constexpr std::uint32_t kDefaultResultAddr = 0x200ffff0;
inline constexpr std::uint32_t kSuccessCode = 0x600d600d;
inline constexpr std::uint32_t kFailureCode = 0xbaadbaad;

struct CodegenOptions {
  // Completion mailbox in DRAM; the program stores success_code or
  // failure_code here before parking in a self-loop.
  std::uint32_t result_addr = kDefaultResultAddr;
  std::uint32_t success_code = kSuccessCode;
  std::uint32_t failure_code = kFailureCode;
  // Registers the program may clobber, by role: address, data, mask,
  // expected value.
  std::array<std::uint8_t, 4> scratch_regs = {5, 6, 7, 28};
  // Register byte address = command address * csb_addr_scale (1 or 4).
  std::uint32_t csb_addr_scale = 1;
};

// Register address as seen on the data bus.
std::uint32_t register_byte_addr(std::uint32_t addr, const CodegenOptions &opts);

// Bare-metal RV32I assembly that replays `cmds` with word loads/stores:
//   write_reg     -> lui/addi address, lui/addi data, sw
//   read_reg poll -> poll<k>: lw; and mask; bne expected, poll<k>
//   read_reg once -> lw; and mask; beq expected, ok<k>; jal fail; ok<k>:
// followed by the success epilogue and, when any once-read exists, the
// failure handler. Throws AddressOutOfWindow for register addresses outside
// the NVDLA window (or not word-aligned) and for a mailbox outside DRAM.
std::string emit_asm(const std::vector<Command> &cmds, const MemoryMap &map = {},
                     const CodegenOptions &opts = {});

}  // namespace nvbm

#endif  // NVBM_CODEGEN_H_
