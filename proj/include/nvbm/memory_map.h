// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#ifndef NVBM_MEMORY_MAP_H_
#define NVBM_MEMORY_MAP_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace nvbm {

// Data-side address map of the SoC. Program memory is a separate fetch
// space and is not decoded here.
struct MemoryMap {
  std::uint32_t nvdla_start = 0x0;
  std::uint32_t nvdla_end = 0xfffff;
  std::uint32_t dram_start = 0x100000;
  std::uint32_t dram_end = 0x200fffff;

  std::uint64_t dram_size() const {
    return std::uint64_t{dram_end} - dram_start + 1;
  }
  bool in_nvdla(std::uint64_t addr) const {
    return addr >= nvdla_start && addr <= nvdla_end;
  }
  bool in_dram(std::uint64_t addr) const {
    return addr >= dram_start && addr <= dram_end;
  }
  // Whole range [addr, addr + len) inside DRAM.
  bool dram_contains(std::uint64_t addr, std::uint64_t len) const {
    return addr >= dram_start && len <= dram_size() &&
           addr - dram_start <= dram_size() - len;
  }

  // Throws MapConfigError when a range is inverted or the two overlap.
  void validate() const;

  bool operator==(const MemoryMap &) const = default;
};

enum class Target : std::uint8_t { kNvdla, kDram, kFault };

Target decode_address(std::uint32_t addr, const MemoryMap &map);
const char *target_name(Target t);

// Contents of the memory-map configuration file: flat `key = value` lines
// with '#' comments. Keys: nvdla_start, nvdla_end, dram_start, dram_end,
// result_addr, rebase_from, rebase_to, rebase_window, csb_addr_scale and
// any number of `mask.0x<addr> = 0x<mask>` entries.
struct MapConfig {
  MemoryMap map;
  std::optional<std::uint32_t> result_addr;
  std::optional<std::uint64_t> rebase_from;
  std::optional<std::uint64_t> rebase_to;
  std::optional<std::uint64_t> rebase_window;
  std::uint32_t csb_addr_scale = 1;  // 1 (pass-through) or 4
  std::map<std::uint32_t, std::uint32_t> masks;
};

MapConfig parse_map_config(std::string_view text);
std::string emit_map_config(const MapConfig &config);

}  // namespace nvbm

#endif  // NVBM_MEMORY_MAP_H_
