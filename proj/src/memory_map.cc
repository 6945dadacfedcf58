// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/memory_map.h"

#include "nvbm/errors.h"
#include "nvbm/text.h"

namespace nvbm {

void MemoryMap::validate() const {
  if (nvdla_start > nvdla_end) throw MapConfigError("nvdla range inverted");
  if (dram_start > dram_end) throw MapConfigError("dram range inverted");
  if (!(nvdla_end < dram_start || dram_end < nvdla_start))
    throw MapConfigError("nvdla and dram ranges overlap");
}

Target decode_address(std::uint32_t addr, const MemoryMap &map) {
  if (map.in_nvdla(addr)) return Target::kNvdla;
  if (map.in_dram(addr)) return Target::kDram;
  return Target::kFault;
}

const char *target_name(Target t) {
  switch (t) {
    case Target::kNvdla:
      return "nvdla";
    case Target::kDram:
      return "dram";
    case Target::kFault:
      return "fault";
  }
  return "fault";
}

MapConfig parse_map_config(std::string_view text) {
  MapConfig cfg;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw MapConfigError("expected key = value", lineno);
    auto key = trim(line.substr(0, eq));
    auto value = parse_uint(trim(line.substr(eq + 1)));
    if (!value)
      throw MapConfigError("invalid value for `" + std::string(key) + "'",
                           lineno);

    auto u32 = [&]() {
      if (*value > 0xffffffffu)
        throw MapConfigError("`" + std::string(key) + "' exceeds 32 bits",
                             lineno);
      return static_cast<std::uint32_t>(*value);
    };

    if (key == "nvdla_start") cfg.map.nvdla_start = u32();
    else if (key == "nvdla_end") cfg.map.nvdla_end = u32();
    else if (key == "dram_start") cfg.map.dram_start = u32();
    else if (key == "dram_end") cfg.map.dram_end = u32();
    else if (key == "result_addr") cfg.result_addr = u32();
    else if (key == "rebase_from") cfg.rebase_from = *value;
    else if (key == "rebase_to") cfg.rebase_to = *value;
    else if (key == "rebase_window") cfg.rebase_window = *value;
    else if (key == "csb_addr_scale") {
      cfg.csb_addr_scale = u32();
      if (cfg.csb_addr_scale != 1 && cfg.csb_addr_scale != 4)
        throw MapConfigError("csb_addr_scale must be 1 or 4", lineno);
    } else if (key.substr(0, 5) == "mask.") {
      auto addr = parse_hex(key.substr(5));
      if (!addr || *addr > 0xffffffffu)
        throw MapConfigError("invalid mask address", lineno);
      cfg.masks[static_cast<std::uint32_t>(*addr)] = u32();
    } else {
      throw MapConfigError("unknown key `" + std::string(key) + "'", lineno);
    }
  }
  cfg.map.validate();
  return cfg;
}

std::string emit_map_config(const MapConfig &cfg) {
  std::string out;
  auto kv = [&](std::string_view key, std::string value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  kv("nvdla_start", hex32(cfg.map.nvdla_start));
  kv("nvdla_end", hex32(cfg.map.nvdla_end));
  kv("dram_start", hex32(cfg.map.dram_start));
  kv("dram_end", hex32(cfg.map.dram_end));
  if (cfg.result_addr) kv("result_addr", hex32(*cfg.result_addr));
  if (cfg.rebase_from) kv("rebase_from", hex_addr(*cfg.rebase_from));
  if (cfg.rebase_to) kv("rebase_to", hex_addr(*cfg.rebase_to));
  if (cfg.rebase_window)
    kv("rebase_window", hex_addr(*cfg.rebase_window));
  if (cfg.csb_addr_scale != 1) kv("csb_addr_scale", std::to_string(cfg.csb_addr_scale));
  for (auto [addr, mask] : cfg.masks) kv("mask." + hex32(addr), hex32(mask));
  return out;
}

}  // namespace nvbm
