// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Virtual-platform log parsing.
//
// A transaction line contains the interface keyword followed by
// whitespace-separated key=value tokens, in any order:
//
//   nvdla.csb_adaptor: iswrite=1 addr=0x00003004 data=0x00000001
//   nvdla.dbb_adaptor: iswrite=0 addr=0xc0000000 data=0x1122334455667788 len=8
//
// `iswrite`, `addr` and `data` are required; DBB lines accept an optional
// decimal `len`. Unknown tokens are ignored. DBB data is stored into memory
// little-endian: the least significant byte of `data` lands at `addr`.

#ifndef NVBM_TRACE_H_
#define NVBM_TRACE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvbm {

inline constexpr std::string_view kCsbKeyword = "nvdla.csb_adaptor";
inline constexpr std::string_view kDbbKeyword = "nvdla.dbb_adaptor";

struct CsbTransaction {
  std::uint64_t seq = 0;
  std::uint32_t addr = 0;
  std::uint32_t data = 0;
  bool is_write = false;

  bool operator==(const CsbTransaction &) const = default;
};

struct DbbTransaction {
  std::uint64_t seq = 0;
  std::uint64_t addr = 0;
  std::vector<std::uint8_t> payload;  // memory order, size % 4 == 0
  bool is_write = false;

  std::uint64_t end() const { return addr + payload.size(); }
  bool operator==(const DbbTransaction &) const = default;
};

struct TraceBundle {
  std::vector<CsbTransaction> csb;
  std::vector<DbbTransaction> dbb;
  std::string source;

  bool empty() const { return csb.empty() && dbb.empty(); }
  // Provenance is not part of equality.
  bool operator==(const TraceBundle &o) const {
    return csb == o.csb && dbb == o.dbb;
  }
};

struct ParseOptions {
  // Lenient mode skips malformed lines instead of throwing; each skip is
  // logged and, when `warnings` is set, appended there.
  bool lenient = false;
  std::vector<std::string> *warnings = nullptr;
  std::string source;
};

// Both return nullopt when the line lacks the keyword and throw
// MalformedTransactionLine (or PayloadLengthError for DBB) when the keyword
// is present but the fields do not parse. `seq` is left at 0.
std::optional<CsbTransaction> parse_csb_line(std::string_view line);
std::optional<DbbTransaction> parse_dbb_line(std::string_view line);

// Lines containing both keywords are ambiguous and ignored, like any line
// containing neither.
TraceBundle parse_log(std::string_view text, const ParseOptions &options = {});

// Canonical line rendering; parse_*_line(format_*_line(t)) == t (seq aside).
std::string format_csb_line(const CsbTransaction &t);
std::string format_dbb_line(const DbbTransaction &t);

struct SyntheticSpec {
  std::size_t csb_writes = 0;
  std::size_t csb_reads = 0;
  std::size_t dbb_reads = 0;
  std::size_t dbb_writes = 0;
  // CSB addresses are drawn word-aligned from [csb_addr_lo, csb_addr_hi].
  std::uint32_t csb_addr_lo = 0x0;
  std::uint32_t csb_addr_hi = 0xffffc;
  // DBB transactions fall in [dbb_base, dbb_base + dbb_span), 8-byte
  // aligned, each 1..dbb_max_beats 64-bit beats long.
  std::uint64_t dbb_base = 0xc0000000;
  std::uint64_t dbb_span = 0x1000;
  std::size_t dbb_max_beats = 4;
  // Unrelated simulator chatter interleaved between transaction lines.
  std::size_t noise_lines = 0;
  std::uint64_t seed = 0;
};

struct SyntheticTrace {
  std::string text;
  TraceBundle bundle;
};

// Deterministic in `spec.seed` on every platform. DBB reads return the
// current content of a shadow memory (fresh random bytes for untouched
// locations) so the trace is memory-consistent.
SyntheticTrace gen_synthetic_trace(const SyntheticSpec &spec);

}  // namespace nvbm

#endif  // NVBM_TRACE_H_
