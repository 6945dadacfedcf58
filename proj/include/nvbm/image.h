// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// DRAM preload images: construction from DBB traffic and the .bin / .mem
// serializations.

#ifndef NVBM_IMAGE_H_
#define NVBM_IMAGE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvbm/memory_map.h"
#include "nvbm/trace.h"

namespace nvbm {

// Sparse byte-addressed memory content kept as sorted, disjoint, coalesced
// spans: two spans never touch end-to-start.
class MemoryImage {
 public:
  using SpanMap = std::map<std::uint64_t, std::vector<std::uint8_t>>;

  // Overwrites any existing content in the range.
  void write(std::uint64_t addr, std::span<const std::uint8_t> bytes);
  void write_byte(std::uint64_t addr, std::uint8_t value) {
    write(addr, std::span<const std::uint8_t>(&value, 1));
  }
  std::optional<std::uint8_t> read_byte(std::uint64_t addr) const;

  const SpanMap &spans() const { return spans_; }
  bool empty() const { return spans_.empty(); }
  // Lowest populated address and one past the highest; both 0 when empty.
  std::uint64_t base() const;
  std::uint64_t limit() const;
  std::uint64_t populated_bytes() const;

  bool operator==(const MemoryImage &) const = default;

 private:
  SpanMap spans_;
};

// Set of byte addresses stored as coalesced half-open ranges.
class AddressSet {
 public:
  void insert(std::uint64_t begin, std::uint64_t end);
  void insert(std::uint64_t addr) { insert(addr, addr + 1); }
  bool contains(std::uint64_t addr) const;
  std::uint64_t count() const;
  bool empty() const { return ranges_.empty(); }
  const std::map<std::uint64_t, std::uint64_t> &ranges() const {
    return ranges_;
  }
  bool operator==(const AddressSet &) const = default;

 private:
  std::map<std::uint64_t, std::uint64_t> ranges_;  // begin -> end
};

struct AddressRebase {
  std::uint64_t from_base = 0;
  std::uint64_t to_base = 0x100000;
  std::uint64_t window = 0x20000000;

  bool operator==(const AddressRebase &) const = default;
};

// addr - from_base + to_base; throws AddressOutOfWindow outside
// [from_base, from_base + window).
std::uint64_t rebase_addr(std::uint64_t addr, const AddressRebase &rebase);

// Lowest DBB address aligned down to 4 KiB, mapped to the start of DRAM
// with a window covering all of DRAM.
AddressRebase default_rebase(const std::vector<DbbTransaction> &dbb,
                             const MemoryMap &map = {});

// Throws AddressOutOfWindow when the rebased window does not fit in DRAM.
void check_rebase(const AddressRebase &rebase, const MemoryMap &map);

struct BuiltImage {
  MemoryImage image;
  // Bytes whose first touch was a write: produced at run time, never
  // preloaded.
  AddressSet excluded;
};

// Per byte, the first transaction in trace order decides: a read puts its
// byte in the image, a write puts the address in `excluded`. Everything
// later at that address is ignored.
BuiltImage build_image(const std::vector<DbbTransaction> &dbb,
                       const AddressRebase &rebase, const MemoryMap &map = {});

struct BinMetadata {
  std::uint64_t base = 0;
  std::uint64_t length = 0;
  bool operator==(const BinMetadata &) const = default;
};

// Flat dump of [base, limit), gaps zero-filled.
std::vector<std::uint8_t> emit_bin(const MemoryImage &image);
BinMetadata bin_metadata(const MemoryImage &image);
std::string emit_bin_metadata(const BinMetadata &meta);
BinMetadata parse_bin_metadata(std::string_view text);
MemoryImage load_bin(std::span<const std::uint8_t> bytes,
                     const BinMetadata &meta);

// readmemh-style text: `@<word address>` at the start of each contiguous
// run of words, then one little-endian-assembled word per line as 8
// lower-case hex digits. Word address = byte address / 4. Partial words are
// zero-padded.
std::string emit_mem(const MemoryImage &image);
std::string emit_mem(std::uint64_t origin, std::span<const std::uint32_t> words);

// Word address -> word.
std::map<std::uint64_t, std::uint32_t> parse_mem(std::string_view text);
MemoryImage mem_to_image(const std::map<std::uint64_t, std::uint32_t> &words);

}  // namespace nvbm

#endif  // NVBM_IMAGE_H_
