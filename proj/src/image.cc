// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/image.h"

#include <algorithm>
#include <bitset>
#include <unordered_map>

#include "nvbm/errors.h"
#include "nvbm/text.h"

namespace nvbm {

void MemoryImage::write(std::uint64_t addr, std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return;
  const std::uint64_t end = addr + bytes.size();

  // First span that could overlap or touch [addr, end].
  auto first = spans_.upper_bound(addr);
  if (first != spans_.begin()) {
    auto prev = std::prev(first);
    if (prev->first + prev->second.size() >= addr) first = prev;
  }
  auto last = first;
  while (last != spans_.end() && last->first <= end) ++last;

  if (first == last) {
    spans_.emplace(addr, std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
    return;
  }

  // Extend the first span in place and fold the rest into it.
  const std::uint64_t start = std::min(first->first, addr);
  if (start < first->first) {
    // New bytes begin before the first span: rebuild it with a new key.
    std::vector<std::uint8_t> merged(first->first - start, 0);
    merged.insert(merged.end(), first->second.begin(), first->second.end());
    first = spans_.erase(first);
    first = spans_.emplace_hint(first, start, std::move(merged));
  }
  auto &dst = first->second;
  for (auto it = std::next(first); it != last; ++it) {
    std::uint64_t off = it->first - start;
    if (dst.size() < off + it->second.size()) dst.resize(off + it->second.size());
    std::copy(it->second.begin(), it->second.end(), dst.begin() + off);
  }
  spans_.erase(std::next(first), last);
  std::uint64_t off = addr - start;
  if (dst.size() < off + bytes.size()) dst.resize(off + bytes.size());
  std::copy(bytes.begin(), bytes.end(), dst.begin() + off);
}

std::optional<std::uint8_t> MemoryImage::read_byte(std::uint64_t addr) const {
  auto it = spans_.upper_bound(addr);
  if (it == spans_.begin()) return std::nullopt;
  --it;
  if (addr - it->first >= it->second.size()) return std::nullopt;
  return it->second[addr - it->first];
}

std::uint64_t MemoryImage::base() const {
  return spans_.empty() ? 0 : spans_.begin()->first;
}

std::uint64_t MemoryImage::limit() const {
  if (spans_.empty()) return 0;
  const auto &last = *spans_.rbegin();
  return last.first + last.second.size();
}

std::uint64_t MemoryImage::populated_bytes() const {
  std::uint64_t total = 0;
  for (const auto &[addr, bytes] : spans_) total += bytes.size();
  return total;
}

void AddressSet::insert(std::uint64_t begin, std::uint64_t end) {
  if (begin >= end) return;
  auto it = ranges_.upper_bound(begin);
  if (it != ranges_.begin()) {
    auto prev = std::prev(it);
    if (prev->second >= begin) {
      begin = prev->first;
      end = std::max(end, prev->second);
      it = ranges_.erase(prev);
    }
  }
  while (it != ranges_.end() && it->first <= end) {
    end = std::max(end, it->second);
    it = ranges_.erase(it);
  }
  ranges_.emplace_hint(it, begin, end);
}

bool AddressSet::contains(std::uint64_t addr) const {
  auto it = ranges_.upper_bound(addr);
  if (it == ranges_.begin()) return false;
  return addr < std::prev(it)->second;
}

std::uint64_t AddressSet::count() const {
  std::uint64_t total = 0;
  for (auto [b, e] : ranges_) total += e - b;
  return total;
}

std::uint64_t rebase_addr(std::uint64_t addr, const AddressRebase &rebase) {
  if (addr < rebase.from_base || addr - rebase.from_base >= rebase.window)
    throw AddressOutOfWindow("address " + hex_addr(addr) +
                             " outside rebase window [" +
                             hex_addr(rebase.from_base) + ", +" +
                             hex_addr(rebase.window) + ")");
  return addr - rebase.from_base + rebase.to_base;
}

AddressRebase default_rebase(const std::vector<DbbTransaction> &dbb,
                             const MemoryMap &map) {
  AddressRebase r;
  r.to_base = map.dram_start;
  r.window = map.dram_size();
  if (!dbb.empty()) {
    std::uint64_t lowest = dbb.front().addr;
    for (const auto &t : dbb) lowest = std::min(lowest, t.addr);
    r.from_base = lowest & ~std::uint64_t{0xfff};
  }
  return r;
}

void check_rebase(const AddressRebase &rebase, const MemoryMap &map) {
  if (!map.dram_contains(rebase.to_base, rebase.window))
    throw AddressOutOfWindow("rebase target [" + hex_addr(rebase.to_base) +
                             ", +" + hex_addr(rebase.window) +
                             ") does not fit in DRAM");
}

namespace {

// First-touch bookkeeping, one bit per byte address.
class TouchMap {
 public:
  // Returns true when the byte had not been touched before.
  bool touch(std::uint64_t addr) {
    auto &page = pages_[addr >> kPageBits];
    auto bit = addr & (kPageSize - 1);
    if (page.test(bit)) return false;
    page.set(bit);
    return true;
  }

 private:
  static constexpr unsigned kPageBits = 12;
  static constexpr std::uint64_t kPageSize = std::uint64_t{1} << kPageBits;
  std::unordered_map<std::uint64_t, std::bitset<kPageSize>> pages_;
};

}  // namespace

BuiltImage build_image(const std::vector<DbbTransaction> &dbb,
                       const AddressRebase &rebase, const MemoryMap &map) {
  check_rebase(rebase, map);
  BuiltImage out;
  TouchMap touched;
  std::vector<std::uint8_t> run;
  for (const auto &t : dbb) {
    if (t.payload.empty()) continue;
    const std::uint64_t base = rebase_addr(t.addr, rebase);
    rebase_addr(t.end() - 1, rebase);

    // Emit maximal runs of first-touched bytes.
    std::uint64_t run_start = 0;
    run.clear();
    auto flush = [&]() {
      if (run.empty()) return;
      if (t.is_write)
        out.excluded.insert(run_start, run_start + run.size());
      else
        out.image.write(run_start, run);
      run.clear();
    };
    for (std::size_t i = 0; i < t.payload.size(); ++i) {
      const std::uint64_t addr = base + i;
      if (touched.touch(addr)) {
        if (run.empty()) run_start = addr;
        run.push_back(t.payload[i]);
      } else {
        flush();
      }
    }
    flush();
  }
  return out;
}

std::vector<std::uint8_t> emit_bin(const MemoryImage &image) {
  std::vector<std::uint8_t> out(image.limit() - image.base(), 0);
  for (const auto &[addr, bytes] : image.spans())
    std::copy(bytes.begin(), bytes.end(), out.begin() + (addr - image.base()));
  return out;
}

BinMetadata bin_metadata(const MemoryImage &image) {
  return {image.base(), image.limit() - image.base()};
}

std::string emit_bin_metadata(const BinMetadata &meta) {
  return "base=" + hex_addr(meta.base) + "\nlength=" +
         std::to_string(meta.length) + "\n";
}

BinMetadata parse_bin_metadata(std::string_view text) {
  BinMetadata meta;
  bool have_base = false, have_length = false;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw MemFormatError("expected key=value in bin metadata", i + 1);
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key == "base") {
      auto v = parse_hex(value);
      if (!v) throw MemFormatError("invalid base", i + 1);
      meta.base = *v;
      have_base = true;
    } else if (key == "length") {
      auto v = parse_dec(value);
      if (!v) throw MemFormatError("invalid length", i + 1);
      meta.length = *v;
      have_length = true;
    } else {
      throw MemFormatError("unknown key `" + std::string(key) + "'", i + 1);
    }
  }
  if (!have_base || !have_length)
    throw MemFormatError("bin metadata needs base and length");
  return meta;
}

MemoryImage load_bin(std::span<const std::uint8_t> bytes,
                     const BinMetadata &meta) {
  if (bytes.size() != meta.length)
    throw MemFormatError("bin size " + std::to_string(bytes.size()) +
                         " does not match metadata length " +
                         std::to_string(meta.length));
  MemoryImage image;
  image.write(meta.base, bytes);
  return image;
}

namespace {

std::string format_mem(const std::map<std::uint64_t, std::uint32_t> &words) {
  std::string out;
  bool first = true;
  std::uint64_t next = 0;
  for (auto [waddr, word] : words) {
    if (first || waddr != next) {
      out += '@';
      out += hex_digits(waddr, waddr > 0xffffffffu ? 16 : 8);
      out += '\n';
    }
    out += hex_digits(word, 8);
    out += '\n';
    next = waddr + 1;
    first = false;
  }
  return out;
}

}  // namespace

std::string emit_mem(const MemoryImage &image) {
  std::map<std::uint64_t, std::uint32_t> words;
  for (const auto &[addr, bytes] : image.spans()) {
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      std::uint64_t a = addr + i;
      words[a / 4] |= std::uint32_t{bytes[i]} << (8 * (a % 4));
    }
  }
  return format_mem(words);
}

std::string emit_mem(std::uint64_t origin, std::span<const std::uint32_t> words) {
  std::string out;
  if (words.empty()) return out;
  out += '@';
  out += hex_digits(origin / 4, origin / 4 > 0xffffffffu ? 16 : 8);
  out += '\n';
  for (auto w : words) {
    out += hex_digits(w, 8);
    out += '\n';
  }
  return out;
}

std::map<std::uint64_t, std::uint32_t> parse_mem(std::string_view text) {
  std::map<std::uint64_t, std::uint32_t> words;
  std::uint64_t cursor = 0;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    for (std::string_view marker : {"//", "#"})
      if (auto c = line.find(marker); c != std::string_view::npos)
        line = trim(line.substr(0, c));
    if (line.empty()) continue;
    for (auto tok : split_ws(line)) {
      if (tok.front() == '@') {
        auto v = parse_hex("0x" + std::string(tok.substr(1)));
        if (!v) throw MemFormatError("invalid address directive", i + 1);
        cursor = *v;
        continue;
      }
      auto v = parse_hex("0x" + std::string(tok));
      if (!v || tok.size() > 8) throw MemFormatError("invalid word", i + 1);
      if (!words.emplace(cursor, static_cast<std::uint32_t>(*v)).second)
        throw MemFormatError("word address defined twice", i + 1);
      ++cursor;
    }
  }
  return words;
}

MemoryImage mem_to_image(const std::map<std::uint64_t, std::uint32_t> &words) {
  MemoryImage image;
  for (auto [waddr, word] : words) {
    const std::uint8_t bytes[4] = {
        static_cast<std::uint8_t>(word), static_cast<std::uint8_t>(word >> 8),
        static_cast<std::uint8_t>(word >> 16),
        static_cast<std::uint8_t>(word >> 24)};
    image.write(waddr * 4, bytes);
  }
  return image;
}

}  // namespace nvbm
