// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/trace.h"

#include <algorithm>
#include <map>
#include <random>

#include "nvbm/errors.h"
#include "nvbm/log.h"
#include "nvbm/text.h"

namespace nvbm {

namespace {

struct Fields {
  std::optional<std::string_view> iswrite, addr, data, len;
};

// Tokens after the keyword. A ':' directly after the keyword is optional.
Fields tokenize(std::string_view line, std::size_t keyword_pos,
                std::size_t keyword_len) {
  auto rest = line.substr(keyword_pos + keyword_len);
  if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
  Fields f;
  for (auto tok : split_ws(rest)) {
    auto eq = tok.find('=');
    if (eq == std::string_view::npos) continue;
    auto key = tok.substr(0, eq);
    auto value = tok.substr(eq + 1);
    if (key == "iswrite") f.iswrite = value;
    else if (key == "addr") f.addr = value;
    else if (key == "data") f.data = value;
    else if (key == "len") f.len = value;
  }
  return f;
}

bool parse_iswrite(std::optional<std::string_view> v, bool &out) {
  if (!v || (*v != "0" && *v != "1")) return false;
  out = *v == "1";
  return true;
}

[[noreturn]] void malformed(std::string_view line, const std::string &why) {
  throw MalformedTransactionLine(why + ": `" + std::string(line) + "'");
}

// Hex digits (no prefix) to little-endian bytes, most significant digit
// first in the text.
std::vector<std::uint8_t> hex_to_le_bytes(std::string_view digits) {
  std::vector<std::uint8_t> out;
  out.reserve(digits.size() / 2 + 1);
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (std::size_t end = digits.size(); end > 0;) {
    std::size_t start = end >= 2 ? end - 2 : 0;
    int value = 0;
    for (std::size_t i = start; i < end; ++i) {
      int n = nibble(digits[i]);
      if (n < 0) return {};
      value = value * 16 + n;
    }
    out.push_back(static_cast<std::uint8_t>(value));
    end = start;
  }
  return out;
}

}  // namespace

std::optional<CsbTransaction> parse_csb_line(std::string_view line) {
  auto pos = line.find(kCsbKeyword);
  if (pos == std::string_view::npos) return std::nullopt;
  auto f = tokenize(line, pos, kCsbKeyword.size());

  CsbTransaction t;
  if (!parse_iswrite(f.iswrite, t.is_write))
    malformed(line, "missing or invalid iswrite");
  auto addr = f.addr ? parse_hex(*f.addr) : std::nullopt;
  if (!addr || *addr > 0xffffffffu) malformed(line, "missing or invalid addr");
  auto data = f.data ? parse_hex(*f.data) : std::nullopt;
  if (!data || *data > 0xffffffffu) malformed(line, "missing or invalid data");
  t.addr = static_cast<std::uint32_t>(*addr);
  t.data = static_cast<std::uint32_t>(*data);
  return t;
}

std::optional<DbbTransaction> parse_dbb_line(std::string_view line) {
  auto pos = line.find(kDbbKeyword);
  if (pos == std::string_view::npos) return std::nullopt;
  auto f = tokenize(line, pos, kDbbKeyword.size());

  DbbTransaction t;
  if (!parse_iswrite(f.iswrite, t.is_write))
    malformed(line, "missing or invalid iswrite");
  auto addr = f.addr ? parse_hex(*f.addr) : std::nullopt;
  if (!addr) malformed(line, "missing or invalid addr");
  t.addr = *addr;

  if (!f.data || f.data->size() <= 2 || (*f.data)[0] != '0' ||
      ((*f.data)[1] != 'x' && (*f.data)[1] != 'X'))
    malformed(line, "missing or invalid data");
  auto digits = f.data->substr(2);
  auto bytes = hex_to_le_bytes(digits);
  if (bytes.empty()) malformed(line, "invalid data hex");

  std::size_t len = (digits.size() + 1) / 2;
  if (f.len) {
    auto parsed = parse_dec(*f.len);
    if (!parsed) malformed(line, "invalid len");
    len = static_cast<std::size_t>(*parsed);
  }
  if (len == 0 || len % 4 != 0)
    throw PayloadLengthError("payload length " + std::to_string(len) +
                             " is not a positive multiple of 4: `" +
                             std::string(line) + "'");
  // Significant bytes beyond `len` would be silently truncated.
  for (std::size_t i = len; i < bytes.size(); ++i)
    if (bytes[i] != 0) malformed(line, "data wider than len");
  bytes.resize(len, 0);
  if (t.addr + len < t.addr) malformed(line, "address range wraps");
  t.payload = std::move(bytes);
  return t;
}

TraceBundle parse_log(std::string_view text, const ParseOptions &options) {
  TraceBundle bundle;
  bundle.source = options.source;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = lines[i];
    bool has_csb = line.find(kCsbKeyword) != std::string_view::npos;
    bool has_dbb = line.find(kDbbKeyword) != std::string_view::npos;
    if (has_csb == has_dbb) {
      if (has_csb) log::debug("ignoring line with both keywords");
      continue;
    }
    try {
      if (has_csb) {
        auto t = *parse_csb_line(line);
        t.seq = bundle.csb.size();
        bundle.csb.push_back(t);
      } else {
        auto t = *parse_dbb_line(line);
        t.seq = bundle.dbb.size();
        bundle.dbb.push_back(std::move(t));
      }
    } catch (const MalformedTransactionLine &e) {
      if (!options.lenient) throw MalformedTransactionLine(e.what(), i + 1);
      std::string msg = "line " + std::to_string(i + 1) + ": skipped: " + e.what();
      log::warn(msg);
      if (options.warnings) options.warnings->push_back(msg);
    } catch (const PayloadLengthError &e) {
      if (!options.lenient) throw PayloadLengthError(e.what(), i + 1);
      std::string msg = "line " + std::to_string(i + 1) + ": skipped: " + e.what();
      log::warn(msg);
      if (options.warnings) options.warnings->push_back(msg);
    }
  }
  return bundle;
}

std::string format_csb_line(const CsbTransaction &t) {
  return std::string(kCsbKeyword) + ": iswrite=" + (t.is_write ? "1" : "0") +
         " addr=" + hex32(t.addr) + " data=" + hex32(t.data);
}

std::string format_dbb_line(const DbbTransaction &t) {
  std::string data;
  data.reserve(t.payload.size() * 2);
  for (auto it = t.payload.rbegin(); it != t.payload.rend(); ++it)
    data += hex_digits(*it, 2);
  return std::string(kDbbKeyword) + ": iswrite=" + (t.is_write ? "1" : "0") +
         " addr=" + hex_addr(t.addr) + " data=0x" + data +
         " len=" + std::to_string(t.payload.size());
}

namespace {

// Bounded draws built directly on the engine output: the standard
// distributions are not specified bit-for-bit across library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  // Uniform-ish in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  std::uint8_t byte() { return static_cast<std::uint8_t>(engine_() >> 56); }

 private:
  std::mt19937_64 engine_;
};

constexpr std::string_view kChatter[] = {
    "[VP] qemu: cpu0 idle",
    "nvdla.cdma: status poll",
    "SystemC: simulation time advanced",
    "info: loadable submitted to runtime",
    "nvdla.sdp: surface done",
    "",
};

}  // namespace

SyntheticTrace gen_synthetic_trace(const SyntheticSpec &spec) {
  Rng rng(spec.seed);

  enum class Item : std::uint8_t { kCsbWrite, kCsbRead, kDbbRead, kDbbWrite, kNoise };
  std::vector<Item> items;
  items.insert(items.end(), spec.csb_writes, Item::kCsbWrite);
  items.insert(items.end(), spec.csb_reads, Item::kCsbRead);
  items.insert(items.end(), spec.dbb_reads, Item::kDbbRead);
  items.insert(items.end(), spec.dbb_writes, Item::kDbbWrite);
  items.insert(items.end(), spec.noise_lines, Item::kNoise);
  for (std::size_t i = items.size(); i > 1; --i)
    std::swap(items[i - 1], items[rng.below(i)]);

  SyntheticTrace out;
  std::map<std::uint64_t, std::uint8_t> shadow;
  const std::uint64_t csb_words =
      spec.csb_addr_hi >= spec.csb_addr_lo
          ? (spec.csb_addr_hi - spec.csb_addr_lo) / 4 + 1
          : 1;
  const std::uint64_t dbb_slots = std::max<std::uint64_t>(spec.dbb_span / 8, 1);
  const std::size_t max_beats = std::max<std::size_t>(spec.dbb_max_beats, 1);

  for (Item item : items) {
    switch (item) {
      case Item::kCsbWrite:
      case Item::kCsbRead: {
        CsbTransaction t;
        t.seq = out.bundle.csb.size();
        t.is_write = item == Item::kCsbWrite;
        t.addr = static_cast<std::uint32_t>((spec.csb_addr_lo & ~3u) +
                                            4 * rng.below(csb_words));
        t.data = static_cast<std::uint32_t>(rng.next());
        out.text += format_csb_line(t);
        out.bundle.csb.push_back(t);
        break;
      }
      case Item::kDbbRead:
      case Item::kDbbWrite: {
        DbbTransaction t;
        t.seq = out.bundle.dbb.size();
        t.is_write = item == Item::kDbbWrite;
        std::uint64_t beats =
            std::min<std::uint64_t>(1 + rng.below(max_beats), dbb_slots);
        t.addr = (spec.dbb_base & ~std::uint64_t{7}) +
                 8 * rng.below(dbb_slots - beats + 1);
        t.payload.resize(beats * 8);
        for (std::size_t i = 0; i < t.payload.size(); ++i) {
          std::uint64_t a = t.addr + i;
          if (t.is_write) {
            t.payload[i] = rng.byte();
            shadow[a] = t.payload[i];
          } else {
            auto [it, inserted] = shadow.try_emplace(a, 0);
            if (inserted) it->second = rng.byte();
            t.payload[i] = it->second;
          }
        }
        out.text += format_dbb_line(t);
        out.bundle.dbb.push_back(std::move(t));
        break;
      }
      case Item::kNoise:
        out.text += kChatter[rng.below(std::size(kChatter))];
        break;
    }
    out.text += '\n';
  }
  return out;
}

}  // namespace nvbm
