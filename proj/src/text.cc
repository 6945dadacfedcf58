// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/text.h"

#include <charconv>

namespace nvbm {

std::string hex_digits(std::uint64_t value, int digits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(digits), '0');
  for (int i = digits - 1; i >= 0 && value; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string hex32(std::uint32_t value) { return "0x" + hex_digits(value, 8); }

std::string hex_addr(std::uint64_t value) {
  return "0x" + hex_digits(value, value > 0xffffffffu ? 16 : 8);
}

namespace {

std::optional<std::uint64_t> parse_base(std::string_view text, int base) {
  if (text.empty()) return std::nullopt;
  std::uint64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (ec != std::errc() || ptr != text.data() + text.size())
    return std::nullopt;
  return value;
}

bool has_hex_prefix(std::string_view text) {
  return text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
}

}  // namespace

std::optional<std::uint64_t> parse_hex(std::string_view text) {
  if (!has_hex_prefix(text)) return std::nullopt;
  return parse_base(text.substr(2), 16);
}

std::optional<std::uint64_t> parse_dec(std::string_view text) {
  return parse_base(text, 10);
}

std::optional<std::uint64_t> parse_uint(std::string_view text) {
  return has_hex_prefix(text) ? parse_hex(text) : parse_dec(text);
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }
  auto magnitude = parse_uint(text);
  if (!magnitude || *magnitude > (std::uint64_t{1} << 62)) return std::nullopt;
  auto value = static_cast<std::int64_t>(*magnitude);
  return negative ? -value : value;
}

std::string_view trim(std::string_view text) {
  constexpr std::string_view kSpace = " \t\r\n\v\f";
  auto first = text.find_first_not_of(kSpace);
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(kSpace);
  return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view text) {
  constexpr std::string_view kSpace = " \t\r\n\v\f";
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto start = text.find_first_not_of(kSpace, pos);
    if (start == std::string_view::npos) break;
    auto end = text.find_first_of(kSpace, start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    pos = end;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t bol = 0;
  while (bol < text.size()) {
    auto eol = text.find('\n', bol);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(bol, eol - bol);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    bol = eol + 1;
  }
  return lines;
}

}  // namespace nvbm
