// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Small text helpers shared by the line-oriented formats.

#ifndef NVBM_TEXT_H_
#define NVBM_TEXT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvbm {

// "0x" followed by exactly `digits` lower-case hex digits.
std::string hex32(std::uint32_t value);
std::string hex_digits(std::uint64_t value, int digits);
// "0x" + 8 digits, widened to 16 when the value needs more than 32 bits.
std::string hex_addr(std::uint64_t value);

// Accepts "0x"/"0X"-prefixed hex or plain decimal. Rejects signs, empty
// strings and values that overflow 64 bits.
std::optional<std::uint64_t> parse_uint(std::string_view text);
std::optional<std::uint64_t> parse_hex(std::string_view text);  // 0x required
std::optional<std::uint64_t> parse_dec(std::string_view text);
// Signed variant used by the assembler: optional leading '-' or '+'.
std::optional<std::int64_t> parse_int(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split_ws(std::string_view text);

// Splits on '\n' and strips one trailing '\r' from every line. A trailing
// newline does not produce an extra empty line.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace nvbm

#endif  // NVBM_TEXT_H_
