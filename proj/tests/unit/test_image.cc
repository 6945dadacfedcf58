// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "../support/oracles.h"
#include "nvbm/errors.h"
#include "nvbm/image.h"

using namespace nvbm;
using Bytes = std::vector<std::uint8_t>;

namespace {

DbbTransaction tx(std::uint64_t seq, std::uint64_t addr, Bytes payload, bool write) {
  return {seq, addr, std::move(payload), write};
}

const AddressRebase kRebase{0xc0000000, 0x100000, 0x20000000};

}  // namespace

TEST_CASE("first occurrence: read kept, write excluded") {
  Bytes a{1, 2, 3, 4}, b{5, 6, 7, 8};
  std::vector<DbbTransaction> dbb = {tx(0, 0xc0000000, a, false), tx(1, 0xc0000010, b, true),
                                     tx(2, 0xc0000010, b, false)};
  auto built = build_image(dbb, kRebase);
  REQUIRE(built.image.spans().size() == 1);
  CHECK(built.image.spans().begin()->first == 0x100000);
  CHECK(built.image.spans().begin()->second == a);
  CHECK(built.excluded.count() == 4);
  for (std::uint64_t x = 0x100010; x < 0x100014; ++x) CHECK(built.excluded.contains(x));
  CHECK_FALSE(built.excluded.contains(0x100014));
  CHECK_FALSE(built.image.read_byte(0x100010));
}

TEST_CASE("first occurrence: duplicate read dropped") {
  Bytes a{0xaa, 0xbb, 0xcc, 0xdd}, c{0x11, 0x22, 0x33, 0x44};
  auto built = build_image({tx(0, 0xc0000040, a, false), tx(1, 0xc0000040, c, false)}, kRebase);
  CHECK(testing::image_bytes(built.image) ==
        std::map<std::uint64_t, std::uint8_t>{
            {0x100040, 0xaa}, {0x100041, 0xbb}, {0x100042, 0xcc}, {0x100043, 0xdd}});
  CHECK(built.excluded.empty());
}

TEST_CASE("first occurrence: empty trace") {
  auto built = build_image({}, kRebase);
  CHECK(built.image.empty());
  CHECK(built.excluded.empty());
  CHECK(built.image.base() == 0);
  CHECK(built.image.limit() == 0);
}

TEST_CASE("partial overlap resolves per byte") {
  Bytes w{9, 9, 9, 9}, r{1, 2, 3, 4, 5, 6, 7, 8};
  auto built = build_image({tx(0, 0xc0000004, w, true), tx(1, 0xc0000000, r, false)}, kRebase);
  CHECK(testing::image_bytes(built.image) ==
        std::map<std::uint64_t, std::uint8_t>{
            {0x100000, 1}, {0x100001, 2}, {0x100002, 3}, {0x100003, 4}});
  CHECK(testing::address_set_bytes(built.excluded) ==
        std::set<std::uint64_t>{0x100004, 0x100005, 0x100006, 0x100007});
}

TEST_CASE("rebase_addr") {
  CHECK(rebase_addr(0xc0000000, kRebase) == 0x100000);
  CHECK(rebase_addr(0xc0000020, kRebase) == 0x100020);
  CHECK_THROWS_AS(rebase_addr(0xbfffffff, kRebase), AddressOutOfWindow);
  CHECK_THROWS_AS(rebase_addr(0xc0000000 + 0x20000000, kRebase), AddressOutOfWindow);
  CHECK_THROWS_AS(build_image({tx(0, 0xbffffffc, Bytes(4), false)}, kRebase), AddressOutOfWindow);
  CHECK_THROWS_AS(build_image({tx(0, 0xdffffffc, Bytes(8), false)}, kRebase), AddressOutOfWindow);
}

TEST_CASE("property: rebase is injective and order preserving") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t a = kRebase.from_base + rng() % kRebase.window;
    std::uint64_t b = kRebase.from_base + rng() % kRebase.window;
    auto ra = rebase_addr(a, kRebase), rb = rebase_addr(b, kRebase);
    CHECK((a < b) == (ra < rb));
    CHECK((a == b) == (ra == rb));
  }
}

TEST_CASE("default rebase") {
  auto r = default_rebase({tx(0, 0xc0001234, Bytes(4), false), tx(1, 0xc0000ff8, Bytes(8), true)});
  CHECK(r.from_base == 0xc0000000);
  CHECK(r.to_base == 0x100000);
  CHECK(r.window == 0x20000000);
  CHECK_NOTHROW(check_rebase(r, MemoryMap{}));
  AddressRebase bad{0, 0x200ff000, 0x2000};
  CHECK_THROWS_AS(check_rebase(bad, MemoryMap{}), AddressOutOfWindow);
}

TEST_CASE("property: build_image matches the shadow-memory oracle") {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 300; ++round) {
    auto dbb = testing::random_dbb_trace(rng, rng() % 80, 0xc0000000, 0x200 + rng() % 0x800);
    auto built = build_image(dbb, kRebase);
    auto oracle = testing::shadow_oracle(dbb, kRebase.from_base, kRebase.to_base);
    REQUIRE(testing::image_bytes(built.image) == oracle.preload);
    REQUIRE(testing::address_set_bytes(built.excluded) == oracle.excluded);
  }
}

TEST_CASE("emit_bin examples") {
  MemoryImage one;
  one.write_byte(0x100000, 0xaa);
  CHECK(emit_bin(one) == Bytes{0xaa});
  CHECK(bin_metadata(one) == BinMetadata{0x100000, 1});
  CHECK(emit_bin_metadata(bin_metadata(one)) == "base=0x00100000\nlength=1\n");

  MemoryImage gap;
  gap.write_byte(0x100000, 0x11);
  gap.write_byte(0x100002, 0x22);
  CHECK(emit_bin(gap) == Bytes{0x11, 0x00, 0x22});

  MemoryImage empty;
  CHECK(emit_bin(empty).empty());
  CHECK(bin_metadata(empty).length == 0);
}

TEST_CASE("emit_mem examples") {
  std::vector<std::uint32_t> words{0x000032b7};
  CHECK(emit_mem(0, words) == "@00000000\n000032b7\n");
  CHECK(emit_mem(MemoryImage{}).empty());
  CHECK(emit_mem(0, std::vector<std::uint32_t>{}).empty());
  MemoryImage img;
  Bytes b{0x88, 0x77, 0x66, 0x55};
  img.write(0x100000, b);
  CHECK(emit_mem(img) == "@00040000\n55667788\n");
}

TEST_CASE("emit_mem pads partial words and restarts at gaps") {
  MemoryImage img;
  img.write_byte(0x101, 0xab);
  img.write_byte(0x10c, 0x01);
  CHECK(emit_mem(img) == "@00000040\n0000ab00\n@00000043\n00000001\n");
}

TEST_CASE("memory image coalesces spans") {
  MemoryImage img;
  img.write(0x10, Bytes{1, 2});
  img.write(0x14, Bytes{5});
  img.write(0x12, Bytes{3, 4});
  CHECK(img.spans().size() == 1);
  CHECK(img.spans().at(0x10) == Bytes{1, 2, 3, 4, 5});
  img.write(0x0f, Bytes{0, 9, 9, 9, 9, 9, 9, 9});
  CHECK(img.spans().size() == 1);
  CHECK(img.base() == 0x0f);
  CHECK(img.limit() == 0x17);
  CHECK(img.populated_bytes() == 8);
}

TEST_CASE("property: memory image agrees with a byte map") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 200; ++round) {
    MemoryImage img;
    std::map<std::uint64_t, std::uint8_t> ref;
    for (int k = 0; k < 40; ++k) {
      std::uint64_t at = rng() % 256;
      Bytes b(1 + rng() % 16);
      for (auto &x : b) x = static_cast<std::uint8_t>(rng());
      img.write(at, b);
      for (std::size_t i = 0; i < b.size(); ++i) ref[at + i] = b[i];
    }
    REQUIRE(testing::image_bytes(img) == ref);
    std::uint64_t prev_end = 0;
    bool first = true;
    for (const auto &[addr, bytes] : img.spans()) {
      CHECK(!bytes.empty());
      if (!first) CHECK(addr > prev_end);  // disjoint and never touching
      prev_end = addr + bytes.size();
      first = false;
    }
  }
}

TEST_CASE("property: bin and mem serialization round trip") {
  std::mt19937_64 rng(9);
  for (int round = 0; round < 200; ++round) {
    auto dbb = testing::random_dbb_trace(rng, 1 + rng() % 40, 0xc0000000, 0x400);
    auto img = build_image(dbb, kRebase).image;
    auto meta = parse_bin_metadata(emit_bin_metadata(bin_metadata(img)));
    auto back = load_bin(emit_bin(img), meta);
    auto from_mem = mem_to_image(parse_mem(emit_mem(img)));
    for (std::uint64_t a = img.base(); a < img.limit(); ++a) {
      auto want = img.read_byte(a).value_or(0);
      CHECK(back.read_byte(a).value_or(0xff) == want);
      CHECK(from_mem.read_byte(a).value_or(0) == want);  // absent words are zero DRAM
    }
  }
}

TEST_CASE("serialization errors") {
  CHECK_THROWS_AS(parse_mem("@0\n00000001\n@0\n00000002\n"), MemFormatError);
  CHECK_THROWS_AS(parse_mem("xyz\n"), MemFormatError);
  CHECK_THROWS_AS(parse_bin_metadata("base=0x10\n"), MemFormatError);
  CHECK_THROWS_AS(load_bin(Bytes{1, 2}, BinMetadata{0x0, 3}), MemFormatError);
  auto words = parse_mem("// header\n@00000010\n000032b7 # lui\n0062a023\n");
  CHECK(words == std::map<std::uint64_t, std::uint32_t>{{0x10, 0x000032b7}, {0x11, 0x0062a023}});
}
