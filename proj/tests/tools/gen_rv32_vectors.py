#!/usr/bin/env python3
# Copyright nvbm contributors.
# Licensed under the Apache License, Version 2.0, see LICENSE for details.
# SPDX-License-Identifier: Apache-2.0
"""Reference RV32I encodings from clang's integrated assembler.

Writes `<word> <canonical assembly>` lines. The C++ tests check the nvbm
encoder and disassembler against this file. With --check the vectors are
regenerated and compared to the committed file instead (exit 77 when clang
cannot target riscv32, which ctest reports as skipped).
"""

import argparse
import os
import random
import shutil
import struct
import subprocess
import sys
import tempfile


def imm_hex(v):
    return ("-0x%x" % -v) if v < 0 else ("0x%x" % v)


def gen(rng):
    r = lambda: rng.randrange(32)
    imm12 = lambda: rng.choice([-2048, -1, 0, 1, 2047, rng.randrange(-2048, 2048)])
    b_off = lambda: rng.choice([-4096, -2, 0, 2, 4094, rng.randrange(-2048, 2047) * 2])
    j_off = lambda: rng.choice([-(1 << 20), 0, (1 << 20) - 2, rng.randrange(-(1 << 19), 1 << 19) * 2])
    u20 = lambda: rng.choice([0, 1, 0x7ffff, 0x80000, 0xfffff, rng.randrange(1 << 20)])
    op = rng.choice(["lui", "auipc", "addi", "andi", "and", "lw", "sw", "beq", "bne", "jal", "jalr", "ebreak"])
    if op in ("lui", "auipc"):
        return "%s x%d, %s" % (op, r(), imm_hex(u20()))
    if op in ("addi", "andi"):
        return "%s x%d, x%d, %s" % (op, r(), r(), imm_hex(imm12()))
    if op == "and":
        return "and x%d, x%d, x%d" % (r(), r(), r())
    if op in ("lw", "jalr"):
        return "%s x%d, %d(x%d)" % (op, r(), imm12(), r())
    if op == "sw":
        return "sw x%d, %d(x%d)" % (r(), imm12(), r())
    if op in ("beq", "bne"):
        return "%s x%d, x%d, %d" % (op, r(), r(), b_off())
    if op == "jal":
        return "jal x%d, %d" % (r(), j_off())
    return "ebreak"


FIXED = ["lui x5, 0x3", "sw x6, 0(x5)", "lw x6, 0(x5)", "jal x0, 0",
         "addi x5, x5, 0x4", "and x6, x6, x7", "bne x6, x28, -8"]


def text_words(obj):
    d = open(obj, "rb").read()
    shoff, = struct.unpack_from("<I", d, 0x20)
    shentsize, shnum, shstrndx = struct.unpack_from("<HHH", d, 0x2E)
    secs = [struct.unpack_from("<IIIIIIIIII", d, shoff + i * shentsize) for i in range(shnum)]
    stroff = secs[shstrndx][4]
    for s in secs:
        if d[stroff + s[0]:].split(b"\0")[0] == b".text":
            t = d[s[4]:s[4] + s[5]]
            return list(struct.unpack("<%dI" % (len(t) // 4), t))
    raise RuntimeError("no .text section")


def build(count, seed, clang):
    rng = random.Random(seed)
    lines = FIXED + [gen(rng) for _ in range(count)]
    with tempfile.TemporaryDirectory() as tmp:
        src, obj = os.path.join(tmp, "v.s"), os.path.join(tmp, "v.o")
        with open(src, "w") as f:
            f.write(".option norelax\n.option norvc\n" + "\n".join(lines) + "\n")
        subprocess.run([clang, "--target=riscv32", "-march=rv32i", "-c", src, "-o", obj],
                       check=True, capture_output=True)
        words = text_words(obj)
    assert len(words) == len(lines)
    return "".join("%08x %s\n" % (w, l) for w, l in zip(words, lines))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("output")
    ap.add_argument("--count", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=20261016)
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    clang = shutil.which("clang")
    if not clang:
        print("clang not found")
        return 77
    try:
        text = build(args.count, args.seed, clang)
    except subprocess.CalledProcessError as e:
        print("clang cannot assemble riscv32:", e.stderr.decode()[:200])
        return 77
    if args.check:
        ok = open(args.output).read() == text
        print("reference vectors match" if ok else "reference vectors differ")
        return 0 if ok else 1
    open(args.output, "w").write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
