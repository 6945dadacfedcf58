// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Drives the nvbm executable the way a user would.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string err;
  std::string out;
};

fs::path work_dir(const std::string &name) {
  auto d = fs::path(NVBM_TEST_WORK_DIR) / "cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void put(const fs::path &p, const std::string &s) { std::ofstream(p, std::ios::binary) << s; }

Outcome nvbm(const fs::path &dir, const std::string &args, const std::string &env = "") {
  auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  std::string cmd = "cd '" + dir.string() + "' && " + env + " '" NVBM_CLI_PATH "' " + args + " >'" +
                    out.string() + "' 2>'" + err.string() + "'";
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(err), slurp(out)};
}

std::size_t lines(const std::string &s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("run on a small synthetic trace") {
  auto d = work_dir("run");
  REQUIRE(nvbm(d, "gen-trace --csb-writes 3 --csb-reads 1 --seed 42 -o t.log").code == 0);
  auto r = nvbm(d, "run t.log -o out");
  CHECK(r.code == 0);
  CHECK(lines(slurp(d / "out/config.cfg")) == 4);
  auto result = slurp(d / "out/result.txt");
  CHECK(result.find("status = success\n") != std::string::npos);
  CHECK(result.find("observed_writes = 3\n") != std::string::npos);
  for (auto f : {"weights.bin", "weights.bin.meta", "weights.mem", "program.s", "program.mem",
                 "program.bin", "report.txt"})
    CHECK(fs::exists(d / "out" / f));
}

TEST_CASE("empty log succeeds with an epilogue-only program") {
  auto d = work_dir("empty");
  put(d / "e.log", "");
  CHECK(nvbm(d, "run e.log -o out").code == 0);
  CHECK(lines(slurp(d / "out/program.mem")) == 7);  // @ directive + 6 words
  CHECK(slurp(d / "out/result.txt").find("observed_writes = 0\n") != std::string::npos);
}

TEST_CASE("malformed line fails in stage parse") {
  auto d = work_dir("malformed");
  put(d / "bad.log", "nvdla.csb_adaptor: iswrite=1 addr=0x4 data=0x1\nnvdla.csb_adaptor: bogus\n");
  auto r = nvbm(d, "run bad.log -o out");
  CHECK(r.code == 1);
  CHECK(r.err.find("stage parse") != std::string::npos);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK(nvbm(d, "run bad.log -o out --lenient").code == 0);
}

TEST_CASE("usage errors") {
  auto d = work_dir("usage");
  put(d / "p.s", "jal x0, 0\n");
  REQUIRE(nvbm(d, "assemble p.s -o p.mem").code == 0);
  auto r = nvbm(d, "simulate --program p.mem --watchdog 0");
  CHECK(r.code == 2);
  CHECK(r.err.find("watchdog") != std::string::npos);
  CHECK(nvbm(d, "run missing.log -o out").code == 2);
  CHECK(nvbm(d, "").code == 2);
  CHECK(nvbm(d, "run x.log -o out --poll sometimes").code == 2);
}

TEST_CASE("stages chain to the same artifacts as run") {
  auto d = work_dir("chain");
  REQUIRE(nvbm(d, "gen-trace --csb-writes 20 --csb-reads 4 --dbb-reads 12 --dbb-writes 5 "
                  "--noise 6 --seed 9 -o t.log").code == 0);
  REQUIRE(nvbm(d, "run t.log -o out").code == 0);
  REQUIRE(nvbm(d, "gen-config t.log -o c.cfg").code == 0);
  REQUIRE(nvbm(d, "gen-weights t.log --bin w.bin --mem w.mem").code == 0);
  REQUIRE(nvbm(d, "gen-asm c.cfg -o p.s").code == 0);
  REQUIRE(nvbm(d, "assemble p.s -o p.mem --bin p.bin").code == 0);
  CHECK(lines(slurp(d / "c.cfg")) == 24);
  CHECK(slurp(d / "c.cfg") == slurp(d / "out/config.cfg"));
  CHECK(slurp(d / "w.bin") == slurp(d / "out/weights.bin"));
  CHECK(slurp(d / "w.bin.meta") == slurp(d / "out/weights.bin.meta"));
  CHECK(slurp(d / "w.mem") == slurp(d / "out/weights.mem"));
  CHECK(slurp(d / "p.s") == slurp(d / "out/program.s"));
  CHECK(slurp(d / "p.mem") == slurp(d / "out/program.mem"));
  CHECK(slurp(d / "p.bin") == slurp(d / "out/program.bin"));

  auto sim = nvbm(d, "simulate --program p.mem --image w.bin --config c.cfg --log t.log -o r.txt");
  CHECK(sim.code == 0);
  CHECK(slurp(d / "r.txt") == slurp(d / "out/result.txt"));

  REQUIRE(nvbm(d, "disassemble p.mem -o round.s").code == 0);
  REQUIRE(nvbm(d, "assemble round.s -o round.mem").code == 0);
  CHECK(slurp(d / "round.mem") == slurp(d / "p.mem"));
}

TEST_CASE("simulate reports delayed polls and watchdog expiry") {
  auto d = work_dir("simulate");
  put(d / "c.cfg", "write_reg 0x00003004 0x00000001\nread_reg 0x0000000c 0x00000001 0xffffffff poll\n");
  REQUIRE(nvbm(d, "gen-asm c.cfg -o p.s").code == 0);
  REQUIRE(nvbm(d, "assemble p.s -o p.mem").code == 0);
  CHECK(nvbm(d, "simulate --program p.mem --config c.cfg --delay 100").code == 0);
  auto r = nvbm(d, "simulate --program p.mem --config c.cfg --delay 100 --watchdog 50");
  CHECK(r.code == 1);
  CHECK(r.out.find("status = watchdog_expired\n") != std::string::npos);
  CHECK(r.err.find("stage simulate") != std::string::npos);
}

TEST_CASE("report echoes model metadata") {
  auto d = work_dir("report");
  REQUIRE(nvbm(d, "gen-trace --csb-writes 10 --csb-reads 2 --dbb-reads 8 --seed 5 -o t.log").code == 0);
  put(d / "lenet5.meta", "model = lenet5\nmodel_size = 1.7 MB\n");
  auto r = nvbm(d, "report t.log --meta lenet5.meta");
  CHECK(r.code == 0);
  CHECK(r.out.find("csb_writes = 10\n") != std::string::npos);
  CHECK(r.out.find("csb_reads = 2\n") != std::string::npos);
  CHECK(r.out.find("dbb_reads = 8\n") != std::string::npos);
  CHECK(r.out.find("meta.model_size = 1.7 MB\n") != std::string::npos);
  auto sim = nvbm(d, "report t.log --simulate");
  CHECK(sim.code == 0);
  CHECK(sim.out.find("program_instructions = ") != std::string::npos);

  put(d / "e.log", "");
  auto empty = nvbm(d, "report e.log");
  CHECK(empty.code == 0);
  CHECK(empty.out.find("csb_writes = 0\n") != std::string::npos);
}

TEST_CASE("map file and poll flags") {
  auto d = work_dir("map");
  put(d / "t.log",
      "nvdla.csb_adaptor: iswrite=1 addr=0x00000c01 data=0x00000007\n"
      "nvdla.csb_adaptor: iswrite=0 addr=0x00000003 data=0x000000ff\n");
  put(d / "board.map", "csb_addr_scale = 4\nmask.0x00000003 = 0x0000000f\n");
  auto r = nvbm(d, "run t.log -o out --map board.map --poll strict");
  CHECK(r.code == 0);
  CHECK(slurp(d / "out/config.cfg") ==
        "write_reg 0x00000c01 0x00000007\nread_reg 0x00000003 0x0000000f 0x0000000f once\n");
  CHECK(slurp(d / "out/program.s").find("addi x5, x5, 0x4\n") != std::string::npos);
}

TEST_CASE("diagnostics stay out of artifacts") {
  auto d = work_dir("logging");
  REQUIRE(nvbm(d, "gen-trace --csb-writes 5 --seed 1 -o t.log").code == 0);
  auto quiet = nvbm(d, "run t.log -o a", "NVBM_LOG=off");
  auto loud = nvbm(d, "run t.log -o b", "NVBM_LOG=debug");
  CHECK(quiet.err.empty());
  CHECK(loud.err.find("nvbm: debug: stage parse") != std::string::npos);
  for (auto f : {"config.cfg", "program.s", "program.mem", "result.txt", "report.txt"})
    CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
}
