// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "../support/oracles.h"
#include "nvbm/pipeline.h"

using namespace nvbm;

namespace {

std::string sanity_log() {
  SyntheticSpec spec;
  spec.csb_writes = 3;
  spec.csb_reads = 1;
  spec.seed = 42;
  return gen_synthetic_trace(spec).text;
}

std::size_t count_lines(const std::string &s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("sanity-shaped trace runs end to end") {
  auto a = run_pipeline(sanity_log(), {});
  CHECK(count_lines(a.config_text) == 4);
  CHECK(a.sim.status == soc::Status::kSuccess);
  CHECK(a.sim.observed_writes.size() == 3);
}

TEST_CASE("empty log") {
  auto a = run_pipeline("", {});
  CHECK(a.config_text.empty());
  CHECK(a.weights_bin.empty());
  CHECK(a.program.words.size() == 6);
  CHECK(a.sim.status == soc::Status::kSuccess);
  CHECK(a.sim.observed_writes.empty());
}

TEST_CASE("stage errors name the stage") {
  auto stage_of = [](std::string_view log, PipelineSettings s = {}) -> std::string {
    try {
      run_pipeline(log, s);
    } catch (const StageError &e) {
      return e.stage();
    }
    return "";
  };
  CHECK(stage_of("nvdla.csb_adaptor: iswrite=1 addr=zz data=0x0\n") == "parse");
  CHECK(stage_of("nvdla.csb_adaptor: iswrite=1 addr=0x00200000 data=0x0\n") == "gen-asm");
  CHECK(stage_of("nvdla.dbb_adaptor: iswrite=0 addr=0x200ffff0 data=0x1 len=8\n",
                 [] {
                   PipelineSettings s;
                   s.rebase_from = 0;
                   s.rebase_to = 0;
                   return s;
                 }()) == "gen-weights");
  PipelineSettings tiny;
  tiny.watchdog = 3;
  CHECK(stage_of(sanity_log(), tiny) == "simulate");
  // A read whose logged data contradicts an earlier write in the same trace
  // cannot be replayed.
  CHECK(stage_of("nvdla.dbb_adaptor: iswrite=1 addr=0xc0000000 data=0x11111111 len=4\n"
                 "nvdla.dbb_adaptor: iswrite=0 addr=0xc0000000 data=0x22222222 len=4\n") ==
        "verify");
}

TEST_CASE("lenient mode skips bad lines") {
  PipelineSettings s;
  s.lenient = true;
  auto a = run_pipeline("nvdla.csb_adaptor: junk\nnvdla.csb_adaptor: iswrite=1 addr=0x4 data=0x1\n", s);
  CHECK(a.sim.observed_writes.size() == 1);
}

TEST_CASE("report counts") {
  CHECK(make_report({}) ==
        "csb_reads = 0\ncsb_writes = 0\ndbb_reads = 0\ndbb_writes = 0\n"
        "dbb_read_bytes = 0\ndbb_write_bytes = 0\nimage_bytes = 0\nimage_span_bytes = 0\n"
        "excluded_bytes = 0\nprogram_instructions = 0\ngrants.cpu = 0\ngrants.dbb = 0\n");
  TraceBundle b;
  for (int i = 0; i < 10; ++i) b.csb.push_back({0, 4u * i, 0, true});
  for (int i = 0; i < 2; ++i) b.csb.push_back({0, 0xc, 0, false});
  auto text = make_report({&b, nullptr, nullptr, nullptr, {{"model", "lenet5"}, {"model_size", "1.7 MB"}}});
  CHECK(text.find("csb_writes = 10\n") != std::string::npos);
  CHECK(text.find("csb_reads = 2\n") != std::string::npos);
  CHECK(text.find("meta.model_size = 1.7 MB\n") != std::string::npos);
}

TEST_CASE("metadata file parsing") {
  auto kv = parse_key_values("# LeNet-5\nmodel = lenet5\nmodel_size = 1.7 MB\n\n");
  CHECK(kv.at("model_size") == "1.7 MB");
  CHECK_THROWS_AS(parse_key_values("no equals sign\n"), Error);
}

TEST_CASE("property: pipeline output equals chained stages") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SyntheticSpec spec;
    spec.csb_writes = 20 + seed;
    spec.csb_reads = seed % 7;
    spec.dbb_reads = 10;
    spec.dbb_writes = 4;
    spec.noise_lines = 5;
    spec.seed = seed;
    auto text = gen_synthetic_trace(spec).text;
    auto a = run_pipeline(text, {});

    auto bundle = parse_log(text);
    auto cmds = to_commands(bundle.csb);
    CHECK(a.config_text == emit_config(cmds));
    auto rebase = default_rebase(bundle.dbb);
    auto image = build_image(bundle.dbb, rebase).image;
    CHECK(a.weights_bin == emit_bin(image));
    CHECK(a.weights_mem == emit_mem(image));
    auto asm_text = emit_asm(parse_config(a.config_text));
    CHECK(a.asm_text == asm_text);
    auto prog = rv32::assemble(asm_text);
    CHECK(a.program_mem == emit_mem(0, prog.words));
    CHECK(rv32::assemble(rv32::disassemble(prog)).words == prog.words);
    CHECK(a.sim.observed_writes == testing::write_subsequence(bundle.csb));
  }
}

TEST_CASE("property: artifacts are deterministic") {
  SyntheticSpec spec;
  spec.csb_writes = 50;
  spec.csb_reads = 5;
  spec.dbb_reads = 30;
  spec.dbb_writes = 10;
  spec.seed = 77;
  auto text = gen_synthetic_trace(spec).text;
  auto a = run_pipeline(text, {});
  auto b = run_pipeline(text, {});
  CHECK(a.config_text == b.config_text);
  CHECK(a.weights_bin == b.weights_bin);
  CHECK(a.weights_mem == b.weights_mem);
  CHECK(a.asm_text == b.asm_text);
  CHECK(a.program_mem == b.program_mem);
  CHECK(a.result_text == b.result_text);
  CHECK(a.report_text == b.report_text);
}

TEST_CASE("scaled register addresses") {
  PipelineSettings s;
  s.map.csb_addr_scale = 4;
  auto a = run_pipeline("nvdla.csb_adaptor: iswrite=1 addr=0x00000c01 data=0x5\n", s);
  CHECK(a.sim.observed_writes ==
        std::vector<std::pair<std::uint32_t, std::uint32_t>>{{0x3004, 0x5}});
}
