// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// nvbm: turns NVDLA virtual-platform logs into bare-metal RV32I programs
// and DRAM preload images, and checks them on the functional SoC model.
//
// Exit status: 0 on success, 1 when a pipeline stage fails (the stage is
// named on stderr), 2 on usage errors.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nvbm/codegen.h"
#include "nvbm/config.h"
#include "nvbm/image.h"
#include "nvbm/log.h"
#include "nvbm/pipeline.h"
#include "nvbm/rv32.h"
#include "nvbm/soc.h"
#include "nvbm/text.h"
#include "nvbm/trace.h"

namespace fs = std::filesystem;
using namespace nvbm;

namespace {

std::uint64_t parse_number_option(const std::string &flag, const std::string &text) {
  auto v = parse_uint(text);
  if (!v) throw CLI::ValidationError(flag, "expected a decimal or 0x-hex number, got `" + text + "'");
  return *v;
}

// Options shared by several subcommands.
struct Common {
  std::string map_path;
  std::string poll = "all";
  std::vector<std::string> poll_addrs;
  std::string rebase_from;
  std::string rebase_to;
  std::uint64_t watchdog = 10'000'000;
  bool lenient = false;
  std::string meta_path;
  std::string arbiter = "rr";
};

void add_map_option(CLI::App *cmd, Common &c) {
  cmd->add_option("--map", c.map_path, "Memory-map configuration file")->check(CLI::ExistingFile);
}
void add_poll_options(CLI::App *cmd, Common &c) {
  cmd->add_option("--poll", c.poll, "Read handling: all (poll every read), listed, strict")
      ->check(CLI::IsMember({"all", "listed", "strict"}));
  cmd->add_option("--poll-addr", c.poll_addrs, "Register polled under --poll listed (repeatable)");
}
void add_rebase_options(CLI::App *cmd, Common &c) {
  cmd->add_option("--rebase-from", c.rebase_from, "VP base address of the DBB window");
  cmd->add_option("--rebase-to", c.rebase_to, "SoC DRAM address the window maps to");
}
void add_watchdog_option(CLI::App *cmd, Common &c) {
  cmd->add_option("--watchdog", c.watchdog, "Maximum retired instructions (> 0)")
      ->check(CLI::PositiveNumber);
}
void add_arbiter_option(CLI::App *cmd, Common &c) {
  cmd->add_option("--arbiter", c.arbiter, "DRAM arbitration: rr, cpu-first, dbb-first")
      ->check(CLI::IsMember({"rr", "cpu-first", "dbb-first"}));
}

PipelineSettings settings_from(const Common &c) {
  PipelineSettings s;
  if (!c.map_path.empty()) s.map = parse_map_config(read_text_file(c.map_path));
  s.poll_mode = c.poll == "listed"   ? PollPolicy::Mode::kPollListed
                : c.poll == "strict" ? PollPolicy::Mode::kStrictAll
                                     : PollPolicy::Mode::kPollAll;
  for (const auto &a : c.poll_addrs)
    s.poll_listed.insert(static_cast<std::uint32_t>(parse_number_option("--poll-addr", a)));
  if (!c.rebase_from.empty()) s.rebase_from = parse_number_option("--rebase-from", c.rebase_from);
  if (!c.rebase_to.empty()) s.rebase_to = parse_number_option("--rebase-to", c.rebase_to);
  s.watchdog = c.watchdog;
  s.lenient = c.lenient;
  s.arbiter = c.arbiter == "cpu-first"   ? soc::ArbiterPolicy::kCpuFirst
              : c.arbiter == "dbb-first" ? soc::ArbiterPolicy::kDbbFirst
                                         : soc::ArbiterPolicy::kRoundRobin;
  if (!c.meta_path.empty()) s.metadata = parse_key_values(read_text_file(c.meta_path));
  return s;
}

TraceBundle load_bundle(const std::string &path, const PipelineSettings &s) {
  ParseOptions po;
  po.lenient = s.lenient;
  po.source = path;
  return parse_log(read_text_file(path), po);
}

rv32::Program load_program(const std::string &path) {
  auto words = parse_mem(read_text_file(path));
  rv32::Program p;
  if (words.empty()) return p;
  p.origin = static_cast<std::uint32_t>(words.begin()->first * 4);
  std::uint64_t expect = words.begin()->first;
  for (auto [addr, w] : words) {
    if (addr != expect) throw MemFormatError("program .mem is not contiguous");
    p.words.push_back(w);
    ++expect;
  }
  return p;
}

template <typename Fn>
int run_stage(const char *name, Fn &&fn) {
  try {
    fn();
    return 0;
  } catch (const CLI::Error &) {
    throw;
  } catch (const StageError &e) {
    std::cerr << "nvbm: error: " << e.what() << '\n';
  } catch (const std::exception &e) {
    std::cerr << "nvbm: error: stage " << name << ": " << e.what() << '\n';
  }
  return 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"nvbm: NVDLA trace to bare-metal RISC-V toolchain and SoC simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nvbm 0.1.0");
  Common c;
  std::string in_path, out_path, out2_path, out3_path;
  int rc = 0;

  // run
  auto *run = app.add_subcommand("run", "Full pipeline: log -> artifacts -> simulation");
  run->add_option("log", in_path, "VP log file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_path, "Output directory")->required();
  add_map_option(run, c);
  add_poll_options(run, c);
  add_rebase_options(run, c);
  add_watchdog_option(run, c);
  add_arbiter_option(run, c);
  run->add_flag("--lenient", c.lenient, "Skip malformed transaction lines");
  run->add_option("--meta", c.meta_path, "Model metadata (key = value) echoed in the report")
      ->check(CLI::ExistingFile);
  bool no_replay = false;
  run->add_flag("--no-replay", no_replay, "Do not replay DBB traffic during simulation");
  run->callback([&] {
    rc = run_stage("run", [&] {
      auto s = settings_from(c);
      s.replay_dbb = !no_replay;
      s.source = in_path;
      write_artifacts(run_pipeline(read_text_file(in_path), s), out_path);
      log::info("wrote artifacts to " + out_path);
    });
  });

  // report
  auto *report = app.add_subcommand("report", "Trace and artifact statistics");
  report->add_option("log", in_path, "VP log file")->required()->check(CLI::ExistingFile);
  add_map_option(report, c);
  add_rebase_options(report, c);
  report->add_flag("--lenient", c.lenient, "Skip malformed transaction lines");
  report->add_option("--meta", c.meta_path, "Model metadata (key = value)")->check(CLI::ExistingFile);
  bool report_sim = false;
  report->add_flag("--simulate", report_sim, "Also build, run and report the program");
  report->add_option("-o,--out", out_path, "Write the report here instead of stdout");
  report->callback([&] {
    rc = run_stage("report", [&] {
      auto s = settings_from(c);
      std::string text;
      if (report_sim) {
        s.source = in_path;
        text = run_pipeline(read_text_file(in_path), s).report_text;
      } else {
        auto bundle = load_bundle(in_path, s);
        auto built = build_image(bundle.dbb, resolve_rebase(bundle.dbb, s), s.map.map);
        text = make_report({&bundle, &built, nullptr, nullptr, s.metadata});
      }
      if (out_path.empty()) std::cout << text;
      else write_file(out_path, text);
    });
  });

  // gen-trace
  auto *gen = app.add_subcommand("gen-trace", "Write a synthetic VP log");
  SyntheticSpec spec;
  gen->add_option("--csb-writes", spec.csb_writes);
  gen->add_option("--csb-reads", spec.csb_reads);
  gen->add_option("--dbb-reads", spec.dbb_reads);
  gen->add_option("--dbb-writes", spec.dbb_writes);
  gen->add_option("--noise", spec.noise_lines, "Unrelated lines to interleave");
  gen->add_option("--seed", spec.seed);
  gen->add_option("-o,--out", out_path, "Output log")->required();
  gen->callback([&] {
    rc = run_stage("gen-trace", [&] { write_file(out_path, gen_synthetic_trace(spec).text); });
  });

  // parse
  auto *parse = app.add_subcommand("parse", "Re-emit the transactions of a log in canonical form");
  parse->add_option("log", in_path)->required()->check(CLI::ExistingFile);
  parse->add_option("-o,--out", out_path)->required();
  parse->add_flag("--lenient", c.lenient);
  parse->callback([&] {
    rc = run_stage("parse", [&] {
      auto bundle = load_bundle(in_path, settings_from(c));
      std::string text;
      for (const auto &t : bundle.csb) text += format_csb_line(t) + "\n";
      for (const auto &t : bundle.dbb) text += format_dbb_line(t) + "\n";
      write_file(out_path, text);
    });
  });

  // gen-config
  auto *gcfg = app.add_subcommand("gen-config", "Log -> configuration file");
  gcfg->add_option("log", in_path)->required()->check(CLI::ExistingFile);
  gcfg->add_option("-o,--out", out_path)->required();
  add_map_option(gcfg, c);
  add_poll_options(gcfg, c);
  gcfg->add_flag("--lenient", c.lenient);
  gcfg->callback([&] {
    rc = run_stage("gen-config", [&] {
      auto s = settings_from(c);
      auto bundle = load_bundle(in_path, s);
      write_file(out_path, emit_config(to_commands(bundle.csb, make_poll_policy(s))));
    });
  });

  // gen-weights
  auto *gw = app.add_subcommand("gen-weights", "Log -> DRAM preload (.bin + metadata, .mem)");
  gw->add_option("log", in_path)->required()->check(CLI::ExistingFile);
  gw->add_option("--bin", out_path, "Output .bin")->required();
  gw->add_option("--bin-meta", out2_path, "Output metadata (default: <bin>.meta)");
  gw->add_option("--mem", out3_path, "Output .mem");
  add_map_option(gw, c);
  add_rebase_options(gw, c);
  gw->add_flag("--lenient", c.lenient);
  gw->callback([&] {
    rc = run_stage("gen-weights", [&] {
      auto s = settings_from(c);
      auto bundle = load_bundle(in_path, s);
      auto built = build_image(bundle.dbb, resolve_rebase(bundle.dbb, s), s.map.map);
      write_file(out_path, emit_bin(built.image));
      write_file(out2_path.empty() ? out_path + ".meta" : out2_path,
                 emit_bin_metadata(bin_metadata(built.image)));
      if (!out3_path.empty()) write_file(out3_path, emit_mem(built.image));
    });
  });

  // gen-asm
  auto *gasm = app.add_subcommand("gen-asm", "Configuration file -> RV32I assembly");
  gasm->add_option("config", in_path)->required()->check(CLI::ExistingFile);
  gasm->add_option("-o,--out", out_path)->required();
  add_map_option(gasm, c);
  gasm->callback([&] {
    rc = run_stage("gen-asm", [&] {
      auto s = settings_from(c);
      write_file(out_path, emit_asm(parse_config(read_text_file(in_path)), s.map.map,
                                    make_codegen_options(s.map)));
    });
  });

  // assemble
  auto *as = app.add_subcommand("assemble", "Assembly -> .mem machine code");
  as->add_option("source", in_path)->required()->check(CLI::ExistingFile);
  as->add_option("-o,--out", out_path, "Output .mem")->required();
  as->add_option("--bin", out2_path, "Also write raw little-endian words");
  std::string origin = "0";
  as->add_option("--origin", origin, "Program memory byte address of the first word");
  as->callback([&] {
    rc = run_stage("assemble", [&] {
      auto org = parse_number_option("--origin", origin);
      auto prog = rv32::assemble(read_text_file(in_path), static_cast<std::uint32_t>(org));
      write_file(out_path, emit_mem(prog.origin, prog.words));
      if (!out2_path.empty()) {
        std::vector<std::uint8_t> bytes;
        for (auto w : prog.words)
          for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
        write_file(out2_path, bytes);
      }
    });
  });

  // disassemble
  auto *dis = app.add_subcommand("disassemble", ".mem machine code -> assembly");
  dis->add_option("mem", in_path)->required()->check(CLI::ExistingFile);
  dis->add_option("-o,--out", out_path)->required();
  dis->callback([&] {
    rc = run_stage("disassemble", [&] {
      write_file(out_path, rv32::disassemble(load_program(in_path)));
    });
  });

  // simulate
  auto *sim = app.add_subcommand("simulate", "Run a program on the SoC model");
  std::string program_path, image_path, image_meta_path, config_path, replay_log;
  std::uint64_t delay = 0;
  sim->add_option("--program", program_path, "Program .mem")->required()->check(CLI::ExistingFile);
  sim->add_option("--image", image_path, "DRAM preload .bin")->check(CLI::ExistingFile);
  sim->add_option("--image-meta", image_meta_path, "Metadata for --image (default: <image>.meta)");
  sim->add_option("--config", config_path, "Configuration file answering register reads")
      ->check(CLI::ExistingFile);
  sim->add_option("--log", replay_log, "VP log whose DBB traffic is replayed")->check(CLI::ExistingFile);
  sim->add_option("--delay", delay, "Perturbed answers before each scripted read settles");
  sim->add_option("-o,--out", out_path, "Write the result here instead of stdout");
  add_map_option(sim, c);
  add_rebase_options(sim, c);
  add_watchdog_option(sim, c);
  add_arbiter_option(sim, c);
  sim->add_flag("--lenient", c.lenient);
  sim->callback([&] {
    rc = run_stage("simulate", [&] {
      auto s = settings_from(c);
      auto cg = make_codegen_options(s.map);
      auto program = load_program(program_path);
      MemoryImage image;
      if (!image_path.empty()) {
        auto meta = parse_bin_metadata(
            read_text_file(image_meta_path.empty() ? image_path + ".meta" : image_meta_path));
        image = load_bin(read_binary_file(image_path), meta);
      }
      std::vector<soc::ScriptEntry> script;
      if (!config_path.empty())
        script = soc::script_from_commands(parse_config(read_text_file(config_path)), cg, delay);

      soc::SimOptions so;
      so.map = s.map.map;
      so.result_addr = cg.result_addr;
      so.success_code = cg.success_code;
      so.watchdog = s.watchdog;
      so.policy = s.arbiter;
      so.program_words = std::max<std::size_t>(so.program_words, program.words.size());
      std::optional<TraceBundle> bundle;
      AddressRebase rebase;
      if (!replay_log.empty()) {
        bundle = load_bundle(replay_log, s);
        rebase = resolve_rebase(bundle->dbb, s);
      }
      auto result = soc::run(program, image, std::move(script), so,
                             bundle ? &bundle->dbb : nullptr, rebase);
      auto text = soc::format_result(result);
      if (out_path.empty()) std::cout << text;
      else write_file(out_path, text);
      if (result.status != soc::Status::kSuccess)
        throw StageError("simulate", std::string("status ") + soc::status_name(result.status));
      if (result.replay && !result.replay->clean())
        throw StageError("verify", "DBB replay mismatches");
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
