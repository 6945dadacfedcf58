// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "nvbm/pipeline.h"

#include <fstream>
#include <iterator>

#include "nvbm/log.h"
#include "nvbm/text.h"

namespace nvbm {

PollPolicy make_poll_policy(const PipelineSettings &settings) {
  PollPolicy p;
  p.mode = settings.poll_mode;
  if (p.mode == PollPolicy::Mode::kPollListed) p.listed = settings.poll_listed;
  p.masks = settings.map.masks;
  return p;
}

CodegenOptions make_codegen_options(const MapConfig &map) {
  CodegenOptions opts;
  if (map.result_addr) opts.result_addr = *map.result_addr;
  opts.csb_addr_scale = map.csb_addr_scale;
  return opts;
}

AddressRebase resolve_rebase(const std::vector<DbbTransaction> &dbb,
                             const PipelineSettings &settings) {
  AddressRebase r = default_rebase(dbb, settings.map.map);
  if (settings.map.rebase_from) r.from_base = *settings.map.rebase_from;
  if (settings.map.rebase_to) r.to_base = *settings.map.rebase_to;
  if (settings.rebase_from) r.from_base = *settings.rebase_from;
  if (settings.rebase_to) r.to_base = *settings.rebase_to;
  if (settings.map.rebase_window) {
    r.window = *settings.map.rebase_window;
  } else if (r.to_base >= settings.map.map.dram_start) {
    // Default window: from the target to the end of DRAM.
    r.window = std::uint64_t{settings.map.map.dram_end} + 1 - r.to_base;
  }
  return r;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> expected_writes(
    const std::vector<Command> &cmds, const CodegenOptions &opts) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (const auto &c : cmds)
    if (c.is_write()) out.emplace_back(register_byte_addr(c.addr, opts), c.data);
  return out;
}

namespace {

template <typename Fn>
auto stage(const char *name, Fn &&fn) -> decltype(fn()) {
  try {
    log::debug(std::string("stage ") + name);
    return fn();
  } catch (const StageError &) {
    throw;
  } catch (const std::exception &e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

PipelineArtifacts run_pipeline(std::string_view log_text,
                               const PipelineSettings &settings) {
  PipelineArtifacts a;
  const CodegenOptions cg = make_codegen_options(settings.map);

  a.bundle = stage("parse", [&] {
    ParseOptions po;
    po.lenient = settings.lenient;
    po.source = settings.source;
    return parse_log(log_text, po);
  });
  log::info("parsed " + std::to_string(a.bundle.csb.size()) + " CSB and " +
            std::to_string(a.bundle.dbb.size()) + " DBB transactions");

  stage("gen-config", [&] {
    a.commands = to_commands(a.bundle.csb, make_poll_policy(settings));
    a.config_text = emit_config(a.commands);
  });

  stage("gen-weights", [&] {
    a.rebase = resolve_rebase(a.bundle.dbb, settings);
    a.image = build_image(a.bundle.dbb, a.rebase, settings.map.map);
    if (!a.image.image.empty() && a.image.image.limit() > cg.result_addr &&
        a.image.image.base() < std::uint64_t{cg.result_addr} + 4)
      throw AddressOutOfWindow("weight image overlaps the result mailbox at " +
                               hex32(cg.result_addr));
    a.weights_bin = emit_bin(a.image.image);
    a.weights_meta = emit_bin_metadata(bin_metadata(a.image.image));
    a.weights_mem = emit_mem(a.image.image);
  });

  stage("gen-asm", [&] { a.asm_text = emit_asm(a.commands, settings.map.map, cg); });

  stage("assemble", [&] {
    a.program = rv32::assemble(a.asm_text, 0);
    a.program_mem = emit_mem(a.program.origin, a.program.words);
  });

  a.sim = stage("simulate", [&] {
    soc::SimOptions so;
    so.map = settings.map.map;
    so.result_addr = cg.result_addr;
    so.success_code = cg.success_code;
    so.watchdog = settings.watchdog;
    so.policy = settings.arbiter;
    so.program_words = std::max<std::size_t>(so.program_words, a.program.words.size());
    return soc::run(a.program, a.image.image,
                    soc::script_from_commands(a.commands, cg), so,
                    settings.replay_dbb ? &a.bundle.dbb : nullptr, a.rebase);
  });
  a.result_text = soc::format_result(a.sim);

  ReportInputs ri{&a.bundle, &a.image, &a.program, &a.sim, settings.metadata};
  a.report_text = make_report(ri);

  if (a.sim.status != soc::Status::kSuccess)
    throw StageError("simulate", std::string("simulation ended with status ") +
                                     soc::status_name(a.sim.status) +
                                     (a.sim.detail.empty() ? "" : ": " + a.sim.detail));
  if (a.sim.observed_writes != expected_writes(a.commands, cg))
    throw StageError("verify", "observed register writes differ from the trace");
  if (a.sim.replay && !a.sim.replay->clean()) {
    const auto &m = a.sim.replay->mismatches.front();
    throw StageError("verify", std::to_string(a.sim.replay->mismatches.size()) +
                                   " DBB read mismatches; first at " +
                                   hex_addr(m.addr) + " (transaction " +
                                   std::to_string(m.seq) + ")");
  }
  return a;
}

void write_artifacts(const PipelineArtifacts &a, const std::filesystem::path &dir) {
  stage("io", [&] {
    std::filesystem::create_directories(dir);
    write_file(dir / "config.cfg", a.config_text);
    write_file(dir / "weights.bin", a.weights_bin);
    write_file(dir / "weights.bin.meta", a.weights_meta);
    write_file(dir / "weights.mem", a.weights_mem);
    write_file(dir / "program.s", a.asm_text);
    write_file(dir / "program.mem", a.program_mem);
    std::vector<std::uint8_t> prog_bin;
    prog_bin.reserve(a.program.words.size() * 4);
    for (auto w : a.program.words)
      for (int i = 0; i < 4; ++i) prog_bin.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
    write_file(dir / "program.bin", prog_bin);
    write_file(dir / "result.txt", a.result_text);
    write_file(dir / "report.txt", a.report_text);
  });
}

std::string make_report(const ReportInputs &in) {
  std::uint64_t csb_reads = 0, csb_writes = 0, dbb_reads = 0, dbb_writes = 0;
  std::uint64_t dbb_read_bytes = 0, dbb_write_bytes = 0;
  if (in.bundle) {
    for (const auto &t : in.bundle->csb) (t.is_write ? csb_writes : csb_reads)++;
    for (const auto &t : in.bundle->dbb) {
      (t.is_write ? dbb_writes : dbb_reads)++;
      (t.is_write ? dbb_write_bytes : dbb_read_bytes) += t.payload.size();
    }
  }
  std::string out;
  auto kv = [&](const std::string &k, const std::string &v) {
    out += k + " = " + v + "\n";
  };
  auto num = [](std::uint64_t v) { return std::to_string(v); };
  kv("csb_reads", num(csb_reads));
  kv("csb_writes", num(csb_writes));
  kv("dbb_reads", num(dbb_reads));
  kv("dbb_writes", num(dbb_writes));
  kv("dbb_read_bytes", num(dbb_read_bytes));
  kv("dbb_write_bytes", num(dbb_write_bytes));
  kv("image_bytes", num(in.image ? in.image->image.populated_bytes() : 0));
  kv("image_span_bytes",
     num(in.image ? in.image->image.limit() - in.image->image.base() : 0));
  kv("excluded_bytes", num(in.image ? in.image->excluded.count() : 0));
  kv("program_instructions", num(in.program ? in.program->words.size() : 0));
  kv("grants.cpu", num(in.sim ? in.sim->bus_grants[0] : 0));
  kv("grants.dbb", num(in.sim ? in.sim->bus_grants[1] : 0));
  for (const auto &[k, v] : in.metadata) kv("meta." + k, v);
  return out;
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error("expected key = value", i + 1);
    out[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path &path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path.string());
}

void write_file(const std::filesystem::path &path,
                const std::vector<std::uint8_t> &content) {
  write_file(path, std::string_view(reinterpret_cast<const char *>(content.data()),
                                    content.size()));
}

}  // namespace nvbm
