// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// End-to-end flow: log -> commands -> config file; DBB traffic -> preload
// image; commands -> assembly -> machine code; then simulate and verify.

#ifndef NVBM_PIPELINE_H_
#define NVBM_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nvbm/codegen.h"
#include "nvbm/config.h"
#include "nvbm/errors.h"
#include "nvbm/image.h"
#include "nvbm/memory_map.h"
#include "nvbm/rv32.h"
#include "nvbm/soc.h"
#include "nvbm/trace.h"

namespace nvbm {

// Failure of one named pipeline stage (parse, gen-config, gen-weights,
// gen-asm, assemble, simulate, verify, io).
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string &what)
      : Error("stage " + stage + ": " + what), stage_(std::move(stage)) {}
  const std::string &stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineSettings {
  MapConfig map;
  PollPolicy::Mode poll_mode = PollPolicy::Mode::kPollAll;
  std::set<std::uint32_t> poll_listed;
  std::optional<std::uint64_t> rebase_from;  // override map / default
  std::optional<std::uint64_t> rebase_to;
  std::uint64_t watchdog = 10'000'000;
  bool lenient = false;
  bool replay_dbb = true;  // run the DBB trace as a second bus master
  soc::ArbiterPolicy arbiter = soc::ArbiterPolicy::kRoundRobin;
  std::map<std::string, std::string> metadata;
  std::string source;
};

PollPolicy make_poll_policy(const PipelineSettings &settings);
CodegenOptions make_codegen_options(const MapConfig &map);
AddressRebase resolve_rebase(const std::vector<DbbTransaction> &dbb,
                             const PipelineSettings &settings);

struct PipelineArtifacts {
  TraceBundle bundle;
  std::vector<Command> commands;
  std::string config_text;
  AddressRebase rebase;
  BuiltImage image;
  std::vector<std::uint8_t> weights_bin;
  std::string weights_meta;
  std::string weights_mem;
  std::string asm_text;
  rv32::Program program;
  std::string program_mem;
  soc::SimResult sim;
  std::string result_text;
  std::string report_text;
};

// Throws StageError naming the first failing stage, including a simulation
// that does not end in Success and a write sequence that differs from the
// trace.
PipelineArtifacts run_pipeline(std::string_view log_text,
                               const PipelineSettings &settings);

// Writes every artifact into `dir` (created if missing):
// config.cfg, weights.bin, weights.bin.meta, weights.mem, program.s,
// program.mem, program.bin, result.txt, report.txt.
void write_artifacts(const PipelineArtifacts &artifacts,
                     const std::filesystem::path &dir);

struct ReportInputs {
  const TraceBundle *bundle = nullptr;
  const BuiltImage *image = nullptr;
  const rv32::Program *program = nullptr;
  const soc::SimResult *sim = nullptr;
  std::map<std::string, std::string> metadata;
};

// Deterministic `key = value` statistics. Counts for absent inputs are 0.
std::string make_report(const ReportInputs &in);

// `key = value` lines with '#' comments, used for model metadata files.
std::map<std::string, std::string> parse_key_values(std::string_view text);

// Register writes the program must produce, in order, as bus addresses.
std::vector<std::pair<std::uint32_t, std::uint32_t>> expected_writes(
    const std::vector<Command> &cmds, const CodegenOptions &opts);

std::string read_text_file(const std::filesystem::path &path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view content);
void write_file(const std::filesystem::path &path,
                const std::vector<std::uint8_t> &content);

}  // namespace nvbm

#endif  // NVBM_PIPELINE_H_
