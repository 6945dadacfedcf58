// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "nvbm/codegen.h"
#include "nvbm/config.h"
#include "nvbm/errors.h"
#include "nvbm/image.h"
#include "nvbm/memory_map.h"
#include "nvbm/pipeline.h"
#include "nvbm/rv32.h"
#include "nvbm/soc.h"
#include "nvbm/trace.h"

namespace py = pybind11;
using namespace nvbm;

namespace {

py::bytes to_bytes(const std::vector<std::uint8_t> &v) {
  return py::bytes(reinterpret_cast<const char *>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes &b) {
  std::string s = b;
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

PollPolicy::Mode poll_mode(const std::string &name) {
  if (name == "all") return PollPolicy::Mode::kPollAll;
  if (name == "listed") return PollPolicy::Mode::kPollListed;
  if (name == "strict") return PollPolicy::Mode::kStrictAll;
  throw py::value_error("poll must be one of all, listed, strict");
}

py::dict image_dict(const MemoryImage &img) {
  py::dict spans;
  for (const auto &[addr, bytes] : img.spans()) spans[py::int_(addr)] = to_bytes(bytes);
  return spans;
}

}  // namespace

PYBIND11_MODULE(_nvbm, m) {
  m.doc() = "NVDLA trace to bare-metal RV32I toolchain and SoC model";

  auto error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<StageError>(m, "StageError", error.ptr());

  py::class_<CsbTransaction>(m, "CsbTransaction")
      .def(py::init<>())
      .def_readwrite("seq", &CsbTransaction::seq)
      .def_readwrite("addr", &CsbTransaction::addr)
      .def_readwrite("data", &CsbTransaction::data)
      .def_readwrite("is_write", &CsbTransaction::is_write)
      .def("__eq__", [](const CsbTransaction &a, const CsbTransaction &b) { return a == b; })
      .def("__repr__", [](const CsbTransaction &t) { return "<" + format_csb_line(t) + ">"; });

  py::class_<DbbTransaction>(m, "DbbTransaction")
      .def(py::init<>())
      .def_readwrite("seq", &DbbTransaction::seq)
      .def_readwrite("addr", &DbbTransaction::addr)
      .def_property(
          "payload", [](const DbbTransaction &t) { return to_bytes(t.payload); },
          [](DbbTransaction &t, const py::bytes &b) { t.payload = from_bytes(b); })
      .def_readwrite("is_write", &DbbTransaction::is_write)
      .def("__eq__", [](const DbbTransaction &a, const DbbTransaction &b) { return a == b; })
      .def("__repr__", [](const DbbTransaction &t) { return "<" + format_dbb_line(t) + ">"; });

  py::class_<TraceBundle>(m, "TraceBundle")
      .def_readonly("csb", &TraceBundle::csb)
      .def_readonly("dbb", &TraceBundle::dbb)
      .def_readonly("source", &TraceBundle::source)
      .def("__eq__", [](const TraceBundle &a, const TraceBundle &b) { return a == b; });

  m.def(
      "parse_log",
      [](const std::string &text, bool lenient) {
        ParseOptions po;
        po.lenient = lenient;
        return parse_log(text, po);
      },
      py::arg("text"), py::arg("lenient") = false);

  m.def(
      "gen_synthetic_trace",
      [](std::size_t csb_writes, std::size_t csb_reads, std::size_t dbb_reads,
         std::size_t dbb_writes, std::size_t noise, std::uint64_t seed) {
        SyntheticSpec s;
        s.csb_writes = csb_writes;
        s.csb_reads = csb_reads;
        s.dbb_reads = dbb_reads;
        s.dbb_writes = dbb_writes;
        s.noise_lines = noise;
        s.seed = seed;
        auto t = gen_synthetic_trace(s);
        return py::make_tuple(t.text, t.bundle);
      },
      py::arg("csb_writes") = 0, py::arg("csb_reads") = 0, py::arg("dbb_reads") = 0,
      py::arg("dbb_writes") = 0, py::arg("noise") = 0, py::arg("seed") = 0);

  py::class_<Command>(m, "Command")
      .def_static("write_reg", &Command::write_reg, py::arg("addr"), py::arg("data"))
      .def_static("read_reg", &Command::read_reg, py::arg("addr"), py::arg("expected"),
                  py::arg("mask") = 0xffffffffu, py::arg("poll") = true)
      .def_property_readonly("is_write", &Command::is_write)
      .def_readonly("addr", &Command::addr)
      .def_readonly("data", &Command::data)
      .def_readonly("mask", &Command::mask)
      .def_readonly("poll", &Command::poll)
      .def("__eq__", [](const Command &a, const Command &b) { return a == b; })
      .def("__repr__", [](const Command &c) { return "<" + format_command(c) + ">"; });

  m.def(
      "to_commands",
      [](const std::vector<CsbTransaction> &csb, const std::string &poll) {
        PollPolicy p;
        p.mode = poll_mode(poll);
        return to_commands(csb, p);
      },
      py::arg("csb"), py::arg("poll") = "all");
  m.def("emit_config", &emit_config);
  m.def("parse_config", [](const std::string &text) { return parse_config(text); });

  m.def(
      "build_image",
      [](const std::vector<DbbTransaction> &dbb, std::optional<std::uint64_t> from_base,
         std::uint64_t to_base) {
        AddressRebase r = default_rebase(dbb);
        if (from_base) r.from_base = *from_base;
        r.to_base = to_base;
        auto built = build_image(dbb, r);
        py::list excluded;
        for (auto [b, e] : built.excluded.ranges()) excluded.append(py::make_tuple(b, e));
        return py::make_tuple(image_dict(built.image), excluded);
      },
      py::arg("dbb"), py::arg("from_base") = py::none(), py::arg("to_base") = 0x100000,
      "Returns ({address: bytes} spans, [(begin, end)] excluded ranges).");

  m.def(
      "emit_asm",
      [](const std::vector<Command> &cmds, std::uint32_t result_addr) {
        CodegenOptions o;
        o.result_addr = result_addr;
        return emit_asm(cmds, MemoryMap{}, o);
      },
      py::arg("cmds"), py::arg("result_addr") = kDefaultResultAddr);

  m.def(
      "assemble",
      [](const std::string &src, std::uint32_t origin) { return rv32::assemble(src, origin).words; },
      py::arg("source"), py::arg("origin") = 0);
  m.def(
      "disassemble",
      [](const std::vector<std::uint32_t> &words, std::uint32_t origin) {
        return rv32::disassemble(rv32::Program{origin, words, {}});
      },
      py::arg("words"), py::arg("origin") = 0);
  m.def(
      "decode_address",
      [](std::uint32_t addr) { return std::string(target_name(decode_address(addr, MemoryMap{}))); },
      "One of 'nvdla', 'dram', 'fault' under the default memory map.");

  m.def(
      "simulate",
      [](const std::vector<std::uint32_t> &words, const std::vector<Command> &cmds,
         std::uint64_t delay, std::uint64_t watchdog) {
        soc::SimOptions so;
        so.watchdog = watchdog;
        auto r = soc::run(rv32::Program{0, words, {}}, {}, soc::script_from_commands(cmds, {}, delay),
                          so);
        py::dict d;
        d["status"] = soc::status_name(r.status);
        d["observed_writes"] = r.observed_writes;
        d["retired_instructions"] = r.retired_instructions;
        d["nvdla_reads"] = r.nvdla_reads;
        d["mailbox"] = r.mailbox;
        return d;
      },
      py::arg("words"), py::arg("cmds") = std::vector<Command>{}, py::arg("delay") = 0,
      py::arg("watchdog") = 10'000'000,
      "Runs a program whose register reads are answered from `cmds`.");

  m.def(
      "run_pipeline",
      [](const std::string &log_text, const std::string &poll, bool lenient,
         std::uint64_t watchdog) {
        PipelineSettings s;
        s.poll_mode = poll_mode(poll);
        s.lenient = lenient;
        s.watchdog = watchdog;
        auto a = run_pipeline(log_text, s);
        py::dict d;
        d["config"] = a.config_text;
        d["weights_bin"] = to_bytes(a.weights_bin);
        d["weights_meta"] = a.weights_meta;
        d["weights_mem"] = a.weights_mem;
        d["asm"] = a.asm_text;
        d["program"] = a.program.words;
        d["program_mem"] = a.program_mem;
        d["result"] = a.result_text;
        d["report"] = a.report_text;
        d["observed_writes"] = a.sim.observed_writes;
        return d;
      },
      py::arg("log_text"), py::arg("poll") = "all", py::arg("lenient") = false,
      py::arg("watchdog") = 10'000'000,
      "Full flow; raises StageError naming the failing stage.");
}
