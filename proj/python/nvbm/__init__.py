# Copyright nvbm contributors.
# Licensed under the Apache License, Version 2.0, see LICENSE for details.
# SPDX-License-Identifier: Apache-2.0
"""NVDLA trace to bare-metal RV32I toolchain and functional SoC model."""

from ._nvbm import (
    Command,
    CsbTransaction,
    DbbTransaction,
    Error,
    StageError,
    TraceBundle,
    assemble,
    build_image,
    decode_address,
    disassemble,
    emit_asm,
    emit_config,
    gen_synthetic_trace,
    parse_config,
    parse_log,
    run_pipeline,
    simulate,
    to_commands,
)

__version__ = "0.1.0"
