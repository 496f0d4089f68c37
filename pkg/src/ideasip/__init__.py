"""Simulator, assembler and toolchain for a single-cycle MIPS-style IDEA crypto processor."""

__version__ = "0.1.0"
