"""Desk-scale fuzzing target: toy ISA, instrumented DUT with injectable bugs,
golden reference model and trace comparator."""

from .bugs import ALL_BUGS, NO_BUGS, Bug, BugConfig, format_bugs, parse_bugs
from .core import SITES, UNIVERSE_SIZE, DutCore, point_name, step_dut
from .golden import RESET_STATE, ArchState, Memory, step_golden
from .isa import (
    Exc,
    IllegalInstruction,
    Instruction,
    Opcode,
    decode,
    disassemble,
    encode,
)
from .run import ExecTrace, Mismatch, RunResult, TraceEntry, diff, format_mismatches, run_test

__all__ = [
    "ALL_BUGS", "NO_BUGS", "Bug", "BugConfig", "format_bugs", "parse_bugs",
    "SITES", "UNIVERSE_SIZE", "DutCore", "point_name", "step_dut",
    "RESET_STATE", "ArchState", "Memory", "step_golden",
    "Exc", "IllegalInstruction", "Instruction", "Opcode", "decode", "disassemble", "encode",
    "ExecTrace", "Mismatch", "RunResult", "TraceEntry", "diff", "format_mismatches", "run_test",
]
