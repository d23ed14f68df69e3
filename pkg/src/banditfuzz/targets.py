"""Things a campaign can fuzz.

A target exposes ``universe_size`` and ``execute(test) -> Execution``.
"""

from __future__ import annotations

from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

from .coverage import CoverageSet
from .dut import ALL_BUGS, BugConfig, Mismatch, diff, run_test
from .dut.core import UNIVERSE_SIZE
from .dut.isa import Opcode, encode, to_signed
from .dut.run import run_golden
from .testgen import Test


class Execution(NamedTuple):
    coverage: CoverageSet
    mismatches: Sequence[Mismatch] = ()


class ToyCpuTarget:
    """Instrumented toy core checked against the golden model."""

    universe_size = UNIVERSE_SIZE

    def __init__(self, bugs: BugConfig = ALL_BUGS):
        self.bugs = bugs

    def execute(self, test: Test) -> Execution:
        result = run_test(test, self.bugs)
        if result.dut_trace.entries == result.golden_trace.entries:
            return Execution(result.coverage)
        return Execution(result.coverage, diff(result.dut_trace, result.golden_trace))


class ScriptedTarget:
    """Returns preprogrammed coverage: the k-th execution of a test owned by
    arm ``a`` yields ``script[a][k]`` (empty once the script runs out)."""

    def __init__(self, universe_size: int, script: Dict[int, List[Sequence[int]]]):
        self.universe_size = universe_size
        self.script = script
        self.calls: Dict[int, int] = {}

    def execute(self, test: Test) -> Execution:
        k = self.calls.get(test.arm_id, 0)
        self.calls[test.arm_id] = k + 1
        steps = self.script.get(test.arm_id, [])
        points = steps[k] if k < len(steps) else ()
        return Execution(CoverageSet.of(self.universe_size, points))


class FunctionTarget:
    """Coverage computed by an arbitrary function of the test words."""

    def __init__(self, universe_size: int, fn: Callable[[Tuple[int, ...]], Sequence[int]]):
        self.universe_size = universe_size
        self.fn = fn

    def execute(self, test: Test) -> Execution:
        return Execution(CoverageSet.of(self.universe_size, self.fn(test.words)))


# Two registers gate two disjoint regions of a small design:
#
#     if (reg1 != 0)         cov1      -- region 1, reachable from seed S1
#     if (reg1 > 100)        cov2
#     if (reg1[0])           ...
#     if (reg2 == MAGIC)     cov3      -- region 2, only seed S2 sets reg2
#
# Each conditional contributes a taken and a not-taken point.
MOTIVATION_MAGIC = 0x0123_4567
MOTIVATION_COV3 = 6  # taken point of the reg2 == MAGIC conditional


def _motivation_points(words: Tuple[int, ...]) -> List[int]:
    trace = run_golden(words)
    regs = trace.entries[-1].state.regs if trace.entries else (0,) * 16
    r1, r2 = regs[1], regs[2]
    conds = (r1 != 0, to_signed(r1) > 100, r1 & 1, r2 == MOTIVATION_MAGIC)
    return [2 * i + (0 if c else 1) for i, c in enumerate(conds)]


class MotivationTarget(FunctionTarget):
    def __init__(self):
        super().__init__(8, _motivation_points)


def motivation_seeds() -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Seed S1 drives reg1 (covers the region-1 points); S2 loads MAGIC into reg2."""
    hi, lo = MOTIVATION_MAGIC >> 14, MOTIVATION_MAGIC & 0x3FFF
    if lo >= 1 << 13:
        hi, lo = hi + 1, lo - (1 << 14)
    s1 = (
        encode(Opcode.ADDI, rd=1, rs1=0, imm=101),
        encode(Opcode.ADDI, rd=3, rs1=1, imm=7),
        encode(Opcode.ADD, rd=4, rs1=3, rs2=1),
    )
    s2 = (
        encode(Opcode.LUI, rd=2, imm=hi),
        encode(Opcode.ADDI, rd=2, rs1=2, imm=lo),
        encode(Opcode.ADD, rd=4, rs1=0, rs2=0),
    )
    return s1, s2
