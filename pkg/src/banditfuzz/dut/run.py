"""Run a test on both machines and compare their traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

from ..coverage import CoverageSet
from .bugs import Bug, BugConfig, NO_BUGS
from .core import UNIVERSE_SIZE, DutCore
from .golden import RESET_STATE, ArchState, Memory, step_golden
from .isa import NUM_CSRS, NUM_REGS, STEP_CAP, decode


class TraceEntry(NamedTuple):
    pc: int
    state: ArchState


@dataclass
class ExecTrace:
    entries: List[TraceEntry] = field(default_factory=list)
    # (step index, bug) for every bug hook that fired; empty for the golden model
    bug_events: List[Tuple[int, Bug]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)


class Mismatch(NamedTuple):
    step: int
    field: str
    dut_value: object
    golden_value: object
    bug: Optional[Bug] = None


class RunResult(NamedTuple):
    coverage: CoverageSet
    dut_trace: ExecTrace
    golden_trace: ExecTrace


def _words(test) -> Tuple[int, ...]:
    words = getattr(test, "words", test)
    words = tuple(words)
    if not words:
        raise ValueError("test has no instructions")
    return words


def run_golden(words: Sequence[int], step_cap: int = STEP_CAP) -> ExecTrace:
    mem = Memory.for_program(words)
    limit = mem.code_limit
    state = RESET_STATE
    trace = ExecTrace()
    while len(trace.entries) < step_cap and state.pc < limit:
        pc = state.pc
        state = step_golden(state, mem, decode(words[pc >> 2]))
        trace.entries.append(TraceEntry(pc, state))
        if state.exc_cause is not None:
            break
    return trace


def run_dut(
    words: Sequence[int], bugs: BugConfig = NO_BUGS, step_cap: int = STEP_CAP
) -> Tuple[ExecTrace, int]:
    """Returns the DUT trace and the raw coverage bitmask."""
    mem = Memory.for_program(words)
    limit = mem.code_limit
    core = DutCore(bugs)
    state = RESET_STATE
    trace = ExecTrace()
    entries = trace.entries
    while len(entries) < step_cap and state.pc < limit:
        pc = state.pc
        state = core.step(state, mem, words[pc >> 2])
        if core.fired is not None:
            trace.bug_events.append((len(entries), core.fired))
        entries.append(TraceEntry(pc, state))
        if state.exc_cause is not None:
            break
    return trace, core.cov


def run_test(test, bugs: BugConfig = NO_BUGS, step_cap: int = STEP_CAP) -> RunResult:
    """Execute ``test`` (a Test or a word sequence) on the DUT and the golden
    model from the all-zero reset state."""
    words = _words(test)
    dut_trace, cov = run_dut(words, bugs, step_cap)
    golden_trace = run_golden(words, step_cap)
    return RunResult(CoverageSet(UNIVERSE_SIZE, cov), dut_trace, golden_trace)


def _label(events: List[Tuple[int, Bug]], step: int) -> Optional[Bug]:
    label = None
    for at, bug in events:
        if at > step:
            break
        label = bug
    return label


def diff(dut_trace: ExecTrace, golden_trace: ExecTrace) -> List[Mismatch]:
    """Field-by-field comparison up to the shorter trace, plus a ``length``
    record when the traces differ in length."""
    out: List[Mismatch] = []
    events = dut_trace.bug_events
    n = min(len(dut_trace.entries), len(golden_trace.entries))
    for i in range(n):
        d, g = dut_trace.entries[i], golden_trace.entries[i]
        if d == g:
            continue
        found = []
        if d.pc != g.pc:
            found.append(("issue_pc", d.pc, g.pc))
        ds, gs = d.state, g.state
        if ds.pc != gs.pc:
            found.append(("pc", ds.pc, gs.pc))
        for r in range(NUM_REGS):
            if ds.regs[r] != gs.regs[r]:
                found.append((f"regs[{r}]", ds.regs[r], gs.regs[r]))
        for c in range(NUM_CSRS):
            if ds.csrs[c] != gs.csrs[c]:
                found.append((f"csrs[{c}]", ds.csrs[c], gs.csrs[c]))
        if ds.instret != gs.instret:
            found.append(("instret", ds.instret, gs.instret))
        if ds.exc_cause != gs.exc_cause:
            found.append(("exc_cause", ds.exc_cause, gs.exc_cause))
        label = _label(events, i)
        out.extend(Mismatch(i, f, dv, gv, label) for f, dv, gv in found)
    if len(dut_trace.entries) != len(golden_trace.entries):
        out.append(
            Mismatch(n, "length", len(dut_trace.entries), len(golden_trace.entries), _label(events, n))
        )
    return out


def format_mismatches(mismatches: Sequence[Mismatch]) -> str:
    lines = ["step\tfield\tdut\tgolden\tbug"]
    for m in mismatches:
        dv = m.dut_value.name if hasattr(m.dut_value, "name") else m.dut_value
        gv = m.golden_value.name if hasattr(m.golden_value, "name") else m.golden_value
        if isinstance(dv, int):
            dv = f"0x{dv:x}"
        if isinstance(gv, int):
            gv = f"0x{gv:x}"
        lines.append(f"{m.step}\t{m.field}\t{dv}\t{gv}\t{m.bug.name if m.bug else '-'}")
    return "\n".join(lines) + "\n"
