"""Bug-free reference model of the toy ISA."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .isa import (
    MEM_WORDS,
    NUM_CSRS,
    NUM_REGS,
    WORD_MASK,
    Decoded,
    Exc,
    IllegalInstruction,
    Opcode,
    to_signed,
)


class ArchState(NamedTuple):
    """Architectural state compared between the DUT and the golden model."""

    pc: int = 0
    regs: tuple = (0,) * NUM_REGS
    csrs: tuple = (0,) * NUM_CSRS
    instret: int = 0
    exc_cause: Optional[Exc] = None

    @property
    def halted(self) -> bool:
        return self.exc_cause is not None


RESET_STATE = ArchState()


@dataclass
class Memory:
    program: tuple
    data: list = field(default_factory=lambda: [0] * MEM_WORDS)

    @classmethod
    def for_program(cls, words: Sequence[int]) -> "Memory":
        return cls(tuple(words))

    @property
    def code_limit(self) -> int:
        return 4 * len(self.program)


def _write(regs: tuple, rd: int, value: int) -> tuple:
    if rd == 0:
        return regs
    return regs[:rd] + (value & WORD_MASK,) + regs[rd + 1 :]


def alu(op: Opcode, a: int, b: int) -> int:
    if op is Opcode.ADD or op is Opcode.ADDI:
        return (a + b) & WORD_MASK
    if op is Opcode.SUB:
        return (a - b) & WORD_MASK
    if op is Opcode.AND or op is Opcode.ANDI:
        return a & b & WORD_MASK
    if op is Opcode.OR or op is Opcode.ORI:
        return (a | b) & WORD_MASK
    if op is Opcode.XOR:
        return (a ^ b) & WORD_MASK
    if op is Opcode.SLT:
        return int(to_signed(a) < to_signed(b))
    raise ValueError(f"not an ALU opcode: {op!r}")


def step_golden(state: ArchState, mem: Memory, instr: Decoded) -> ArchState:
    """Execute one instruction with reference semantics.

    Trapping instructions do not retire (instret unchanged, pc stays on the
    faulting instruction); EBREAK is the exception and counts as retired.
    """
    if state.halted:
        raise ValueError("machine is halted")
    if isinstance(instr, IllegalInstruction):
        return state._replace(exc_cause=Exc.ILLEGAL_INSTR)

    pc, regs, csrs = state.pc, state.regs, state.csrs
    op = instr.op
    npc = pc + 4

    if op in (Opcode.ADD, Opcode.SUB, Opcode.AND, Opcode.OR, Opcode.XOR, Opcode.SLT):
        regs = _write(regs, instr.rd, alu(op, regs[instr.rs1], regs[instr.rs2]))
    elif op in (Opcode.ADDI, Opcode.ANDI, Opcode.ORI):
        regs = _write(regs, instr.rd, alu(op, regs[instr.rs1], instr.imm & WORD_MASK))
    elif op is Opcode.LUI:
        regs = _write(regs, instr.rd, instr.imm << 14)
    elif op is Opcode.LW or op is Opcode.SW:
        addr = to_signed(regs[instr.rs1]) + instr.imm
        if not 0 <= addr < MEM_WORDS:
            return state._replace(exc_cause=Exc.INVALID_ADDR)
        if op is Opcode.LW:
            regs = _write(regs, instr.rd, mem.data[addr])
        else:
            mem.data[addr] = regs[instr.rs2]
    elif op is Opcode.BEQ or op is Opcode.BNE:
        equal = regs[instr.rs1] == regs[instr.rs2]
        if equal == (op is Opcode.BEQ):
            npc = pc + 4 * instr.imm
    elif op is Opcode.JAL:
        regs = _write(regs, instr.rd, pc + 4)
        npc = pc + 4 * instr.imm
    elif op is Opcode.CSRRW:
        csr = instr.imm & 0x3FFF
        if csr >= NUM_CSRS:
            return state._replace(exc_cause=Exc.ILLEGAL_INSTR)
        old = csrs[csr]
        csrs = csrs[:csr] + (regs[instr.rs1],) + csrs[csr + 1 :]
        regs = _write(regs, instr.rd, old)
    elif op is Opcode.EBREAK:
        return state._replace(instret=state.instret + 1, exc_cause=Exc.BREAK)
    elif op is Opcode.FENCEI:
        pass
    else:  # pragma: no cover - the opcode table is closed
        raise AssertionError(op)

    return ArchState(npc & WORD_MASK, regs, csrs, state.instret + 1, None)
