"""Toy 32-bit ISA: field layout, opcode table, encoder and decoder.

Layout (bit ranges inclusive)::

    31..26  opcode
    25..22  rd
    21..18  rs1
    17..14  rs2
    13..0   imm (two's complement)
"""

from __future__ import annotations

import enum
from functools import lru_cache
from typing import NamedTuple, Union

WORD_MASK = 0xFFFF_FFFF
NUM_REGS = 16
NUM_CSRS = 4
MEM_WORDS = 256
STEP_CAP = 1000
UNIMPL_CSR_VALUE = 0xDEADBEEF

OPCODE_SHIFT, OPCODE_BITS = 26, 6
RD_SHIFT, RD_BITS = 22, 4
RS1_SHIFT, RS1_BITS = 18, 4
RS2_SHIFT, RS2_BITS = 14, 4
IMM_SHIFT, IMM_BITS = 0, 14

FIELDS = {
    "opcode": (OPCODE_SHIFT, OPCODE_BITS),
    "rd": (RD_SHIFT, RD_BITS),
    "rs1": (RS1_SHIFT, RS1_BITS),
    "rs2": (RS2_SHIFT, RS2_BITS),
    "imm": (IMM_SHIFT, IMM_BITS),
}

IMM_MIN = -(1 << (IMM_BITS - 1))
IMM_MAX = (1 << (IMM_BITS - 1)) - 1


class Opcode(enum.IntEnum):
    ADD = 0x00
    SUB = 0x01
    AND = 0x02
    OR = 0x03
    XOR = 0x04
    SLT = 0x05
    ADDI = 0x08
    ANDI = 0x09
    ORI = 0x0A
    LUI = 0x0B
    LW = 0x10
    SW = 0x11
    BEQ = 0x18
    BNE = 0x19
    JAL = 0x1A
    CSRRW = 0x20
    EBREAK = 0x21
    FENCEI = 0x22


class Exc(enum.IntEnum):
    ILLEGAL_INSTR = 2
    BREAK = 3
    INVALID_ADDR = 5


LEGAL_OPCODES = tuple(Opcode)
ALU_R = frozenset({Opcode.ADD, Opcode.SUB, Opcode.AND, Opcode.OR, Opcode.XOR, Opcode.SLT})
ALU_I = frozenset({Opcode.ADDI, Opcode.ANDI, Opcode.ORI})


class Instruction(NamedTuple):
    op: Opcode
    rd: int
    rs1: int
    rs2: int
    imm: int


class IllegalInstruction(NamedTuple):
    word: int

    @property
    def opcode(self) -> int:
        return self.word >> OPCODE_SHIFT


Decoded = Union[Instruction, IllegalInstruction]


def sext(value: int, bits: int) -> int:
    sign = 1 << (bits - 1)
    return (value & (sign - 1)) - (value & sign)


def to_signed(value: int) -> int:
    return sext(value, 32)


def field(word: int, name: str) -> int:
    shift, bits = FIELDS[name]
    return (word >> shift) & ((1 << bits) - 1)


def replace_field(word: int, name: str, value: int) -> int:
    shift, bits = FIELDS[name]
    mask = ((1 << bits) - 1) << shift
    return (word & ~mask & WORD_MASK) | ((value << shift) & mask)


def encode(op: int, rd: int = 0, rs1: int = 0, rs2: int = 0, imm: int = 0) -> int:
    if not IMM_MIN <= imm <= IMM_MAX:
        raise ValueError(f"imm {imm} out of 14-bit signed range")
    for name, val, bits in (("rd", rd, RD_BITS), ("rs1", rs1, RS1_BITS), ("rs2", rs2, RS2_BITS)):
        if not 0 <= val < (1 << bits):
            raise ValueError(f"{name} {val} out of range")
    if not 0 <= op < (1 << OPCODE_BITS):
        raise ValueError(f"opcode {op} out of range")
    return (
        (op << OPCODE_SHIFT)
        | (rd << RD_SHIFT)
        | (rs1 << RS1_SHIFT)
        | (rs2 << RS2_SHIFT)
        | (imm & ((1 << IMM_BITS) - 1))
    )


_LEGAL = {int(op): op for op in Opcode}


@lru_cache(maxsize=1 << 16)
def decode(word: int) -> Decoded:
    """Split a word into fields; unknown opcodes come back as IllegalInstruction."""
    op = _LEGAL.get(word >> OPCODE_SHIFT)
    if op is None:
        return IllegalInstruction(word)
    return Instruction(
        op,
        (word >> RD_SHIFT) & 0xF,
        (word >> RS1_SHIFT) & 0xF,
        (word >> RS2_SHIFT) & 0xF,
        sext(word, IMM_BITS),
    )


def disassemble(word: int) -> str:
    ins = decode(word)
    if isinstance(ins, IllegalInstruction):
        return f".word 0x{word:08x}  # illegal opcode {ins.opcode}"
    return f"{ins.op.name.lower()} rd=x{ins.rd} rs1=x{ins.rs1} rs2=x{ins.rs2} imm={ins.imm}"
