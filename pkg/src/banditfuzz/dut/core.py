"""Instrumented toy core (the device under test).

Every two-way conditional in decode and execute is a coverage *site*; site
``s`` owns point ``2*s`` (condition true) and ``2*s + 1`` (condition false).
Bug hooks from :class:`~banditfuzz.dut.bugs.Bug` sit on top of the design
conditionals and are not instrumented themselves, so the coverage universe
does not depend on the bug configuration.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

from .bugs import Bug, BugConfig, NO_BUGS
from .golden import ArchState, Memory, alu
from .isa import (
    MEM_WORDS,
    NUM_CSRS,
    OPCODE_SHIFT,
    UNIMPL_CSR_VALUE,
    WORD_MASK,
    Exc,
    Opcode,
    sext,
    to_signed,
)

SITES: List[str] = []


def _site(name: str) -> int:
    SITES.append(name)
    return len(SITES) - 1


# decode: if/elif chain over the opcode table, in table order
S_DECODE = {op: _site(f"decode.is_{op.name.lower()}") for op in Opcode}
S_CUSTOM = _site("decode.illegal_in_custom_space")
S_FWD_A = _site("operand.forward_rs1")
S_FWD_B = _site("operand.forward_rs2")
S_RR_SAME = _site("operand.rs1_eq_rs2")
S_IMM_NEG = _site("operand.imm_negative")
S_ZERO = {
    op: _site(f"alu.{op.name.lower()}_zero")
    for op in (Opcode.ADD, Opcode.SUB, Opcode.AND, Opcode.OR, Opcode.XOR, Opcode.SLT,
               Opcode.ADDI, Opcode.ANDI, Opcode.ORI)
}
S_NEG = {
    op: _site(f"alu.{op.name.lower()}_negative")
    for op in (Opcode.ADD, Opcode.SUB, Opcode.AND, Opcode.OR, Opcode.XOR,
               Opcode.ADDI, Opcode.ANDI, Opcode.ORI)
}
S_ADD_OVF = _site("alu.add_overflow")
S_ADDI_OVF = _site("alu.addi_overflow")
S_SUB_BORROW = _site("alu.sub_borrow")
S_SLT_SIGNS = _site("alu.slt_sign_differs")
S_LUI_NEG = _site("alu.lui_negative")
S_ADDR_LOW = _site("lsu.addr_below_zero")
S_ADDR_HIGH = _site("lsu.addr_above_top")
S_LD_FWD = _site("lsu.load_hits_store_buffer")
S_ST_SILENT = _site("lsu.silent_store")
S_BEQ_TAKEN = _site("branch.beq_taken")
S_BNE_TAKEN = _site("branch.bne_taken")
S_BR_BACK = _site("branch.backward")
S_JAL_LINK = _site("jal.links")
S_JAL_BACK = _site("jal.backward")
S_CSR_IMPL = _site("csr.implemented")
S_CSR_RO = _site("csr.read_only_access")
S_CSR_SEL = [_site(f"csr.select_{i}") for i in range(NUM_CSRS - 1)]
S_EBREAK_DBG = _site("sys.ebreak_debug_enabled")
S_FENCE_HINT = _site("sys.fencei_rd_nonzero")
S_TRAP_VEC = _site("trap.vector_configured")
S_WB_RD0 = _site("wb.rd_is_zero")
S_WB_CHANGES = _site("wb.value_changes")
S_WB_SEL = [_site(f"wb.write_enable_x{i}") for i in range(1, 15)]
S_LD_BANK = [_site(f"lsu.load_bank_{i}") for i in range(MEM_WORDS // 16 - 1)]
S_ST_BANK = [_site(f"lsu.store_bank_{i}") for i in range(MEM_WORDS // 16 - 1)]
S_LOAD_USE = _site("hazard.load_use")
S_FALL_OFF = _site("commit.leaves_program")
S_LONG_RUN = _site("commit.instret_ge_16")

NUM_SITES = len(SITES)
UNIVERSE_SIZE = 2 * NUM_SITES


def point_name(point: int) -> str:
    return f"{SITES[point >> 1]}:{'F' if point & 1 else 'T'}"


def _chain_bits(cases, sites, num_values: int) -> Tuple[int, ...]:
    """Points hit by an if/elif chain ``if v == cases[0] ... elif v == cases[1] ...``
    for every possible selector value ``v``. Cases beyond ``sites`` fall into
    the uninstrumented final ``else``."""
    table = []
    for value in range(num_values):
        bits = 0
        for case, s in zip(cases, sites):
            if value == case:
                bits |= 1 << (2 * s)
                break
            bits |= 1 << (2 * s + 1)
        table.append(bits)
    return tuple(table)


_DECODE_BITS = _chain_bits(list(Opcode), [S_DECODE[op] for op in Opcode], 1 << 6)
_WB_BITS = _chain_bits(range(1, 16), S_WB_SEL, 16)
_LD_BANK_BITS = _chain_bits(range(MEM_WORDS // 16), S_LD_BANK, MEM_WORDS // 16)
_ST_BANK_BITS = _chain_bits(range(MEM_WORDS // 16), S_ST_BANK, MEM_WORDS // 16)
_CSR_BITS = _chain_bits(range(NUM_CSRS), S_CSR_SEL, NUM_CSRS)
_LEGAL = {int(op): op for op in Opcode}
_ALU_R = (Opcode.ADD, Opcode.SUB, Opcode.AND, Opcode.OR, Opcode.XOR, Opcode.SLT)
_ALU_I = (Opcode.ADDI, Opcode.ANDI, Opcode.ORI)
_READS_RS2 = frozenset(_ALU_R + (Opcode.SW, Opcode.BEQ, Opcode.BNE))
_NO_RS1 = frozenset((Opcode.LUI, Opcode.JAL, Opcode.EBREAK))


class DutCore:
    """One DUT instance; holds the microarchitectural bits (store buffer,
    forwarding register) that persist between instructions of a run."""

    def __init__(self, bugs: BugConfig = NO_BUGS):
        self.bugs = bugs
        self.cov = 0
        self.last_rd = 0
        self.last_was_load = False
        self.store_buf: Optional[Tuple[int, int]] = None
        self.fired: Optional[Bug] = None

    def _br(self, site: int, cond) -> bool:
        cond = bool(cond)
        self.cov |= 1 << (2 * site + (not cond))
        return cond

    def _trap(self, state: ArchState, cause: Exc) -> ArchState:
        if self._br(S_TRAP_VEC, state.csrs[0] != 0) and cause is Exc.INVALID_ADDR:
            if Bug.B3 in self.bugs:
                self.fired = Bug.B3
                cause = Exc.ILLEGAL_INSTR
        return state._replace(exc_cause=cause)

    def _writeback(self, regs: tuple, rd: int, value: int) -> tuple:
        value &= WORD_MASK
        self.last_rd = rd
        if self._br(S_WB_RD0, rd == 0):
            return regs
        self.cov |= _WB_BITS[rd]
        self._br(S_WB_CHANGES, regs[rd] != value)
        return regs[:rd] + (value,) + regs[rd + 1 :]

    def step(self, state: ArchState, mem: Memory, word: int) -> ArchState:
        if state.halted:
            raise ValueError("machine is halted")
        br = self._br
        bugs = self.bugs
        self.fired = None
        prev_store, self.store_buf = self.store_buf, None
        last_rd, self.last_rd = self.last_rd, 0
        after_load, self.last_was_load = self.last_was_load, False

        op_val = word >> OPCODE_SHIFT
        self.cov |= _DECODE_BITS[op_val]
        op = _LEGAL.get(op_val)
        if op is None:
            if br(S_CUSTOM, op_val >= 0x38) and op_val == 62 and Bug.B2 in bugs:
                self.fired = Bug.B2
                return state._replace(pc=(state.pc + 4) & WORD_MASK, instret=state.instret + 1)
            return self._trap(state, Exc.ILLEGAL_INSTR)

        rd = (word >> 22) & 0xF
        rs1 = (word >> 18) & 0xF
        rs2 = (word >> 14) & 0xF
        imm = sext(word, 14)
        pc, regs, csrs = state.pc, state.regs, state.csrs
        npc = pc + 4

        if op is Opcode.FENCEI and br(S_FENCE_HINT, rd != 0) and Bug.B1 in bugs:
            self.fired = Bug.B1
            op = Opcode.ADDI

        if op not in _NO_RS1:
            fwd = br(S_FWD_A, last_rd != 0 and rs1 == last_rd)
            if op in _READS_RS2:
                fwd = br(S_FWD_B, last_rd != 0 and rs2 == last_rd) or fwd
            if after_load:
                br(S_LOAD_USE, fwd)

        if op in _ALU_R:
            a, b = regs[rs1], regs[rs2]
            br(S_RR_SAME, rs1 == rs2)
            value = alu(op, a, b)
            if op is Opcode.ADD:
                br(S_ADD_OVF, to_signed(a) + to_signed(b) != to_signed(value))
            elif op is Opcode.SUB:
                br(S_SUB_BORROW, a < b)
            elif op is Opcode.SLT:
                br(S_SLT_SIGNS, (a ^ b) >> 31)
            br(S_ZERO[op], value == 0)
            if op is not Opcode.SLT:
                br(S_NEG[op], value >> 31)
            regs = self._writeback(regs, rd, value)
        elif op in _ALU_I:
            a = regs[rs1]
            br(S_IMM_NEG, imm < 0)
            value = alu(op, a, imm & WORD_MASK)
            if op is Opcode.ADDI:
                br(S_ADDI_OVF, to_signed(a) + imm != to_signed(value))
            br(S_ZERO[op], value == 0)
            br(S_NEG[op], value >> 31)
            regs = self._writeback(regs, rd, value)
        elif op is Opcode.LUI:
            br(S_LUI_NEG, imm < 0)
            regs = self._writeback(regs, rd, imm << 14)
        elif op is Opcode.LW or op is Opcode.SW:
            addr = to_signed(regs[rs1]) + imm
            if br(S_ADDR_LOW, addr < 0) or br(S_ADDR_HIGH, addr >= MEM_WORDS):
                if op is Opcode.LW and Bug.B5 in bugs:
                    self.fired = Bug.B5
                    regs = self._writeback(regs, rd, 0)
                else:
                    return self._trap(state, Exc.INVALID_ADDR)
            elif op is Opcode.LW:
                self.cov |= _LD_BANK_BITS[addr >> 4]
                self.last_was_load = True
                value = mem.data[addr]
                if br(S_LD_FWD, prev_store is not None and prev_store[0] == addr):
                    if Bug.B4 in bugs:
                        self.fired = Bug.B4
                        value = prev_store[1]
                regs = self._writeback(regs, rd, value)
            else:
                self.cov |= _ST_BANK_BITS[addr >> 4]
                old = mem.data[addr]
                br(S_ST_SILENT, old == regs[rs2])
                mem.data[addr] = regs[rs2]
                self.store_buf = (addr, old)
        elif op is Opcode.BEQ or op is Opcode.BNE:
            equal = regs[rs1] == regs[rs2]
            if op is Opcode.BEQ:
                taken = br(S_BEQ_TAKEN, equal)
            else:
                taken = br(S_BNE_TAKEN, not equal)
            if taken:
                br(S_BR_BACK, imm <= 0)
                npc = pc + 4 * imm
        elif op is Opcode.JAL:
            br(S_JAL_LINK, rd != 0)
            br(S_JAL_BACK, imm <= 0)
            regs = self._writeback(regs, rd, pc + 4)
            npc = pc + 4 * imm
        elif op is Opcode.CSRRW:
            csr = imm & 0x3FFF
            if br(S_CSR_IMPL, csr < NUM_CSRS):
                br(S_CSR_RO, rs1 == 0)
                self.cov |= _CSR_BITS[csr]
                old = csrs[csr]
                csrs = csrs[:csr] + (regs[rs1],) + csrs[csr + 1 :]
                regs = self._writeback(regs, rd, old)
            elif Bug.B6 in bugs:
                self.fired = Bug.B6
                regs = self._writeback(regs, rd, UNIMPL_CSR_VALUE)
            else:
                return self._trap(state, Exc.ILLEGAL_INSTR)
        elif op is Opcode.EBREAK:
            br(S_EBREAK_DBG, csrs[3] != 0)
            if Bug.B7 in bugs:
                self.fired = Bug.B7
                return state._replace(exc_cause=Exc.BREAK)
            return state._replace(instret=state.instret + 1, exc_cause=Exc.BREAK)
        # FENCEI (correctly decoded) has no architectural effect

        npc &= WORD_MASK
        br(S_FALL_OFF, npc >= mem.code_limit)
        br(S_LONG_RUN, state.instret >= 16)
        return ArchState(npc, regs, csrs, state.instret + 1, None)


def step_dut(
    state: ArchState,
    mem: Memory,
    word: int,
    bugs: BugConfig = NO_BUGS,
    core: Optional[DutCore] = None,
) -> Tuple[ArchState, DutCore]:
    """Single-step convenience wrapper; pass ``core`` back in to keep the
    store buffer and coverage across calls."""
    core = core if core is not None else DutCore(bugs)
    return core.step(state, mem, word), core
