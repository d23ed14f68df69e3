from __future__ import annotations

import enum
from typing import FrozenSet, Iterable, Union


class Bug(enum.Enum):
    B1 = "FENCEI with rd != 0 decoded as ADDI"
    B2 = "illegal opcode 62 executes as a no-op"
    B3 = "INVALID_ADDR reported as ILLEGAL_INSTR while csr0 != 0"
    B4 = "LW right after SW to the same address reads the stale value"
    B5 = "LW to an invalid address returns 0 instead of trapping"
    B6 = "CSRRW on an unimplemented CSR returns 0xDEADBEEF"
    B7 = "EBREAK does not increment instret"

    @property
    def description(self) -> str:
        return self.value


BugConfig = FrozenSet[Bug]
ALL_BUGS: BugConfig = frozenset(Bug)
NO_BUGS: BugConfig = frozenset()


def parse_bugs(value: Union[str, Iterable[str], None]) -> BugConfig:
    """Parse ``"all"``, ``"none"``, ``"B1,B7"`` or an iterable of names."""
    if value is None:
        return NO_BUGS
    if isinstance(value, str):
        text = value.strip()
        if text.lower() == "all":
            return ALL_BUGS
        if text.lower() in ("", "none"):
            return NO_BUGS
        names = [s.strip() for s in text.split(",") if s.strip()]
    else:
        names = list(value)
    try:
        return frozenset(Bug[n.upper()] for n in names)
    except KeyError as exc:
        raise ValueError(f"unknown bug id {exc.args[0]!r}; expected B1..B7 or 'all'") from None


def format_bugs(bugs: BugConfig) -> str:
    if bugs == ALL_BUGS:
        return "all"
    return ",".join(sorted(b.name for b in bugs)) or "none"
