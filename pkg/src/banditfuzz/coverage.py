"""Coverage bookkeeping: point sets, the local/global ledger, the reward, and
the per-arm saturation monitor.

Point sets are stored as integer bitmasks; bit ``i`` set means point ``i`` is
covered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Tuple


@dataclass(frozen=True)
class CoverageSet:
    universe_size: int
    bits: int = 0

    def __post_init__(self):
        if self.universe_size < 1:
            raise ValueError("universe_size must be positive")
        if self.bits < 0 or self.bits >> self.universe_size:
            raise ValueError("coverage point outside [0, universe_size)")

    @classmethod
    def of(cls, universe_size: int, points: Iterable[int] = ()) -> "CoverageSet":
        bits = 0
        for p in points:
            bits |= 1 << p
        return cls(universe_size, bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def __iter__(self) -> Iterator[int]:
        bits, i = self.bits, 0
        while bits:
            if bits & 1:
                yield i
            bits >>= 1
            i += 1

    def __contains__(self, point: int) -> bool:
        return point >= 0 and bool(self.bits >> point & 1)

    def _check(self, other: "CoverageSet") -> None:
        if other.universe_size != self.universe_size:
            raise ValueError(
                f"coverage universe mismatch: {self.universe_size} vs {other.universe_size}"
            )

    def __or__(self, other: "CoverageSet") -> "CoverageSet":
        self._check(other)
        return CoverageSet(self.universe_size, self.bits | other.bits)

    def __and__(self, other: "CoverageSet") -> "CoverageSet":
        self._check(other)
        return CoverageSet(self.universe_size, self.bits & other.bits)

    def __sub__(self, other: "CoverageSet") -> "CoverageSet":
        self._check(other)
        return CoverageSet(self.universe_size, self.bits & ~other.bits)

    def issubset(self, other: "CoverageSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def to_set(self) -> set:
        return set(self)


class CoverageLedger:
    """Global coverage plus one coverage set per arm."""

    def __init__(self, universe_size: int, num_arms: int):
        if universe_size < 1:
            raise ValueError("universe_size must be positive")
        self.universe_size = universe_size
        self._global = 0
        self._per_arm = [0] * num_arms

    @property
    def global_covered(self) -> CoverageSet:
        return CoverageSet(self.universe_size, self._global)

    def arm_covered(self, arm: int) -> CoverageSet:
        return CoverageSet(self.universe_size, self._per_arm[arm])

    @property
    def global_count(self) -> int:
        return self._global.bit_count()

    def record_execution(self, arm: int, covered: CoverageSet) -> Tuple[CoverageSet, CoverageSet]:
        """Merge one execution of ``arm`` and return ``(new_local, new_global)``.

        Both sets are computed against the ledger as it was before this call.
        """
        if covered.universe_size != self.universe_size:
            raise ValueError(
                f"coverage universe mismatch: ledger has {self.universe_size}, "
                f"execution reports {covered.universe_size}"
            )
        local = covered.bits & ~self._per_arm[arm]
        glob = local & ~self._global
        self._per_arm[arm] |= local
        self._global |= local
        n = self.universe_size
        return CoverageSet(n, local), CoverageSet(n, glob)

    def clear_arm(self, arm: int) -> None:
        self._per_arm[arm] = 0


@dataclass(frozen=True)
class RewardParams:
    alpha: float = 0.25
    # alpha*|L \ G| + (1-alpha)*|G| instead of alpha*|L| + (1-alpha)*|G|
    disjoint: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


def compute_reward(new_local: CoverageSet, new_global: CoverageSet, params: RewardParams) -> float:
    if not new_global.issubset(new_local):
        raise ValueError("new_global is not a subset of new_local")
    n_local, n_global = len(new_local), len(new_global)
    if params.disjoint:
        n_local -= n_global
    return params.alpha * n_local + (1.0 - params.alpha) * n_global


@dataclass
class SaturationMonitor:
    """Flags an arm once it goes ``gamma`` consecutive picks without new local coverage."""

    gamma: int = 3
    zero_streak: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError(f"gamma must be a positive integer, got {self.gamma}")

    def observe(self, arm: int, new_local_count: int) -> bool:
        if new_local_count > 0:
            self.zero_streak[arm] = 0
            return False
        streak = self.zero_streak.get(arm, 0) + 1
        if streak >= self.gamma:
            self.zero_streak[arm] = 0
            return True
        self.zero_streak[arm] = streak
        return False

    def clear(self, arm: int) -> None:
        self.zero_streak[arm] = 0


def clear_arm(ledger: CoverageLedger, monitor: SaturationMonitor, arm: int) -> None:
    ledger.clear_arm(arm)
    monitor.clear(arm)
