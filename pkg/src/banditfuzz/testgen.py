"""Tests, random seed generation, mutation, and per-arm FIFO pools."""

from __future__ import annotations

import random
import struct
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Deque, Iterable, List, Optional, Sequence, Tuple, Union

from .dut.isa import FIELDS, LEGAL_OPCODES, OPCODE_SHIFT, replace_field

DEFAULT_TEST_LENGTH = 20
VALID_WORD_PROB = 0.9

OPERATORS = ("bit_flip", "byte_flip", "replace_word", "mutate_field")
FIELD_NAMES = tuple(FIELDS)


@dataclass(frozen=True)
class Test:
    id: int
    arm_id: int
    words: Tuple[int, ...]
    parent_id: Optional[int] = None

    def __post_init__(self):
        if not self.words:
            raise ValueError("a test needs at least one instruction")
        if any(not 0 <= w <= 0xFFFF_FFFF for w in self.words):
            raise ValueError("instruction words must be unsigned 32-bit")

    def __len__(self) -> int:
        return len(self.words)

    def to_bytes(self) -> bytes:
        return struct.pack(f"<{len(self.words)}I", *self.words)


def write_test(path: Union[str, Path], test: Test) -> None:
    Path(path).write_bytes(test.to_bytes())


def read_test(path: Union[str, Path], id: int = 0, arm_id: int = 0) -> Test:
    data = Path(path).read_bytes()
    if len(data) % 4:
        raise ValueError(f"{path}: size {len(data)} is not a multiple of 4")
    return Test(id, arm_id, struct.unpack(f"<{len(data) // 4}I", data))


def random_word(rng: random.Random) -> int:
    if rng.random() < VALID_WORD_PROB:
        op = LEGAL_OPCODES[rng.randrange(len(LEGAL_OPCODES))]
        return (int(op) << OPCODE_SHIFT) | rng.getrandbits(OPCODE_SHIFT)
    return rng.getrandbits(32)


def gen_seed(
    rng: random.Random,
    length: int = DEFAULT_TEST_LENGTH,
    *,
    id: int = 0,
    arm_id: int = 0,
    max_len: Optional[int] = None,
) -> Test:
    if length < 1 or (max_len is not None and length > max_len):
        raise ValueError(f"length must be in [1, {max_len}], got {length}")
    return Test(id, arm_id, tuple(random_word(rng) for _ in range(length)))


@dataclass(frozen=True)
class MutationConfig:
    mutants_per_interesting: int = 5
    operator_weights: Tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)

    def __post_init__(self):
        if self.mutants_per_interesting < 1:
            raise ValueError("mutants_per_interesting must be positive")
        if len(self.operator_weights) != len(OPERATORS):
            raise ValueError(f"need one weight per operator {OPERATORS}")
        if any(w < 0 for w in self.operator_weights):
            raise ValueError("operator weights must be nonnegative")
        if abs(sum(self.operator_weights) - 1.0) > 1e-9:
            raise ValueError("operator weights must sum to 1")


def _bit_flip(words: List[int], rng: random.Random) -> None:
    pos = rng.randrange(32 * len(words))
    words[pos >> 5] ^= 1 << (pos & 31)


def _byte_flip(words: List[int], rng: random.Random) -> None:
    pos = rng.randrange(4 * len(words))
    words[pos >> 2] ^= 0xFF << (8 * (pos & 3))


def _replace_word(words: List[int], rng: random.Random) -> None:
    words[rng.randrange(len(words))] = random_word(rng)


def _mutate_field(words: List[int], rng: random.Random) -> None:
    i = rng.randrange(len(words))
    name = FIELD_NAMES[rng.randrange(len(FIELD_NAMES))]
    shift, bits = FIELDS[name]
    old = (words[i] >> shift) & ((1 << bits) - 1)
    new = rng.randrange((1 << bits) - 1)
    if new >= old:
        new += 1
    words[i] = replace_field(words[i], name, new)


_APPLY = {
    "bit_flip": _bit_flip,
    "byte_flip": _byte_flip,
    "replace_word": _replace_word,
    "mutate_field": _mutate_field,
}


def apply_operator(name: str, test: Test, rng: random.Random, *, id: int = 0) -> Test:
    words = list(test.words)
    _APPLY[name](words, rng)
    return Test(id, test.arm_id, tuple(words), parent_id=test.id)


def draw_operator(rng: random.Random, config: MutationConfig) -> str:
    return rng.choices(OPERATORS, weights=config.operator_weights)[0]


def mutate(
    test: Test, rng: random.Random, config: MutationConfig = MutationConfig(), *, first_id: int = 0
) -> List[Test]:
    """Return ``config.mutants_per_interesting`` single-operator mutants of
    ``test`` with consecutive ids starting at ``first_id``."""
    return [
        apply_operator(draw_operator(rng, config), test, rng, id=first_id + k)
        for k in range(config.mutants_per_interesting)
    ]


class TestPool:
    """FIFO queue of tests for one arm. ``pop`` returns ``None`` when empty."""

    __test__ = False  # not a pytest class

    def __init__(self, tests: Iterable[Test] = ()):
        self._queue: Deque[Test] = deque(tests)

    def push(self, test: Test) -> None:
        self._queue.append(test)

    def extend(self, tests: Iterable[Test]) -> None:
        self._queue.extend(tests)

    def pop(self) -> Optional[Test]:
        return self._queue.popleft() if self._queue else None

    def clear(self) -> None:
        self._queue.clear()

    def __len__(self) -> int:
        return len(self._queue)

    def __iter__(self):
        return iter(self._queue)


Test.__test__ = False  # type: ignore[attr-defined]


def pool_push(pool: TestPool, test: Test) -> None:
    pool.push(test)


def pool_pop(pool: TestPool) -> Optional[Test]:
    return pool.pop()
