"""Seed-scheduling bandits (epsilon-greedy, UCB, EXP3) with arm resets.

An arm reset means the arm's seed was replaced, so its statistics must
describe a fresh arm: epsilon-greedy and UCB zero the value estimate and
pull count, EXP3 gives the arm the mean weight of the other arms.

Randomness comes from one ``random.Random`` stream per bandit and is consumed
in a fixed order, so a seed fully determines the selection sequence:

* epsilon-greedy: one uniform variate compared against epsilon, then one arm
  draw if exploring, otherwise a draw only when several arms tie for the max;
* UCB: a draw only to break ties (unpulled arms rank above all others);
* EXP3: one uniform variate for inverse-CDF sampling.
"""

from __future__ import annotations

import math
import random
import sys
from dataclasses import dataclass
from typing import List, Sequence, Union


@dataclass(frozen=True)
class EpsilonGreedy:
    epsilon: float = 0.1
    name = "egreedy"

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")


@dataclass(frozen=True)
class UCB:
    name = "ucb"


@dataclass(frozen=True)
class EXP3:
    eta: float = 0.1
    name = "exp3"

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")


AlgorithmKind = Union[EpsilonGreedy, UCB, EXP3]


@dataclass
class ArmStats:
    arm_id: int
    q_value: float = 0.0
    pull_count: int = 0
    weight: float = 1.0
    last_prob: float = 0.0


# EXP3 only depends on weight ratios; rescale before overflow
_RESCALE_ABOVE = 1e250


class Bandit:
    def __init__(
        self,
        algorithm: AlgorithmKind,
        num_arms: int,
        total_points: int = 1,
        rng: Union[int, random.Random, None] = 0,
    ):
        if not isinstance(algorithm, (EpsilonGreedy, UCB, EXP3)):
            raise TypeError(f"unsupported algorithm {algorithm!r}")
        # a single arm is only meaningful for the value-based algorithms
        # (the EXP3 reset averages over the other arms)
        min_arms = 2 if isinstance(algorithm, EXP3) else 1
        if num_arms < min_arms:
            raise ValueError(f"num_arms must be at least {min_arms}, got {num_arms}")
        if total_points < 1:
            raise ValueError(f"total_points must be at least 1, got {total_points}")
        self.algorithm = algorithm
        self.total_points = total_points
        self.rng = rng if isinstance(rng, random.Random) else random.Random(rng)
        self.arms: List[ArmStats] = [ArmStats(i) for i in range(num_arms)]
        self.time_step = 0
        if isinstance(algorithm, EXP3):
            self.probabilities()

    @property
    def num_arms(self) -> int:
        return len(self.arms)

    def probabilities(self) -> List[float]:
        """EXP3 mixing distribution; refreshes every arm's ``last_prob``."""
        eta = self.algorithm.eta
        n = len(self.arms)
        total = math.fsum(a.weight for a in self.arms)
        probs = []
        for a in self.arms:
            a.last_prob = (1.0 - eta) * a.weight / total + eta / n
            probs.append(a.last_prob)
        return probs

    def _argmax(self, values: Sequence[float]) -> int:
        best = max(values)
        winners = [i for i, v in enumerate(values) if v == best]
        if len(winners) == 1:
            return winners[0]
        return winners[self.rng.randrange(len(winners))]

    def select_arm(self) -> int:
        self.time_step += 1
        algo = self.algorithm
        rng = self.rng
        if isinstance(algo, EpsilonGreedy):
            if rng.random() < algo.epsilon:
                return rng.randrange(len(self.arms))
            return self._argmax([a.q_value for a in self.arms])
        if isinstance(algo, UCB):
            unpulled = [a.arm_id for a in self.arms if a.pull_count == 0]
            if unpulled:
                if len(unpulled) == 1:
                    return unpulled[0]
                return unpulled[rng.randrange(len(unpulled))]
            log_t = math.log(self.time_step)
            return self._argmax(
                [a.q_value + math.sqrt(2.0 * log_t / a.pull_count) for a in self.arms]
            )
        probs = self.probabilities()
        u = rng.random()
        acc = 0.0
        for i, p in enumerate(probs):
            acc += p
            if u < acc:
                return i
        return len(probs) - 1

    def update(self, arm: int, raw_reward: float) -> None:
        if raw_reward < 0:
            raise ValueError(f"reward must be nonnegative, got {raw_reward}")
        stats = self.arms[arm]
        if isinstance(self.algorithm, EXP3):
            reward = raw_reward / self.total_points
            x = reward / stats.last_prob
            stats.weight *= math.exp(self.algorithm.eta * x / len(self.arms))
            if stats.weight > _RESCALE_ABOVE:
                self._rescale()
        else:
            stats.pull_count += 1
            stats.q_value += (raw_reward - stats.q_value) / stats.pull_count

    def _rescale(self) -> None:
        top = max(a.weight for a in self.arms)
        for a in self.arms:
            a.weight = max(a.weight / top, sys.float_info.min)

    def reset_arm(self, arm: int) -> None:
        stats = self.arms[arm]
        if isinstance(self.algorithm, EXP3):
            others = [a.weight for a in self.arms if a.arm_id != arm]
            stats.weight = math.fsum(others) / len(others)
        else:
            stats.q_value = 0.0
            stats.pull_count = 0


def init_bandit(
    algorithm: AlgorithmKind, num_arms: int, total_points: int, rng_seed: int
) -> Bandit:
    return Bandit(algorithm, num_arms, total_points, rng_seed)


def algorithm_from_name(name: str, *, epsilon: float = 0.1, eta: float = 0.1) -> AlgorithmKind:
    name = name.lower()
    if name in ("egreedy", "epsilon-greedy", "epsilon_greedy"):
        return EpsilonGreedy(epsilon)
    if name == "ucb":
        return UCB()
    if name == "exp3":
        return EXP3(eta)
    raise ValueError(f"unknown bandit algorithm {name!r}")
