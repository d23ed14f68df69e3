"""Campaign loops: bandit-scheduled fuzzing with per-arm pools, and the
single-queue FIFO baseline it is compared against."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field, replace
from typing import Dict, List, NamedTuple, Optional, Sequence

from .bandit import EXP3, UCB, AlgorithmKind, Bandit, EpsilonGreedy
from .coverage import CoverageLedger, RewardParams, SaturationMonitor, compute_reward
from .dut import ALL_BUGS, Bug, BugConfig, Mismatch
from .targets import ToyCpuTarget
from .testgen import (
    DEFAULT_TEST_LENGTH,
    MutationConfig,
    Test,
    TestPool,
    gen_seed,
    mutate,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("egreedy", "ucb", "exp3", "fifo")
BANDIT_ALGORITHMS = ("egreedy", "ucb", "exp3")


@dataclass(frozen=True)
class CampaignConfig:
    algorithm: str = "ucb"
    num_arms: int = 10
    alpha: float = 0.25
    gamma: int = 3
    eta: float = 0.1
    epsilon: float = 0.1
    budget: int = 50_000
    rng_seed: int = 0
    bugs: BugConfig = ALL_BUGS
    test_length: int = DEFAULT_TEST_LENGTH
    mutants_per_interesting: int = 5
    operator_weights: tuple = (0.25, 0.25, 0.25, 0.25)
    # saturation resets; with False an empty pool is refilled with a fresh
    # seed but the arm's statistics are kept
    resets: bool = True
    # "local": new_local != {} makes a test interesting, "global": new_global != {}
    interesting: str = "local"
    disjoint_reward: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.num_arms < 1:
            raise ValueError(f"num_arms must be >= 1, got {self.num_arms}")
        if self.algorithm == "exp3" and self.num_arms < 2:
            raise ValueError("exp3 needs at least 2 arms")
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not 1 <= self.test_length:
            raise ValueError(f"test_length must be >= 1, got {self.test_length}")
        if self.interesting not in ("local", "global"):
            raise ValueError(f"interesting must be 'local' or 'global', got {self.interesting!r}")
        RewardParams(self.alpha)
        self.mutation_config()
        if self.algorithm != "fifo":
            self.bandit_algorithm()

    def bandit_algorithm(self) -> AlgorithmKind:
        if self.algorithm == "egreedy":
            return EpsilonGreedy(self.epsilon)
        if self.algorithm == "ucb":
            return UCB()
        if self.algorithm == "exp3":
            return EXP3(self.eta)
        raise ValueError("the FIFO baseline has no bandit")

    def mutation_config(self) -> MutationConfig:
        return MutationConfig(self.mutants_per_interesting, tuple(self.operator_weights))

    def reward_params(self) -> RewardParams:
        return RewardParams(self.alpha, self.disjoint_reward)


class IterationRecord(NamedTuple):
    t: int
    arm_id: int
    reward: float
    new_local: int
    new_global: int
    cum_cov: int
    reset: bool
    reset_reason: str  # "", "sat" or "empty"
    bugs_detected: int
    test_id: int


class Detection(NamedTuple):
    index: int
    test: Test
    mismatches: Sequence[Mismatch]


@dataclass
class CampaignReport:
    config: CampaignConfig
    universe_size: int
    records: List[IterationRecord] = field(default_factory=list)
    detections: Dict[Bug, Detection] = field(default_factory=dict)

    @property
    def tests_run(self) -> int:
        return len(self.records)

    @property
    def resets(self) -> int:
        return sum(1 for r in self.records if r.reset)

    @property
    def final_coverage(self) -> int:
        return self.records[-1].cum_cov if self.records else 0

    @property
    def detection_indices(self) -> Dict[Bug, int]:
        return {b: d.index for b, d in self.detections.items()}

    def tests_to_reach(self, coverage: int) -> Optional[int]:
        for r in self.records:
            if r.cum_cov >= coverage:
                return r.t
        return None


def _rng(seed: int, stream: str) -> random.Random:
    return random.Random(f"{seed}/{stream}")


class _CampaignBase:
    def __init__(self, config: CampaignConfig, target=None):
        self.config = config
        self.target = target if target is not None else ToyCpuTarget(config.bugs)
        self.universe_size = self.target.universe_size
        self.test_rng = _rng(config.rng_seed, "tests")
        self.mutation = config.mutation_config()
        self.reward_params = config.reward_params()
        self.report = CampaignReport(config, self.universe_size)
        self.parents: Dict[int, Optional[int]] = {}
        self._next_id = 0
        self.t = 0

    def _fresh_seed(self, arm_id: int) -> Test:
        test = gen_seed(self.test_rng, self.config.test_length, id=self._next_id, arm_id=arm_id)
        self._next_id += 1
        self.parents[test.id] = None
        return test

    def _mutants(self, test: Test) -> List[Test]:
        out = mutate(test, self.test_rng, self.mutation, first_id=self._next_id)
        self._next_id += len(out)
        for m in out:
            self.parents[m.id] = test.id
        return out

    def _credit(self, test: Test, mismatches: Sequence[Mismatch]) -> None:
        if not mismatches:
            return
        first = mismatches[0]
        if first.bug is not None and first.bug not in self.report.detections:
            self.report.detections[first.bug] = Detection(self.t, test, tuple(mismatches))
            log.debug("t=%d: %s detected", self.t, first.bug.name)

    def run(self) -> CampaignReport:
        while self.t < self.config.budget:
            self.step()
        return self.report


class Campaign(_CampaignBase):
    """Bandit-scheduled campaign: every arm owns a seed and a FIFO pool."""

    def __init__(self, config: CampaignConfig, target=None, seeds: Optional[Sequence[Sequence[int]]] = None):
        super().__init__(config, target)
        n = config.num_arms
        self.bandit = Bandit(config.bandit_algorithm(), n, self.universe_size, _rng(config.rng_seed, "bandit"))
        self.ledger = CoverageLedger(self.universe_size, n)
        self.monitor = SaturationMonitor(config.gamma)
        self.pools: List[TestPool] = []
        self.seeds: List[Test] = []
        for arm in range(n):
            if seeds is not None:
                seed = Test(self._next_id, arm, tuple(seeds[arm]))
                self._next_id += 1
                self.parents[seed.id] = None
            else:
                seed = self._fresh_seed(arm)
            self.seeds.append(seed)
            self.pools.append(TestPool([seed]))

    def reset_arm(self, arm: int) -> None:
        seed = self._fresh_seed(arm)
        self.seeds[arm] = seed
        self.pools[arm].clear()
        self.pools[arm].push(seed)
        self.ledger.clear_arm(arm)
        self.monitor.clear(arm)
        self.bandit.reset_arm(arm)

    def _force(self, arm: int) -> None:
        self.bandit.time_step += 1
        if isinstance(self.bandit.algorithm, EXP3):
            self.bandit.probabilities()

    def step(self, forced_arm: Optional[int] = None) -> IterationRecord:
        """One iteration; ``forced_arm`` bypasses selection (to replay history)."""
        self.t += 1
        if forced_arm is None:
            arm = self.bandit.select_arm()
        else:
            arm = forced_arm
            self._force(arm)

        reason = ""
        test = self.pools[arm].pop()
        if test is None:
            if self.config.resets:
                self.reset_arm(arm)
                reason = "empty"
            else:
                self.pools[arm].push(self._fresh_seed(arm))
            test = self.pools[arm].pop()

        execution = self.target.execute(test)
        new_local, new_global = self.ledger.record_execution(arm, execution.coverage)
        reward = compute_reward(new_local, new_global, self.reward_params)
        self.bandit.update(arm, reward)

        gate = new_local if self.config.interesting == "local" else new_global
        if gate:
            self.pools[arm].extend(self._mutants(test))

        if self.config.resets and self.monitor.observe(arm, len(new_local)):
            self.reset_arm(arm)
            reason = "sat"

        self._credit(test, execution.mismatches)
        rec = IterationRecord(
            self.t, arm, reward, len(new_local), len(new_global), self.ledger.global_count,
            bool(reason), reason, len(self.report.detections), test.id,
        )
        self.report.records.append(rec)
        return rec


class BaselineCampaign(_CampaignBase):
    """Single global FIFO queue; only globally new coverage is interesting."""

    def __init__(self, config: CampaignConfig, target=None):
        super().__init__(config, target)
        self.ledger = CoverageLedger(self.universe_size, 1)
        self.pool = TestPool(self._fresh_seed(0) for _ in range(config.num_arms))

    def step(self) -> IterationRecord:
        self.t += 1
        test = self.pool.pop()
        if test is None:
            self.pool.push(self._fresh_seed(0))
            test = self.pool.pop()
        execution = self.target.execute(test)
        new_local, new_global = self.ledger.record_execution(0, execution.coverage)
        reward = compute_reward(new_local, new_global, self.reward_params)
        if new_global:
            self.pool.extend(self._mutants(test))
        self._credit(test, execution.mismatches)
        rec = IterationRecord(
            self.t, 0, reward, len(new_local), len(new_global), self.ledger.global_count,
            False, "", len(self.report.detections), test.id,
        )
        self.report.records.append(rec)
        return rec


def run_campaign(config: CampaignConfig, target=None) -> CampaignReport:
    if config.algorithm == "fifo":
        return run_baseline(config, target)
    return Campaign(config, target).run()


def run_baseline(config: CampaignConfig, target=None) -> CampaignReport:
    if config.algorithm != "fifo":
        config = replace(config, algorithm="fifo")
    return BaselineCampaign(config, target).run()


@dataclass
class Speedup:
    per_bug: Dict[Bug, Optional[float]]
    coverage_speedup: Optional[float]
    coverage_increment: float  # percentage points of the universe


def speedup(base: CampaignReport, treatment: CampaignReport) -> Speedup:
    """Detection and coverage speedups of ``treatment`` over ``base``.

    A bug either run misses maps to ``None``. Coverage speedup compares the
    tests each run needs to reach the smaller of the two final coverages.
    """
    if base.config.bugs != treatment.config.bugs or base.config.budget != treatment.config.budget:
        raise ValueError("speedup needs reports with the same bug configuration and budget")
    if base.universe_size != treatment.universe_size:
        raise ValueError("speedup needs reports over the same coverage universe")
    per_bug: Dict[Bug, Optional[float]] = {}
    for bug in sorted(base.config.bugs, key=lambda b: b.name):
        b, t = base.detections.get(bug), treatment.detections.get(bug)
        per_bug[bug] = b.index / t.index if b and t else None
    target = min(base.final_coverage, treatment.final_coverage)
    cov_speedup = None
    if target > 0:
        cov_speedup = base.tests_to_reach(target) / treatment.tests_to_reach(target)
    increment = 100.0 * (treatment.final_coverage - base.final_coverage) / base.universe_size
    return Speedup(per_bug, cov_speedup, increment)
