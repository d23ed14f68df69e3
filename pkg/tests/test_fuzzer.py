import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banditfuzz.dut import ALL_BUGS, NO_BUGS, Bug
from banditfuzz.fuzzer import (
    BaselineCampaign,
    Campaign,
    CampaignConfig,
    CampaignReport,
    Detection,
    IterationRecord,
    run_campaign,
    speedup,
)
from banditfuzz.targets import ScriptedTarget
from banditfuzz.testgen import Test


class RecordingTarget:
    """Wraps a target and remembers the words of every executed test."""

    def __init__(self, inner):
        self.inner = inner
        self.universe_size = inner.universe_size
        self.executed = []

    def execute(self, test):
        self.executed.append(test.words)
        return self.inner.execute(test)


def test_scripted_hand_simulation():
    # arm 1 covers {2,3,4} once, then nothing; arm 0 would cover {0,1}
    target = ScriptedTarget(10, {0: [[0, 1]], 1: [[2, 3, 4]]})
    cfg = CampaignConfig("egreedy", num_arms=3, epsilon=0.0, budget=5, rng_seed=3, bugs=NO_BUGS)
    camp = Campaign(cfg, target)

    # the two all-zero ties (t=1 and after the reset) draw from the bandit stream
    mirror = random.Random("3/bandit")
    mirror.random()
    assert mirror.randrange(3) == 1
    for _ in range(3):
        mirror.random()
    mirror.random()
    assert mirror.randrange(3) == 2

    # t1: arm 1, |L|=|G|=3 -> R = 0.25*3 + 0.75*3 = 3, Q1 = 3
    # t2..t4: Q1 is the unique max; nothing new -> Q1 = 3/2, 3/3, 3/4
    # t4: third zero pick in a row -> reset, Q1 = 0
    # t5: all arms tied at 0 -> arm 2, empty script -> 0
    recs = [camp.step() for _ in range(5)]
    assert [r.arm_id for r in recs] == [1, 1, 1, 1, 2]
    assert [r.reward for r in recs] == [3.0, 0.0, 0.0, 0.0, 0.0]
    assert [r.reset_reason for r in recs] == ["", "", "", "sat", ""]
    assert [r.cum_cov for r in recs] == [3, 3, 3, 3, 3]
    assert camp.bandit.arms[1].q_value == 0.0 and camp.bandit.arms[1].pull_count == 0
    assert camp.bandit.arms[2].pull_count == 1


def test_time_step_counts_tests():
    target = ScriptedTarget(10, {})
    cfg = CampaignConfig("ucb", num_arms=2, budget=6, rng_seed=0, bugs=NO_BUGS)
    camp = Campaign(cfg, target)
    for _ in range(6):
        camp.step()
    assert camp.bandit.time_step == 6


def test_budget_gives_exact_record_count():
    for algo in ("egreedy", "ucb", "exp3", "fifo"):
        rep = run_campaign(CampaignConfig(algo, budget=137, rng_seed=1))
        assert rep.tests_run == 137
        assert [r.t for r in rep.records] == list(range(1, 138))


def test_untriggered_bug_absent():
    rep = run_campaign(CampaignConfig("ucb", budget=200, bugs=NO_BUGS))
    assert rep.detections == {}
    assert all(r.bugs_detected == 0 for r in rep.records)


def test_baseline_runs_seeds_first_in_order():
    cfg = CampaignConfig("fifo", num_arms=3, budget=3, bugs=NO_BUGS)
    rec = RecordingTarget(ScriptedTarget(10, {}))
    camp = BaselineCampaign(cfg, rec)
    seeds = [t.words for t in camp.pool]
    camp.run()
    assert rec.executed == seeds
    assert [r.test_id for r in camp.report.records] == [0, 1, 2]
    assert camp.report.resets == 0


def test_baseline_and_bandit_share_seed_prefix():
    cfg = CampaignConfig("ucb", budget=1, rng_seed=5)
    base = BaselineCampaign(replace(cfg, algorithm="fifo"))
    mab = Campaign(cfg)
    assert [t.words for t in base.pool] == [s.words for s in mab.seeds]

    rec_b = RecordingTarget(base.target)
    rec_m = RecordingTarget(mab.target)
    base.target, mab.target = rec_b, rec_m
    base.step()
    mab.step(forced_arm=0)
    assert rec_b.executed == rec_m.executed


def test_single_arm_greedy_degenerates_to_baseline():
    cfg = CampaignConfig(
        "egreedy", num_arms=1, budget=1500, rng_seed=2, resets=False, interesting="global"
    )
    rec_m = RecordingTarget(Campaign(cfg).target)
    mab = Campaign(cfg, rec_m)
    mab.run()
    rec_b = RecordingTarget(BaselineCampaign(replace(cfg, algorithm="fifo")).target)
    BaselineCampaign(replace(cfg, algorithm="fifo"), rec_b).run()
    assert rec_m.executed == rec_b.executed
    assert [r.cum_cov for r in mab.report.records][-1] > 0


def _check_invariants(camp: Campaign):
    rep = camp.report
    cfg = camp.config
    assert camp.bandit.time_step == rep.tests_run == cfg.budget
    covs = [r.cum_cov for r in rep.records]
    assert covs == sorted(covs)
    assert all(0 < d.index <= cfg.budget for d in rep.detections.values())

    # replay the monitor from the records
    streak = {}
    for r in rep.records:
        a = r.arm_id
        if r.reset_reason == "empty":
            streak[a] = 0
        streak[a] = 0 if r.new_local else streak.get(a, 0) + 1
        fired = streak[a] == cfg.gamma
        if fired:
            streak[a] = 0
            assert r.reset_reason == "sat"
        else:
            assert r.reset_reason in ("", "empty")
        assert r.reset == bool(r.reset_reason)
        assert r.new_global <= r.new_local

    # mutants stay with the arm that produced them
    for arm, pool in enumerate(camp.pools):
        for t in pool:
            assert t.arm_id == arm
    assert all(s.arm_id == i for i, s in enumerate(camp.seeds))


@settings(max_examples=12, deadline=None)
@given(
    algo=st.sampled_from(["egreedy", "ucb", "exp3"]),
    seed=st.integers(0, 10_000),
    arms=st.integers(2, 6),
)
def test_campaign_invariants(algo, seed, arms):
    camp = Campaign(CampaignConfig(algo, num_arms=arms, budget=400, rng_seed=seed))
    camp.run()
    _check_invariants(camp)


def test_mutants_carry_parent_arm():
    camp = Campaign(CampaignConfig("exp3", budget=500, rng_seed=4))
    camp.run()
    for pool in camp.pools:
        for t in pool:
            assert t.parent_id is None or t.parent_id in camp.parents


def test_campaign_is_deterministic():
    for algo in ("egreedy", "ucb", "exp3", "fifo"):
        cfg = CampaignConfig(algo, budget=800, rng_seed=11)
        a, b = run_campaign(cfg), run_campaign(cfg)
        assert a.records == b.records
        assert a.detection_indices == b.detection_indices


def test_different_seeds_differ():
    a = run_campaign(CampaignConfig("ucb", budget=300, rng_seed=1))
    b = run_campaign(CampaignConfig("ucb", budget=300, rng_seed=2))
    assert a.records != b.records


def test_resets_disabled_never_reset():
    rep = run_campaign(CampaignConfig("ucb", budget=600, resets=False))
    assert rep.resets == 0


def test_config_validation():
    with pytest.raises(ValueError):
        CampaignConfig("thompson")
    with pytest.raises(ValueError):
        CampaignConfig(budget=0)
    with pytest.raises(ValueError):
        CampaignConfig(alpha=2.0)
    with pytest.raises(ValueError):
        CampaignConfig("exp3", num_arms=1)


def _report(det, covs, bugs=frozenset({Bug.B1, Bug.B7}), budget=None):
    budget = budget or len(covs)
    cfg = CampaignConfig("ucb", budget=budget, bugs=bugs)
    recs = [IterationRecord(i + 1, 0, 0.0, 0, 0, c, False, "", 0, i) for i, c in enumerate(covs)]
    t = Test(0, 0, (0,))
    return CampaignReport(cfg, 100, recs, {b: Detection(i, t, ()) for b, i in det.items()})


def test_speedup_identical():
    rep = _report({Bug.B1: 10, Bug.B7: 3}, [1, 2, 5, 5])
    s = speedup(rep, rep)
    assert s.per_bug == {Bug.B1: 1.0, Bug.B7: 1.0}
    assert s.coverage_speedup == 1.0 and s.coverage_increment == 0.0


def test_speedup_ratio_and_missing():
    covs = [1] * 700
    base = _report({Bug.B1: 600, Bug.B7: 5}, covs)
    treat = _report({Bug.B1: 46}, covs)
    s = speedup(base, treat)
    assert f"{s.per_bug[Bug.B1]:.2f}" == "13.04"
    assert s.per_bug[Bug.B7] is None


def test_coverage_speedup_and_increment():
    base = _report({}, [1, 2, 3, 4, 5, 6, 7, 8])
    treat = _report({}, [2, 4, 6, 8, 9, 9, 9, 9])
    s = speedup(base, treat)
    assert s.coverage_speedup == 8 / 4
    assert s.coverage_increment == pytest.approx(1.0)


def test_speedup_rejects_mismatch():
    a = _report({}, [1, 2])
    with pytest.raises(ValueError):
        speedup(a, _report({}, [1, 2], bugs=ALL_BUGS))
    with pytest.raises(ValueError):
        speedup(a, _report({}, [1, 2, 3]))


def test_reset_reseeds_from_test_stream():
    cfg = CampaignConfig("ucb", num_arms=2, budget=1, bugs=NO_BUGS)
    camp = Campaign(cfg, ScriptedTarget(4, {}))
    old = camp.seeds[0]
    camp.reset_arm(0)
    assert camp.seeds[0].id != old.id
    assert list(camp.pools[0]) == [camp.seeds[0]]
    assert camp.parents[camp.seeds[0].id] is None


def test_forced_arm_with_exp3_keeps_probabilities():
    camp = Campaign(CampaignConfig("exp3", num_arms=3, budget=5), ScriptedTarget(6, {1: [[0, 1]]}))
    rec = camp.step(forced_arm=1)
    assert rec.arm_id == 1 and rec.reward == 2.0
    assert camp.bandit.arms[1].weight > 1.0
