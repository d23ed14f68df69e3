import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banditfuzz.coverage import (
    CoverageLedger,
    CoverageSet,
    RewardParams,
    SaturationMonitor,
    clear_arm,
    compute_reward,
)

from oracles import brute_force_ledger


def cs(*points, n=16):
    return CoverageSet.of(n, points)


def test_set_algebra():
    a, b = cs(1, 2, 3), cs(3, 4)
    assert (a | b).to_set() == {1, 2, 3, 4}
    assert (a & b).to_set() == {3}
    assert (a - b).to_set() == {1, 2}
    assert len(a) == 3 and 2 in a and 5 not in a
    assert cs(3).issubset(a) and not b.issubset(a)
    assert not cs() and cs(0)


def test_set_rejects_bad_points_and_universes():
    with pytest.raises(ValueError):
        CoverageSet.of(4, [4])
    with pytest.raises(ValueError):
        cs(1) | CoverageSet.of(8, [1])


def test_record_execution_example():
    ledger = CoverageLedger(16, 2)
    ledger.record_execution(0, cs(3, 5))
    ledger.record_execution(1, cs(7))
    new_local, new_global = ledger.record_execution(0, cs(3, 7, 9))
    assert new_local.to_set() == {7, 9}
    assert new_global.to_set() == {9}
    assert ledger.arm_covered(0).to_set() == {3, 5, 7, 9}
    assert ledger.global_count == 4


def test_repeat_execution_is_not_new():
    ledger = CoverageLedger(16, 1)
    ledger.record_execution(0, cs(1, 2))
    assert ledger.record_execution(0, cs(1, 2)) == (cs(), cs())


def test_clear_arm_keeps_global():
    ledger = CoverageLedger(16, 2)
    ledger.record_execution(0, cs(1, 2))
    ledger.clear_arm(0)
    new_local, new_global = ledger.record_execution(0, cs(1, 2))
    assert new_local.to_set() == {1, 2} and not new_global
    assert ledger.global_count == 2


def test_ledger_universe_mismatch():
    with pytest.raises(ValueError):
        CoverageLedger(16, 1).record_execution(0, CoverageSet.of(8, [1]))


events_strategy = st.lists(
    st.one_of(
        st.tuples(st.just("exec"), st.integers(0, 2), st.frozensets(st.integers(0, 19), max_size=8)),
        st.tuples(st.just("clear"), st.integers(0, 2)),
    ),
    max_size=60,
)


@settings(max_examples=150, deadline=None)
@given(events=events_strategy)
def test_ledger_matches_brute_force_replay(events):
    ledger = CoverageLedger(20, 3)
    got = []
    for ev in events:
        if ev[0] == "exec":
            nl, ng = ledger.record_execution(ev[1], CoverageSet.of(20, ev[2]))
            assert ng.issubset(nl)
            got.append((nl.to_set(), ng.to_set()))
        else:
            ledger.clear_arm(ev[1])
    assert got == brute_force_ledger(events, 20)


@settings(max_examples=100, deadline=None)
@given(events=events_strategy)
def test_global_is_union_of_everything_seen(events):
    ledger = CoverageLedger(20, 3)
    seen = set()
    for ev in events:
        if ev[0] == "exec":
            ledger.record_execution(ev[1], CoverageSet.of(20, ev[2]))
            seen |= ev[2]
        else:
            ledger.clear_arm(ev[1])
        for arm in range(3):
            assert ledger.arm_covered(arm).issubset(ledger.global_covered)
    assert ledger.global_covered.to_set() == seen


def test_reward_example():
    assert compute_reward(cs(1, 2, 3), cs(3), RewardParams(0.25)) == 1.5
    assert compute_reward(cs(1, 2), cs(2), RewardParams(0.25)) == 1.25
    assert compute_reward(cs(), cs(), RewardParams()) == 0.0


def test_reward_disjoint_variant():
    assert compute_reward(cs(1, 2), cs(2), RewardParams(0.25, disjoint=True)) == 1.0


def test_reward_requires_subset():
    with pytest.raises(ValueError):
        compute_reward(cs(1), cs(2), RewardParams())


@pytest.mark.parametrize("alpha", [-0.01, 1.5])
def test_alpha_range(alpha):
    with pytest.raises(ValueError):
        RewardParams(alpha)


@settings(max_examples=100, deadline=None)
@given(
    points=st.frozensets(st.integers(0, 15)),
    data=st.data(),
    alpha=st.floats(0, 1),
)
def test_reward_bounds(points, data, alpha):
    glob = data.draw(st.frozensets(st.sampled_from(sorted(points)))) if points else frozenset()
    r = compute_reward(cs(*points), cs(*glob), RewardParams(alpha))
    assert 0.0 <= r <= len(points) + 1e-12
    assert r >= len(glob) - 1e-12


def test_monitor_fires_on_gamma_zeros():
    m = SaturationMonitor(3)
    assert [m.observe(0, c) for c in (0, 0, 0)] == [False, False, True]


def test_monitor_streak_broken_by_progress():
    m = SaturationMonitor(3)
    assert [m.observe(0, c) for c in (0, 0, 2, 0, 0)] == [False] * 5
    assert m.observe(0, 0)


def test_monitor_counts_per_arm():
    m = SaturationMonitor(2)
    assert not m.observe(0, 0)
    assert not m.observe(1, 0)
    assert m.observe(0, 0)
    assert m.observe(1, 0)


def test_monitor_gamma_one():
    m = SaturationMonitor(1)
    assert m.observe(4, 0)
    assert not m.observe(4, 1)


def test_monitor_rejects_bad_gamma():
    with pytest.raises(ValueError):
        SaturationMonitor(0)


@settings(max_examples=100, deadline=None)
@given(gamma=st.integers(1, 6), counts=st.lists(st.integers(0, 2), max_size=50))
def test_monitor_fires_exactly_at_runs_of_gamma(gamma, counts):
    m = SaturationMonitor(gamma)
    streak = 0
    for c in counts:
        fired = m.observe(0, c)
        streak = 0 if c else streak + 1
        assert fired == (streak == gamma)
        if fired:
            streak = 0


def test_clear_arm_resets_both():
    ledger = CoverageLedger(16, 2)
    m = SaturationMonitor(3)
    ledger.record_execution(0, cs(1))
    ledger.record_execution(1, cs(2))
    m.observe(0, 0)
    m.observe(0, 0)
    clear_arm(ledger, m, 0)
    assert not ledger.arm_covered(0)
    assert ledger.arm_covered(1).to_set() == {2}
    assert not m.observe(0, 0)
    assert not m.observe(0, 0)
    assert m.observe(0, 0)
