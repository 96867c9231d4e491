import numpy as np
import pytest
from hypothesis import given, strategies as st

from skillopt.mobo.pareto import Observation, dominates, hypervolume_2d, pareto_filter


def test_dominance_examples():
    assert dominates((1, 2), (2, 3))
    assert not dominates((1, 2), (1, 2))
    assert not dominates((1, 3), (2, 2))
    with pytest.raises(ValueError):
        dominates((1, 2), (1, 2, 3))


def test_filter_examples():
    assert len(pareto_filter([Observation({}, [1.0, 1.0])])) == 1
    front = pareto_filter([(1, 2), (2, 1), (2, 2)])
    assert front.indices == [0, 1]
    assert len(pareto_filter([])) == 0


def test_duplicates_kept_in_order():
    front = pareto_filter([(2, 2), (1, 3), (2, 2), (3, 3)])
    assert front.indices == [0, 1, 2]


def brute_force(points):
    return [i for i, a in enumerate(points)
            if not any(all(b[k] <= a[k] for k in range(len(a))) and any(b[k] < a[k] for k in range(len(a)))
                       for b in points)]


def test_against_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n, p = int(rng.integers(1, 101)), int(rng.choice([2, 3, 4]))
        pts = rng.integers(0, 8, size=(n, p)).tolist()
        front = pareto_filter(pts)
        assert front.indices == brute_force(pts)
        for i in front.indices:
            assert not any(dominates(pts[j], pts[i]) for j in front.indices)
        for i in set(range(n)) - set(front.indices):
            assert any(dominates(pts[j], pts[i]) for j in front.indices)


vec = st.lists(st.integers(0, 3), min_size=3, max_size=3)


@given(vec, vec, vec)
def test_strict_partial_order(a, b, c):
    assert not dominates(a, a)
    assert not (dominates(a, b) and dominates(b, a))
    if dominates(a, b) and dominates(b, c):
        assert dominates(a, c)


def test_hypervolume_hand_example():
    assert hypervolume_2d([(1, 3), (2, 2), (3, 1)], (4, 4)) == pytest.approx(6.0)
    assert hypervolume_2d([(5, 5)], (4, 4)) == 0.0
    assert hypervolume_2d([(1, 1), (2, 2)], (3, 3)) == pytest.approx(4.0)


def test_observation_rejects_non_finite():
    with pytest.raises(ValueError):
        Observation({}, [1.0, float("nan")])
    assert Observation({}, [0.0], success=np.array([True, False])).success_rate == 0.5
