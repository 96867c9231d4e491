import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from skillopt.mobo.acquisition import expected_improvement, normalize_objectives, scalarize, simplex_weights


def test_zero_variance_cases():
    assert expected_improvement(2.0, 0.0, 1.0) == 0.0
    assert expected_improvement(0.0, 0.0, 1.0) == 1.0


def test_standard_normal_value():
    assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)
    assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(0.39894, abs=1e-5)


def ei_mpmath(mean, var, best):
    mp.mp.dps = 40
    s = mp.sqrt(mp.mpf(var))
    z = (mp.mpf(best) - mean) / s
    return (mp.mpf(best) - mean) * mp.ncdf(z) + s * mp.npdf(z)


def test_against_high_precision_oracle():
    rng = np.random.default_rng(0)
    mean, var, best = rng.normal(size=1000), rng.uniform(1e-4, 4.0, 1000), rng.normal(size=1000)
    ei = expected_improvement(mean, var, best)
    want = np.array([float(ei_mpmath(m, v, b)) for m, v, b in zip(mean, var, best)])
    assert np.allclose(ei, want, rtol=1e-9, atol=1e-12)


@given(st.floats(-50, 50), st.floats(0, 100), st.floats(-50, 50))
def test_nonnegative(mean, var, best):
    assert expected_improvement(mean, var, best) >= 0.0


def test_scalarize_examples():
    assert scalarize([0.0, 0.0], [0.3, 0.7]) == 0.0
    assert scalarize([0.4, 0.9], [1.0, 0.0], 0.05) == pytest.approx(0.42)
    assert scalarize(np.array([[0.4, 0.9], [0.0, 0.0]]), [1.0, 0.0]).tolist() == pytest.approx([0.42, 0.0])


unit = st.floats(0, 1)


@given(st.lists(unit, min_size=2, max_size=4), st.lists(st.floats(0, 0.5), min_size=4, max_size=4),
       st.lists(st.floats(0.01, 1), min_size=4, max_size=4), st.integers(0, 3))
def test_scalarize_monotone(y, gap, w, j):
    p = len(y)
    y = np.array(y)
    gap = np.array(gap[:p])
    j %= p
    gap[j] = max(gap[j], 1e-6)
    w = np.array(w[:p]) / np.sum(w[:p])
    assume(np.all(np.isfinite(y + gap)))
    assert scalarize(y, w) < scalarize(y + gap, w)


def test_normalize_objectives():
    Y = np.array([[1.0, 5.0], [3.0, 5.0], [2.0, 5.0]])
    assert normalize_objectives(Y).tolist() == [[0.0, 0.5], [1.0, 0.5], [0.5, 0.5]]


def test_simplex_weights():
    w = simplex_weights(3, np.random.default_rng(0))
    assert w.shape == (3,) and w.min() > 0 and w.sum() == pytest.approx(1.0)
