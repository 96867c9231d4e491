import numpy as np
import pytest

from skillopt.mobo.space import ParameterSpace, SpaceError, initial_design, sobol_points
from skillopt.world_model import LearnableParamSpec as Spec

MIXED = ParameterSpace((
    Spec("gain", "real", bounds=(0.0, 10.0)),
    Spec("steps", "integer", bounds=(1, 6)),
    Spec("mode", "categorical", values=("A", "B", "C")),
    Spec("level", "ordinal", values=("low", "mid", "high")),
))


def test_examples():
    x = MIXED.encode({"gain": 5.0, "steps": 1, "mode": "B", "level": "high"})
    assert MIXED.d == 6
    assert x.tolist() == [0.5, 0.0, 0.0, 1.0, 0.0, 1.0]


def test_round_trip_random_candidates():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        c = MIXED.sample(rng)
        back = MIXED.decode(MIXED.encode(c))
        assert {k: v for k, v in back.items() if k != "gain"} == {k: v for k, v in c.items() if k != "gain"}
        assert back["gain"] == pytest.approx(c["gain"], abs=1e-12)


def test_decode_is_nearest_legal():
    c = MIXED.decode(np.array([1.3, 0.49, 0.2, 0.7, 0.1, 0.74]))
    assert c == {"gain": 10.0, "steps": 3, "mode": "B", "level": "mid"}


def test_snap_many_agrees_with_snap():
    X = np.random.default_rng(1).uniform(-0.2, 1.2, size=(200, MIXED.d))
    assert np.allclose(MIXED.snap_many(X), np.stack([MIXED.snap(x) for x in X]))


def test_out_of_bounds_and_shape_errors():
    with pytest.raises(SpaceError):
        MIXED.encode({"gain": 11.0, "steps": 1, "mode": "A", "level": "low"})
    with pytest.raises(SpaceError):
        MIXED.encode({"gain": 1.0, "steps": 1, "mode": "D", "level": "low"})
    with pytest.raises(SpaceError):
        MIXED.encode({"gain": 1.0})
    with pytest.raises(SpaceError):
        MIXED.decode(np.zeros(3))
    with pytest.raises(SpaceError):
        ParameterSpace(())
    with pytest.raises(SpaceError):
        ParameterSpace((Spec("a", "real", bounds=(0, 1)), Spec("a", "real", bounds=(0, 1))))


def test_initial_design_distinct_and_legal():
    design = initial_design(MIXED, 20, seed=3)
    assert len(design) == 20
    assert len({MIXED.key(c) for c in design}) == 20
    assert all(MIXED.contains(c) for c in design)
    assert design == initial_design(MIXED, 20, seed=3)


def test_sobol_points_in_cube():
    pts = sobol_points(4, 1000, 0)
    assert pts.shape == (1000, 4) and pts.min() >= 0 and pts.max() < 1
