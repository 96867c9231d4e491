import math

import numpy as np

from skillopt.sim.world import EVAL_STREAM_BASE, evaluation_worlds, sample_world, sample_worlds, world_rng


def test_deterministic(peg_config, push_config):
    for cfg in (peg_config, push_config):
        assert sample_worlds(cfg.task, 4, 7) == sample_worlds(cfg.task, 4, 7)
        assert sample_worlds(cfg.task, 4, 7) != sample_worlds(cfg.task, 5, 7)


def test_seven_worlds(peg_config):
    worlds = sample_worlds(peg_config.task, 0, 7)
    assert len(worlds) == 7
    assert all(w.start_index < peg_config.task.n_known_starts for w in worlds)


def test_prefix_stable(peg_config):
    assert sample_worlds(peg_config.task, 2, 3) == sample_worlds(peg_config.task, 2, 7)[:3]


def test_push_goal_perturbation_mean(push_config):
    s = push_config.task
    goals = np.array([sample_world(s, 0, i).goal_pose[:2] for i in range(10_000)]) - np.array(s.goal_pose[:2])
    assert np.all(np.abs(goals.mean(axis=0)) <= 0.001)
    assert np.all(np.abs(goals.std(axis=0) - 0.01) <= 0.0005)


def test_disc_radii(peg_config, push_config):
    for i in range(2000):
        w = sample_world(peg_config.task, 1, i)
        assert w.belief_error <= 0.004
        assert 0.2 <= w.mu <= 1.0 and math.isclose(w.seat_force, 10.0 * w.mu)
        v = sample_world(push_config.task, 1, i)
        bx, by = push_config.task.com_bias
        assert math.hypot(v.com_offset[0] - bx, v.com_offset[1] - by) <= 0.03


def test_evaluation_covers_all_starts(peg_config):
    s = peg_config.task
    worlds = evaluation_worlds(s, 0, 2)
    assert len(worlds) == 2 * s.n_starts
    assert sorted({w.start_index for w in worlds}) == list(range(s.n_starts))
    assert all(w.stream >= EVAL_STREAM_BASE for w in worlds)
    assert len({w.stream for w in worlds}) == len(worlds)


def test_world_rng_streams_independent():
    a = world_rng(0, 1).random(4)
    assert not np.array_equal(a, world_rng(0, 2).random(4))
    assert not np.array_equal(a, world_rng(1, 1).random(4))
    assert np.array_equal(a, world_rng(0, 1).random(4))
