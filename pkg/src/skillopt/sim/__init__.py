from .engine import (
    DEFAULT_MAX_TICKS,
    TRACE_COLUMNS,
    EpisodeTrace,
    PegSearch,
    PushProgress,
    SimState,
    SimulationError,
    Simulator,
    run_episode,
    step_peg,
    step_push,
    wrap_angle,
)
from .spiral import SpiralTracker, arc_length, spiral_reference
from .world import ControllerParams, TaskSettings, WorldConfig, evaluation_worlds, sample_world, sample_worlds
