"""Scenario files: scene, goal, rewards, objectives, space overrides and learning settings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .rewards import RewardError, RewardSpec
from .sim.world import ControllerParams, TaskSettings
from .world_model import LearnableParamSpec, Scene, WorldModelError

BUILTIN = ("peg", "push")


class ScenarioError(ValueError):
    """Invalid scenario content; reported before anything is simulated."""


@dataclass(frozen=True)
class LearningSettings:
    budget: int = 400
    worlds: int = 7
    seeds: int = 10
    dt: float = 0.01
    max_ticks: int = 3000
    n_initial: int = 20
    eval_reps: int = 2
    random_sets: int = 10

    def __post_init__(self):
        if self.worlds < 1:
            raise ScenarioError("learning.worlds must be >= 1")
        if self.budget < self.n_initial:
            raise ScenarioError(f"learning.budget ({self.budget}) is smaller than the initial design ({self.n_initial})")
        if self.n_initial < 1 or self.seeds < 1 or self.eval_reps < 1 or self.random_sets < 1:
            raise ScenarioError("n_initial, seeds, eval_reps and random_sets must be >= 1")
        if self.dt <= 0 or self.max_ticks < 0:
            raise ScenarioError("dt must be positive and max_ticks non-negative")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    scene: Scene
    goal: str
    rewards: tuple[RewardSpec, ...]
    objectives: tuple[str, ...]
    task: TaskSettings
    learning: LearningSettings = field(default_factory=LearningSettings)
    controller: ControllerParams = field(default_factory=ControllerParams)
    space: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    output: str = "runs"

    @property
    def p(self) -> int:
        return len(self.objectives)

    def __post_init__(self):
        if self.p < 1:
            raise ScenarioError("at least one objective is required")
        for spec in self.rewards:
            if spec.objective >= self.p:
                raise ScenarioError(f"reward {spec.kind} targets objective {spec.objective} but p = {self.p}")
        for eid in (self.task.object_id, self.task.goal_id):
            if eid is not None and not self.scene.has_entity(eid):
                raise ScenarioError(f"task refers to unknown entity {eid!r}")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ScenarioConfig:
        missing = [k for k in ("scene", "goal", "rewards", "objectives", "task") if k not in d]
        if missing:
            raise ScenarioError(f"scenario lacks section(s): {', '.join(missing)}")
        try:
            scene = Scene.from_dict(d["scene"])
            rewards = tuple(RewardSpec.from_dict(r) for r in d["rewards"])
            task = TaskSettings(**_tuples(d["task"]))
            learning_d = dict(d.get("learning", {}))
            learning = LearningSettings(**{k: v for k, v in learning_d.items() if k in _names(LearningSettings)})
            ctrl_d = dict(d.get("controller", {}))
            ctrl_d.setdefault("dt", learning.dt)
            controller = ControllerParams(**ctrl_d)
        except ScenarioError:
            raise
        except (WorldModelError, RewardError, KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"invalid scenario: {exc}") from exc
        objectives = d["objectives"]
        if isinstance(objectives, int):
            objectives = [f"objective {j}" for j in range(objectives)]
        return cls(
            name=str(d.get("name", "scenario")),
            scene=scene,
            goal=str(d["goal"]),
            rewards=rewards,
            objectives=tuple(str(o) for o in objectives),
            task=task,
            learning=learning,
            controller=controller,
            space={k: dict(v) for k, v in d.get("space", {}).items()},
            output=str(d.get("output", "runs")),
        )

    def with_learning(self, **changes) -> ScenarioConfig:
        values = {f.name: getattr(self.learning, f.name) for f in fields(LearningSettings)}
        values.update({k: v for k, v in changes.items() if v is not None})
        return _replace(self, learning=LearningSettings(**values))

    def apply_space(self, specs: list[LearnableParamSpec]) -> list[LearnableParamSpec]:
        """Learnable specs with the scenario's bound overrides applied."""
        by_name = {s.name: s for s in specs}
        unknown = sorted(set(self.space) - set(by_name))
        if unknown:
            raise ScenarioError(f"space overrides name unknown parameter(s): {', '.join(unknown)}")
        out = []
        for s in specs:
            o = self.space.get(s.name)
            if not o:
                out.append(s)
                continue
            merged = s.to_dict()
            merged.update(o)
            try:
                out.append(LearnableParamSpec.from_dict(s.name, merged))
            except (WorldModelError, ValueError) as exc:
                raise ScenarioError(f"space override for {s.name}: {exc}") from exc
        return out


def _names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def _replace(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    values = {f.name: getattr(cfg, f.name) for f in fields(ScenarioConfig)}
    values.update(changes)
    return ScenarioConfig(**values)


def _tuples(d: Mapping[str, Any]) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, list):
            v = tuple(tuple(x) if isinstance(x, list) else x for x in v)
        out[k] = v
    return out


def load_scenario(path_or_name: str | Path) -> ScenarioConfig:
    """Read a scenario JSON file, or one of the bundled scenarios by name."""
    text = None
    p = Path(path_or_name)
    if p.is_file():
        text = p.read_text()
    elif str(path_or_name) in BUILTIN:
        text = resources.files("skillopt.scenarios").joinpath(f"{path_or_name}.json").read_text()
    else:
        raise ScenarioError(f"no scenario file {str(path_or_name)!r}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path_or_name}: {exc}") from exc
    return ScenarioConfig.from_dict(data)


def builtin_path(name: str) -> Path:
    return Path(str(resources.files("skillopt.scenarios").joinpath(f"{name}.json")))
