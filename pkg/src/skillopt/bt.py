"""Behavior trees compiled from plans.

Sequences and fallbacks keep memory: a child that finished is not ticked
again during the same episode. ``Action`` nodes delegate to a skill handler
in the environment, which advances at most one control step per tick.
"""

from __future__ import annotations

import copy
import enum
from typing import Any, Callable, Mapping, Protocol

from .planner import Plan, apply
from .world_model import LearnableParamSpec, Relation, Scene, SkillBinding, ground_skill


class TickStatus(enum.Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"
    RUNNING = "Running"


class BindingError(ValueError):
    pass


class UnboundParameterError(RuntimeError):
    pass


class Environment(Protocol):
    def tick_skill(self, binding: SkillBinding, memory: dict) -> TickStatus: ...


class BtNode:
    def tick(self, env) -> TickStatus:
        raise NotImplementedError

    def reset(self) -> None:
        pass

    def children_nodes(self) -> list[BtNode]:
        return []

    def label(self) -> str:
        return type(self).__name__


class _Composite(BtNode):
    def __init__(self, children: list[BtNode]):
        if not children:
            raise ValueError(f"{type(self).__name__} needs at least one child")
        self.children = list(children)
        self.current = 0

    def reset(self):
        self.current = 0
        for c in self.children:
            c.reset()

    def children_nodes(self):
        return self.children


class Sequence(_Composite):
    def tick(self, env) -> TickStatus:
        while self.current < len(self.children):
            status = self.children[self.current].tick(env)
            if status is TickStatus.SUCCESS:
                self.current += 1
                continue
            return status
        return TickStatus.SUCCESS


class Fallback(_Composite):
    def tick(self, env) -> TickStatus:
        while self.current < len(self.children):
            status = self.children[self.current].tick(env)
            if status is TickStatus.FAILURE:
                self.current += 1
                continue
            return status
        return TickStatus.FAILURE


class Condition(BtNode):
    def __init__(self, name: str, check: Callable[[Any], bool]):
        self.name = name
        self.check = check

    def tick(self, env) -> TickStatus:
        return TickStatus.SUCCESS if self.check(env) else TickStatus.FAILURE

    def label(self):
        return f"Condition({self.name})"


def always_success() -> Condition:
    return Condition("true", lambda env: True)


class Action(BtNode):
    def __init__(self, binding: SkillBinding, index: int = 0):
        self.binding = binding
        self.index = index
        self.memory: dict = {}

    def tick(self, env) -> TickStatus:
        if not self.binding.fully_bound:
            names = ", ".join(s.name for s in self.binding.unbound)
            raise UnboundParameterError(f"{self.binding.skill}: unbound parameters {names}")
        return env.tick_skill(self.binding, self.memory)

    def reset(self):
        self.memory = {}

    def label(self):
        args = ", ".join(f"{k}={_fmt(v)}" for k, v in self.binding.bound.items())
        free = "".join(f", {s.name}=?" for s in self.binding.unbound)
        return f"Action({self.binding.skill}: {args}{free})"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def render(tree: BtNode) -> str:
    """Indented text, one node per line."""
    lines: list[str] = []

    def walk(node: BtNode, depth: int):
        lines.append("  " * depth + node.label())
        for child in node.children_nodes():
            walk(child, depth + 1)

    walk(tree, 0)
    return "\n".join(lines) + "\n"


def actions_of(tree: BtNode) -> list[Action]:
    out: list[Action] = []

    def walk(node):
        if isinstance(node, Action):
            out.append(node)
        for c in node.children_nodes():
            walk(c)

    walk(tree)
    return out


def compile_plan(plan: Plan, scene: Scene) -> BtNode:
    """Root sequence with one grounded action per plan step."""
    if not plan.steps:
        return Sequence([always_success()])
    state = frozenset(r.atom for r in scene.relations)
    children: list[BtNode] = []
    for i, step in enumerate(plan.steps):
        template = scene.skill(step.name)
        context = {p.name: arg for p, arg in zip(template.symbolic_params, step.args)}
        relations = [Relation.from_atom(a) for a in state]
        binding = ground_skill(scene, template, context, state=relations)
        children.append(Action(binding, i))
        state = apply(state, step)
    return Sequence(children)


def unbound_specs(tree: BtNode) -> list[LearnableParamSpec]:
    return [spec.renamed(f"{a.index}.{spec.name}") for a in actions_of(tree) for spec in a.binding.unbound]


def bind(tree: BtNode, candidate: Mapping[str, Any]) -> BtNode:
    """Copy of ``tree`` with every learnable parameter set from ``candidate``."""
    specs = {s.name: s for s in unbound_specs(tree)}
    missing = sorted(set(specs) - set(candidate))
    extra = sorted(set(candidate) - set(specs))
    if missing:
        raise BindingError(f"missing parameter(s): {', '.join(missing)}")
    if extra:
        raise BindingError(f"unknown parameter(s): {', '.join(extra)}")
    for name, spec in specs.items():
        if not spec.contains(candidate[name]):
            raise BindingError(f"{name}={candidate[name]!r} outside {spec.bounds or spec.values}")
    bound_tree = copy.deepcopy(tree)
    for action in actions_of(bound_tree):
        values = dict(action.binding.bound)
        for spec in action.binding.unbound:
            value = candidate[f"{action.index}.{spec.name}"]
            if spec.kind == "real":
                value = float(value)
            elif spec.kind == "integer":
                value = int(value)
            values[spec.name] = value
        action.binding = SkillBinding(action.binding.skill, values, ())
    bound_tree.reset()
    return bound_tree
