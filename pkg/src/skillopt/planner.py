"""Forward breadth-first search over ground STRIPS actions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .pddl import Atom, Domain, PddlError, Problem, check_problem
from .world_model import is_var

DEFAULT_NODE_CAP = 10**6

State = frozenset


class PlanningError(PddlError):
    pass


class UnsolvableError(PlanningError):
    pass


class NodeLimitError(PlanningError):
    pass


class InapplicableActionError(PlanningError):
    pass


@dataclass(frozen=True, order=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre_pos: frozenset = field(default=frozenset(), compare=False)
    pre_neg: frozenset = field(default=frozenset(), compare=False)
    add: frozenset = field(default=frozenset(), compare=False)
    delete: frozenset = field(default=frozenset(), compare=False)

    def render(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"


@dataclass(frozen=True)
class Plan:
    steps: tuple[GroundAction, ...]

    def __len__(self):
        return len(self.steps)

    def render(self) -> str:
        return "".join(step.render() + "\n" for step in self.steps)

    @property
    def skill_names(self) -> list[str]:
        return [s.name for s in self.steps]


def applicable(state: State, action: GroundAction) -> bool:
    return action.pre_pos <= state and not (action.pre_neg & state)


def apply(state: State, action: GroundAction) -> State:
    if not applicable(state, action):
        raise InapplicableActionError(f"{action.render()} is not applicable")
    return (state - action.delete) | action.add


def goal_satisfied(state: State, problem: Problem) -> bool:
    return set(problem.goal_pos) <= state and not (set(problem.goal_neg) & state)


def _bind(atoms: Iterable[Atom], sub: dict[str, str]) -> frozenset:
    return frozenset((a[0],) + tuple(sub[t] if is_var(t) else t for t in a[1:]) for a in atoms)


def _bind_one(atom: Atom, sub: dict[str, str]) -> Atom:
    return (atom[0],) + tuple(sub[t] if is_var(t) else t for t in atom[1:])


def ground_actions(domain: Domain, problem: Problem) -> list[GroundAction]:
    """All typed instantiations whose static preconditions hold in ``init``, sorted by (name, args)."""
    fluent = {a[0] for act in domain.actions for a in act.add + act.delete}
    init = problem.init
    out: list[GroundAction] = []
    for act in domain.actions:
        candidates = [
            sorted(o for o, t in problem.objects if domain.is_subtype(t, ptype)) for _, ptype in act.params
        ]
        variables = [v for v, _ in act.params]
        static_checks: list[list[tuple[bool, Atom]]] = [[] for _ in variables]
        ground_ok = True
        for positive, atoms in ((True, act.pre_pos), (False, act.pre_neg)):
            for atom in atoms:
                if atom[0] in fluent:
                    continue
                idx = [variables.index(t) for t in atom[1:] if is_var(t)]
                if idx:
                    static_checks[max(idx)].append((positive, atom))
                elif (atom in init) != positive:
                    ground_ok = False
        if not ground_ok:
            continue
        sub: dict[str, str] = {}

        def rec(i: int):
            if i == len(variables):
                out.append(
                    GroundAction(
                        act.name,
                        tuple(sub[v] for v in variables),
                        _bind(act.pre_pos, sub),
                        _bind(act.pre_neg, sub),
                        _bind(act.add, sub),
                        _bind(act.delete, sub) - _bind(act.add, sub),
                    )
                )
                return
            for obj in candidates[i]:
                sub[variables[i]] = obj
                if all((_bind_one(a, sub) in init) == pos for pos, a in static_checks[i]):
                    rec(i + 1)
            sub.pop(variables[i], None)

        rec(0)
    out.sort()
    return out


def plan(domain: Domain, problem: Problem, node_cap: int = DEFAULT_NODE_CAP) -> Plan:
    """Shortest plan by breadth-first search; ties broken by (action name, args)."""
    check_problem(domain, problem)
    actions = ground_actions(domain, problem)
    start: State = frozenset(problem.init)
    if goal_satisfied(start, problem):
        return Plan(())
    parents: dict[State, tuple[State, GroundAction] | None] = {start: None}
    frontier = deque([start])
    expansions = 0
    while frontier:
        state = frontier.popleft()
        expansions += 1
        if expansions > node_cap:
            raise NodeLimitError(f"search exceeded {node_cap} expansions")
        for act in actions:
            if not applicable(state, act):
                continue
            nxt = (state - act.delete) | act.add
            if nxt in parents:
                continue
            parents[nxt] = (state, act)
            if goal_satisfied(nxt, problem):
                steps = []
                cur = nxt
                while parents[cur] is not None:
                    prev, a = parents[cur]
                    steps.append(a)
                    cur = prev
                return Plan(tuple(reversed(steps)))
            frontier.append(nxt)
    raise UnsolvableError(f"no plan: goal unreachable after exploring {len(parents)} states")


def validate_plan(problem: Problem, steps: Iterable[GroundAction]) -> bool:
    state: State = frozenset(problem.init)
    for step in steps:
        if not applicable(state, step):
            return False
        state = apply(state, step)
    return goal_satisfied(state, problem)


def ground(domain: Domain, name: str, args: Iterable[str]) -> GroundAction:
    """Instantiate one action by name (no static pruning)."""
    act = domain.action(name)
    args = tuple(args)
    if len(args) != len(act.params):
        raise PlanningError(f"{name} takes {len(act.params)} argument(s)")
    sub = {v: a for (v, _), a in zip(act.params, args)}
    add = _bind(act.add, sub)
    return GroundAction(name, args, _bind(act.pre_pos, sub), _bind(act.pre_neg, sub), add,
                        _bind(act.delete, sub) - add)
