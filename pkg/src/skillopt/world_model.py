"""Semantic scene: entities, relations and skill templates.

The scene is an immutable snapshot loaded from the ``scene`` section of a
scenario file. It seeds PDDL generation, grounds skill parameters and marks
which skill parameters are left to the optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

WILDCARD = "*"

PARAM_KINDS = ("entity-ref", "pose", "real", "integer", "ordinal", "categorical")
LEARNABLE_KINDS = ("real", "integer", "ordinal", "categorical")
SYMBOLIC_KINDS = ("entity-ref", "pose")
POSE_CLASSES = ("Box", "Hole", "Pose")
ANY_CLASS = "object"


class WorldModelError(ValueError):
    pass


class UnknownPredicateError(WorldModelError):
    pass


class GroundingError(WorldModelError):
    pass


class AmbiguousGroundingError(GroundingError):
    pass


class UnsatisfiableGroundingError(GroundingError):
    pass


@dataclass(frozen=True)
class Entity:
    id: str
    cls: str
    properties: Mapping[str, Any] = field(default_factory=dict, compare=False)
    pose: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.pose is not None:
            if len(self.pose) != 4:
                raise WorldModelError(f"pose of {self.id!r} must be [x, y, z, yaw]")
            object.__setattr__(self, "pose", tuple(float(v) for v in self.pose))
        if self.cls in POSE_CLASSES and self.pose is None:
            raise WorldModelError(f"entity {self.id!r} of class {self.cls} needs a pose")


@dataclass(frozen=True, order=True)
class Relation:
    """A ground fact ``(predicate subject [object])``; ``object`` is None for unary facts."""

    subject: str
    predicate: str
    object: str | None = None

    @property
    def atom(self) -> tuple[str, ...]:
        if self.object is None:
            return (self.predicate, self.subject)
        return (self.predicate, self.subject, self.object)

    @classmethod
    def from_atom(cls, atom: Sequence[str]) -> Relation:
        if len(atom) == 2:
            return cls(atom[1], atom[0])
        if len(atom) == 3:
            return cls(atom[1], atom[0], atom[2])
        raise WorldModelError(f"relations are unary or binary, got {atom!r}")

    def sort_key(self):
        return (self.subject, self.predicate, "" if self.object is None else self.object)


@dataclass(frozen=True)
class LearnableParamSpec:
    name: str
    kind: str
    bounds: tuple[float, float] | None = None
    values: tuple | None = None
    unit: str = ""
    nominal: Any = None

    def __post_init__(self):
        if self.kind not in LEARNABLE_KINDS:
            raise WorldModelError(f"{self.name}: learnable kind must be one of {LEARNABLE_KINDS}")
        if self.kind in ("real", "integer"):
            if self.bounds is None or len(self.bounds) != 2:
                raise WorldModelError(f"{self.name}: {self.kind} parameter needs [lo, hi] bounds")
            lo, hi = (float(b) for b in self.bounds)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise WorldModelError(f"{self.name}: bounds need lo < hi, got {self.bounds}")
            if self.kind == "integer":
                lo, hi = int(lo), int(hi)
            object.__setattr__(self, "bounds", (lo, hi))
        else:
            if not self.values:
                raise WorldModelError(f"{self.name}: {self.kind} parameter needs a value list")
            object.__setattr__(self, "values", tuple(self.values))
            if len(set(self.values)) != len(self.values):
                raise WorldModelError(f"{self.name}: duplicate values")

    def contains(self, value) -> bool:
        if self.kind == "real":
            try:
                v = float(value)
            except (TypeError, ValueError):
                return False
            return self.bounds[0] <= v <= self.bounds[1]
        if self.kind == "integer":
            if isinstance(value, bool) or not float(value).is_integer():
                return False
            return self.bounds[0] <= int(value) <= self.bounds[1]
        return value in self.values

    def renamed(self, name: str) -> LearnableParamSpec:
        return LearnableParamSpec(name, self.kind, self.bounds, self.values, self.unit, self.nominal)

    @classmethod
    def from_dict(cls, name: str, d: Mapping[str, Any]) -> LearnableParamSpec:
        return cls(
            name=name,
            kind=d["kind"],
            bounds=tuple(d["bounds"]) if d.get("bounds") is not None else None,
            values=tuple(d["values"]) if d.get("values") is not None else None,
            unit=d.get("unit", ""),
            nominal=d.get("nominal"),
        )

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind}
        if self.bounds is not None:
            d["bounds"] = list(self.bounds)
        if self.values is not None:
            d["values"] = list(self.values)
        if self.unit:
            d["unit"] = self.unit
        if self.nominal is not None:
            d["nominal"] = self.nominal
        return d


@dataclass(frozen=True)
class SkillParam:
    name: str
    kind: str
    type: str | None = None  # entity class, for entity-ref and pose params
    default: Any = None

    def __post_init__(self):
        if self.kind not in PARAM_KINDS:
            raise WorldModelError(f"param {self.name!r}: unknown kind {self.kind!r}")
        if self.kind in SYMBOLIC_KINDS and not self.type:
            raise WorldModelError(f"param {self.name!r}: {self.kind} params need an entity type")

    @property
    def symbolic(self) -> bool:
        return self.kind in SYMBOLIC_KINDS


# A pattern is a tuple (predicate, arg...) whose args are "?var" or constants.
Pattern = tuple


def is_var(term: str) -> bool:
    return term.startswith("?")


@dataclass(frozen=True)
class SkillTemplate:
    name: str
    params: tuple[SkillParam, ...]
    preconditions: tuple[tuple[bool, Pattern], ...] = ()
    add: tuple[Pattern, ...] = ()
    delete: tuple[Pattern, ...] = ()
    learnable: Mapping[str, LearnableParamSpec] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise WorldModelError(f"skill {self.name}: duplicate parameter names")
        by_name = {p.name: p for p in self.params}
        for lname, spec in self.learnable.items():
            if lname not in by_name:
                raise WorldModelError(f"skill {self.name}: learnable {lname!r} is not a parameter")
            if by_name[lname].symbolic:
                raise WorldModelError(f"skill {self.name}: {lname!r} is symbolic and cannot be learnable")
            if spec.kind != by_name[lname].kind:
                raise WorldModelError(f"skill {self.name}: {lname!r} kind mismatch")
        symbols = {"?" + p.name for p in self.params if p.symbolic}
        for pat in self.patterns():
            for term in pat[1:]:
                if is_var(term) and term not in symbols:
                    raise WorldModelError(f"skill {self.name}: {term} is not a symbolic parameter")

    def param(self, name: str) -> SkillParam:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def symbolic_params(self) -> tuple[SkillParam, ...]:
        return tuple(p for p in self.params if p.symbolic)

    def patterns(self) -> Iterable[Pattern]:
        for _, pat in self.preconditions:
            yield pat
        yield from self.add
        yield from self.delete

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> SkillTemplate:
        params = tuple(
            SkillParam(p["name"], p["kind"], p.get("type"), p.get("default")) for p in d["params"]
        )
        pre = []
        for lit in d.get("pre", []):
            if lit and lit[0] == "not":
                pre.append((False, tuple(lit[1])))
            else:
                pre.append((True, tuple(lit)))
        learnable = {
            name: LearnableParamSpec.from_dict(name, spec) for name, spec in d.get("learnable", {}).items()
        }
        return cls(
            name=d["name"],
            params=params,
            preconditions=tuple(pre),
            add=tuple(tuple(a) for a in d.get("add", [])),
            delete=tuple(tuple(a) for a in d.get("del", [])),
            learnable=learnable,
        )

    def to_dict(self) -> dict:
        params = []
        for p in self.params:
            entry: dict[str, Any] = {"name": p.name, "kind": p.kind}
            if p.type:
                entry["type"] = p.type
            if p.default is not None:
                entry["default"] = p.default
            params.append(entry)
        return {
            "name": self.name,
            "params": params,
            "pre": [list(pat) if pos else ["not", list(pat)] for pos, pat in self.preconditions],
            "add": [list(a) for a in self.add],
            "del": [list(a) for a in self.delete],
            "learnable": {k: v.to_dict() for k, v in self.learnable.items()},
        }


@dataclass(frozen=True)
class SkillBinding:
    """A grounded skill instance; learnable parameters stay in ``unbound`` until bound."""

    skill: str
    bound: Mapping[str, Any]
    unbound: tuple[LearnableParamSpec, ...] = ()

    @property
    def fully_bound(self) -> bool:
        return not self.unbound


@dataclass(frozen=True)
class Scene:
    entities: tuple[Entity, ...]
    relations: tuple[Relation, ...]
    skills: tuple[SkillTemplate, ...]
    predicates: Mapping[str, tuple[str, ...]] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entities", tuple(self.entities))
        object.__setattr__(self, "relations", tuple(sorted(set(self.relations), key=Relation.sort_key)))
        object.__setattr__(self, "skills", tuple(self.skills))
        object.__setattr__(self, "predicates", {k: tuple(v) for k, v in self.predicates.items()})
        index: dict[str, Entity] = {}
        for e in self.entities:
            if e.id in index:
                raise WorldModelError(f"duplicate entity id {e.id!r}")
            index[e.id] = e
        object.__setattr__(self, "_index", index)
        for rel in self.relations:
            self._check_atom(rel.atom, what=f"relation {rel.atom}")
        names = [s.name for s in self.skills]
        if len(set(names)) != len(names):
            raise WorldModelError("duplicate skill names")
        for skill in self.skills:
            for pat in skill.patterns():
                self._check_pattern(skill, pat)

    def _check_atom(self, atom, what):
        pred, *args = atom
        if pred not in self.predicates:
            raise UnknownPredicateError(f"{what}: predicate {pred!r} not in vocabulary")
        sig = self.predicates[pred]
        if len(sig) != len(args):
            raise WorldModelError(f"{what}: {pred} takes {len(sig)} argument(s)")
        subj = args[0]
        if subj not in self._index:
            raise WorldModelError(f"{what}: unknown subject {subj!r}")
        for arg, cls in zip(args, sig):
            ent = self._index.get(arg)
            if ent is None:
                if cls != "literal":
                    raise WorldModelError(f"{what}: unknown entity {arg!r}")
            elif cls not in (ANY_CLASS, ent.cls):
                raise WorldModelError(f"{what}: {arg!r} is {ent.cls}, expected {cls}")

    def _check_pattern(self, skill, pat):
        pred, *args = pat
        if pred not in self.predicates:
            raise UnknownPredicateError(f"skill {skill.name}: predicate {pred!r} not in vocabulary")
        sig = self.predicates[pred]
        if len(sig) != len(args):
            raise WorldModelError(f"skill {skill.name}: {pred} takes {len(sig)} argument(s)")
        for arg, cls in zip(args, sig):
            if is_var(arg):
                ptype = skill.param(arg[1:]).type
                if cls not in (ANY_CLASS, ptype):
                    raise WorldModelError(f"skill {skill.name}: {arg} is {ptype}, {pred} expects {cls}")

    def entity(self, eid: str) -> Entity:
        return self._index[eid]

    def has_entity(self, eid: str) -> bool:
        return eid in self._index

    def entities_of(self, cls: str) -> list[Entity]:
        if cls == ANY_CLASS:
            return sorted(self.entities, key=lambda e: e.id)
        return sorted((e for e in self.entities if e.cls == cls), key=lambda e: e.id)

    def skill(self, name: str) -> SkillTemplate:
        for s in self.skills:
            if s.name == name:
                return s
        raise KeyError(name)

    def literals(self) -> list[str]:
        return sorted({r.object for r in self.relations if r.object is not None and r.object not in self._index})

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Scene:
        entities = [
            Entity(e["id"], e["class"], dict(e.get("properties", {})), tuple(e["pose"]) if e.get("pose") else None)
            for e in d["entities"]
        ]
        relations = [Relation(r[0], r[1], r[2] if len(r) > 2 else None) for r in d.get("relations", [])]
        skills = [SkillTemplate.from_dict(s) for s in d["skills"]]
        if not skills:
            raise WorldModelError("scene must declare at least one skill")
        return cls(tuple(entities), tuple(relations), tuple(skills), d.get("predicates", {}))

    def to_dict(self) -> dict:
        return {
            "predicates": {k: list(v) for k, v in self.predicates.items()},
            "entities": [
                {"id": e.id, "class": e.cls, "properties": dict(e.properties), "pose": list(e.pose) if e.pose else None}
                for e in self.entities
            ],
            "relations": [[r.subject, r.predicate] + ([r.object] if r.object is not None else []) for r in self.relations],
            "skills": [s.to_dict() for s in self.skills],
        }


def query(scene: Scene, pattern: Relation) -> list[Relation]:
    """Relations matching ``pattern``; ``"*"`` in any slot matches anything."""
    if pattern.predicate != WILDCARD and pattern.predicate not in scene.predicates:
        raise UnknownPredicateError(f"predicate {pattern.predicate!r} not in vocabulary")

    def ok(want, have):
        return want == WILDCARD or want == have

    return [
        r
        for r in scene.relations
        if ok(pattern.subject, r.subject) and ok(pattern.predicate, r.predicate) and ok(pattern.object, r.object)
    ]


def _substitute(pattern: Pattern, assignment: Mapping[str, str]) -> tuple[str, ...]:
    return (pattern[0],) + tuple(assignment.get(t, t) if is_var(t) else t for t in pattern[1:])


def ground_skill(
    scene: Scene,
    template: SkillTemplate,
    goal_context: Mapping[str, Any] | None = None,
    state: Iterable[Relation] | None = None,
) -> SkillBinding:
    """Bind every non-learnable parameter of ``template`` from the scene.

    Symbolic parameters are solved against ``state`` (the scene's relations by
    default) so that all preconditions hold; ``goal_context`` pins parameters
    by name. Exactly one consistent grounding must exist.
    """
    if template not in scene.skills:
        raise GroundingError(f"skill {template.name!r} is not part of the scene")
    context = dict(goal_context or {})
    atoms = {r.atom for r in (scene.relations if state is None else state)}
    symbolic = template.symbolic_params

    domains: list[list[str]] = []
    for p in symbolic:
        if p.name in context:
            eid = context[p.name]
            if not scene.has_entity(eid) or p.type not in (ANY_CLASS, scene.entity(eid).cls):
                raise UnsatisfiableGroundingError(f"{template.name}.{p.name}: {eid!r} is not a {p.type}")
            domains.append([eid])
        else:
            domains.append([e.id for e in scene.entities_of(p.type)])

    # attach each precondition to the first position at which all its variables are assigned
    order = ["?" + p.name for p in symbolic]
    checks: list[list[tuple[bool, Pattern]]] = [[] for _ in symbolic]
    ready_now: list[tuple[bool, Pattern]] = []
    for pos, pat in template.preconditions:
        idx = [order.index(t) for t in pat[1:] if is_var(t)]
        if idx:
            checks[max(idx)].append((pos, pat))
        else:
            ready_now.append((pos, pat))
    for pos, pat in ready_now:
        if (pat in atoms) != pos:
            raise UnsatisfiableGroundingError(f"{template.name}: precondition {pat} does not hold")

    solutions: list[dict[str, str]] = []
    assignment: dict[str, str] = {}

    def search(i: int):
        if len(solutions) > 1:
            return
        if i == len(symbolic):
            solutions.append(dict(assignment))
            return
        for value in domains[i]:
            assignment[order[i]] = value
            if all((_substitute(pat, assignment) in atoms) == pos for pos, pat in checks[i]):
                search(i + 1)
            del assignment[order[i]]

    search(0)
    if not solutions:
        raise UnsatisfiableGroundingError(f"{template.name}: no grounding satisfies the preconditions")
    if len(solutions) > 1:
        a, b = solutions[:2]
        raise AmbiguousGroundingError(f"{template.name}: ambiguous grounding, e.g. {a} and {b}")

    bound: dict[str, Any] = {var[1:]: val for var, val in solutions[0].items()}
    unbound = []
    for p in template.params:
        if p.symbolic:
            continue
        if p.name in template.learnable:
            unbound.append(template.learnable[p.name])
        elif p.name in context:
            bound[p.name] = context[p.name]
        elif p.default is not None:
            bound[p.name] = p.default
        else:
            raise UnsatisfiableGroundingError(f"{template.name}.{p.name}: no value and no default")
    return SkillBinding(template.name, bound, tuple(unbound))


def learnable_params_of(bindings: Sequence[SkillBinding]) -> list[LearnableParamSpec]:
    """Unbound learnable specs in plan order, renamed ``"<step index>.<param>"``."""
    return [spec.renamed(f"{i}.{spec.name}") for i, b in enumerate(bindings) for spec in b.unbound]
