"""STRIPS PDDL subset: data model, s-expression parser, renderer, scene translation.

Supported requirements are ``:strips``, ``:typing`` and
``:negative-preconditions``. Keywords are case-insensitive; names keep their
case so that emitted files round-trip to equal objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .world_model import ANY_CLASS, Scene, is_var

SUPPORTED_REQUIREMENTS = (":strips", ":typing", ":negative-preconditions")

Atom = tuple  # (predicate, arg, ...)


class PddlError(ValueError):
    pass


class PddlParseError(PddlError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class UnsupportedRequirementError(PddlParseError):
    pass


class IllTypedError(PddlError):
    pass


@dataclass(frozen=True)
class Predicate:
    name: str
    params: tuple[tuple[str, str], ...]  # (?var, type)

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Action:
    name: str
    params: tuple[tuple[str, str], ...]
    pre_pos: tuple[Atom, ...] = ()
    pre_neg: tuple[Atom, ...] = ()
    add: tuple[Atom, ...] = ()
    delete: tuple[Atom, ...] = ()

    def __post_init__(self):
        declared = {v for v, _ in self.params}
        for atom in self.pre_pos + self.pre_neg + self.add + self.delete:
            for term in atom[1:]:
                if is_var(term) and term not in declared:
                    raise PddlError(f"action {self.name}: variable {term} not in parameters")
        clash = set(self.add) & set(self.delete)
        if clash:
            raise PddlError(f"action {self.name}: atoms both added and deleted: {sorted(clash)}")


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...]
    types: tuple[tuple[str, str], ...]  # (type, parent)
    predicates: tuple[Predicate, ...]
    actions: tuple[Action, ...]

    def __post_init__(self):
        names = [p.name for p in self.predicates]
        if len(set(names)) != len(names):
            raise PddlError(f"domain {self.name}: duplicate predicate names")
        names = [a.name for a in self.actions]
        if len(set(names)) != len(names):
            raise PddlError(f"domain {self.name}: duplicate action names")

    def predicate(self, name: str) -> Predicate:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def action(self, name: str) -> Action:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def is_subtype(self, t: str, ancestor: str) -> bool:
        if ancestor == ANY_CLASS or t == ancestor:
            return True
        parents = dict(self.types)
        seen = set()
        while t in parents and t not in seen:
            seen.add(t)
            t = parents[t]
            if t == ancestor:
                return True
        return False


@dataclass(frozen=True)
class Problem:
    name: str
    domain: str
    objects: tuple[tuple[str, str], ...]
    init: frozenset
    goal_pos: tuple[Atom, ...] = ()
    goal_neg: tuple[Atom, ...] = ()


# ---------------------------------------------------------------- s-expressions


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int

    @property
    def key(self) -> str:
        return self.text.lower()


class SList(list):
    line = 0
    col = 0


def read_sexpr(text: str):
    """Parse ``text`` into nested ``SList``/``Token`` trees; exactly one top-level form."""
    stack: list[SList] = []
    top: list = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "(":
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
            i += 1
            col += 1
            continue
        if ch == ")":
            if not stack:
                raise PddlParseError("unbalanced ')'", line, col)
            done = stack.pop()
            (stack[-1] if stack else top).append(done)
            i += 1
            col += 1
            continue
        start, start_col = i, col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        (stack[-1] if stack else top).append(Token(text[start:i], line, start_col))
    if stack:
        raise PddlParseError("unbalanced '(' (missing ')')", stack[-1].line, stack[-1].col)
    if len(top) != 1 or not isinstance(top[0], SList):
        where = top[1] if len(top) > 1 else None
        ln, cl = (where.line, where.col) if where is not None else (line, col)
        raise PddlParseError("expected exactly one top-level (define ...) form", ln, cl)
    return top[0]


def _pos(node) -> tuple[int, int]:
    return node.line, node.col


def _expect_list(node, what: str) -> SList:
    if not isinstance(node, SList):
        raise PddlParseError(f"expected a list for {what}", *_pos(node))
    return node


def _expect_token(node, what: str) -> Token:
    if not isinstance(node, Token):
        raise PddlParseError(f"expected a name for {what}", *_pos(node))
    return node


def _typed_list(items: Sequence, what: str) -> list[tuple[str, str]]:
    """``a b - t c`` -> [(a, t), (b, t), (c, object)]"""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        tok = _expect_token(items[i], what)
        if tok.text == "-":
            if i + 1 >= len(items):
                raise PddlParseError(f"missing type after '-' in {what}", *_pos(tok))
            tnode = items[i + 1]
            if isinstance(tnode, SList):
                raise PddlParseError("'either' types are not supported", *_pos(tnode))
            out.extend((name, tnode.text) for name in pending)
            pending = []
            i += 2
            continue
        pending.append(tok.text)
        i += 1
    out.extend((name, ANY_CLASS) for name in pending)
    return out


def _atom(node, what: str) -> Atom:
    lst = _expect_list(node, what)
    if not lst:
        raise PddlParseError(f"empty atom in {what}", *_pos(lst))
    toks = [_expect_token(t, what) for t in lst]
    if toks[0].key in ("and", "or", "not", "forall", "exists", "when", "imply", "="):
        raise PddlParseError(f"unsupported construct '{toks[0].text}' in {what}", *_pos(toks[0]))
    return tuple(t.text for t in toks)


def _literals(node, what: str, allow_negative: bool) -> tuple[list[Atom], list[Atom]]:
    lst = _expect_list(node, what)
    pos: list[Atom] = []
    neg: list[Atom] = []
    if not lst:
        return pos, neg
    head = lst[0]
    items = lst[1:] if isinstance(head, Token) and head.key == "and" else [lst]
    for item in items:
        item = _expect_list(item, what)
        if item and isinstance(item[0], Token) and item[0].key == "not":
            if not allow_negative:
                raise PddlParseError(
                    f"negative literal in {what} requires :negative-preconditions", *_pos(item[0])
                )
            if len(item) != 2:
                raise PddlParseError("(not ...) takes exactly one atom", *_pos(item[0]))
            neg.append(_atom(item[1], what))
        else:
            pos.append(_atom(item, what))
    return pos, neg


def _effects(node, what: str) -> tuple[list[Atom], list[Atom]]:
    lst = _expect_list(node, what)
    add: list[Atom] = []
    delete: list[Atom] = []
    if not lst:
        return add, delete
    head = lst[0]
    items = lst[1:] if isinstance(head, Token) and head.key == "and" else [lst]
    for item in items:
        item = _expect_list(item, what)
        if item and isinstance(item[0], Token) and item[0].key == "not":
            if len(item) != 2:
                raise PddlParseError("(not ...) takes exactly one atom", *_pos(item[0]))
            delete.append(_atom(item[1], what))
        else:
            add.append(_atom(item, what))
    return add, delete


def _header(tree: SList, kind: str) -> tuple[str, list]:
    if len(tree) < 2 or not isinstance(tree[0], Token) or tree[0].key != "define":
        raise PddlParseError("expected (define ...)", *_pos(tree))
    head = _expect_list(tree[1], f"{kind} header")
    if len(head) != 2 or _expect_token(head[0], kind).key != kind:
        raise PddlParseError(f"expected ({kind} <name>)", *_pos(head))
    return _expect_token(head[1], f"{kind} name").text, list(tree[2:])


def _requirements(section: SList) -> tuple[str, ...]:
    reqs = []
    for node in section[1:]:
        tok = _expect_token(node, ":requirements")
        if tok.key not in SUPPORTED_REQUIREMENTS:
            raise UnsupportedRequirementError(f"unsupported requirement {tok.text}", tok.line, tok.col)
        reqs.append(tok.key)
    return tuple(reqs)


def _check_atom_shape(atom: Atom, preds: dict[str, Predicate], node, what: str):
    pred = preds.get(atom[0])
    if pred is None:
        raise PddlParseError(f"undeclared predicate {atom[0]!r} in {what}", *_pos(node))
    if pred.arity != len(atom) - 1:
        raise PddlParseError(f"{atom[0]} takes {pred.arity} argument(s) in {what}", *_pos(node))


def parse_domain(text: str) -> Domain:
    tree = read_sexpr(text)
    name, sections = _header(tree, "domain")
    requirements: tuple[str, ...] = (":strips",)
    explicit_reqs = False
    types: list[tuple[str, str]] = []
    predicates: list[Predicate] = []
    actions: list[Action] = []
    for sec in sections:
        sec = _expect_list(sec, "domain section")
        key = _expect_token(sec[0], "section keyword").key if sec else ""
        if key == ":requirements":
            requirements = _requirements(sec)
            explicit_reqs = True
        elif key == ":types":
            types = _typed_list(sec[1:], ":types")
        elif key == ":predicates":
            for pnode in sec[1:]:
                plist = _expect_list(pnode, ":predicates")
                pname = _expect_token(plist[0], "predicate name").text
                predicates.append(Predicate(pname, tuple(_typed_list(plist[1:], pname))))
        elif key == ":action":
            actions.append(_parse_action(sec, requirements, predicates))
        else:
            where = sec[0] if sec else sec
            raise PddlParseError(f"unknown construct {key or '()'}", *_pos(where))
    if not explicit_reqs:
        requirements = (":strips",)
    if types and ":typing" not in requirements:
        raise PddlParseError(":types requires :typing", *_pos(tree))
    declared = {t for t, _ in types} | {ANY_CLASS}
    for t, parent in types:
        if parent not in declared:
            raise PddlParseError(f"undeclared parent type {parent!r}", *_pos(tree))
    for p in predicates:
        for _, t in p.params:
            if t not in declared:
                raise PddlParseError(f"predicate {p.name}: undeclared type {t!r}", *_pos(tree))
    try:
        return Domain(name, requirements, tuple(types), tuple(predicates), tuple(actions))
    except PddlError as exc:
        raise PddlParseError(str(exc), *_pos(tree)) from None


def _parse_action(sec: SList, requirements, predicates) -> Action:
    name = _expect_token(sec[1], "action name").text if len(sec) > 1 else None
    if name is None:
        raise PddlParseError("action needs a name", *_pos(sec))
    params: list[tuple[str, str]] = []
    pre_pos: list[Atom] = []
    pre_neg: list[Atom] = []
    add: list[Atom] = []
    delete: list[Atom] = []
    allow_neg = ":negative-preconditions" in requirements
    preds = {p.name: p for p in predicates}
    rest = list(sec[2:])
    if len(rest) % 2:
        raise PddlParseError(f"action {name}: dangling keyword", *_pos(rest[-1]))
    for kw_node, value in zip(rest[::2], rest[1::2]):
        kw = _expect_token(kw_node, f"action {name}").key
        if kw == ":parameters":
            params = _typed_list(_expect_list(value, ":parameters"), ":parameters")
        elif kw == ":precondition":
            pre_pos, pre_neg = _literals(value, f"{name} precondition", allow_neg)
        elif kw == ":effect":
            add, delete = _effects(value, f"{name} effect")
        else:
            raise PddlParseError(f"unknown construct {kw_node.text} in action {name}", *_pos(kw_node))
    for atom in pre_pos + pre_neg + add + delete:
        _check_atom_shape(atom, preds, sec, f"action {name}")
    try:
        return Action(name, tuple(params), tuple(pre_pos), tuple(pre_neg), tuple(add), tuple(delete))
    except PddlError as exc:
        raise PddlParseError(str(exc), *_pos(sec)) from None


def parse_problem(text: str) -> Problem:
    tree = read_sexpr(text)
    name, sections = _header(tree, "problem")
    domain_name = None
    objects: list[tuple[str, str]] = []
    init: set = set()
    goal_pos: list[Atom] = []
    goal_neg: list[Atom] = []
    for sec in sections:
        sec = _expect_list(sec, "problem section")
        key = _expect_token(sec[0], "section keyword").key if sec else ""
        if key == ":domain":
            domain_name = _expect_token(sec[1], ":domain").text
        elif key == ":requirements":
            _requirements(sec)
        elif key == ":objects":
            objects = _typed_list(sec[1:], ":objects")
        elif key == ":init":
            for node in sec[1:]:
                atom = _atom(node, ":init")
                if any(is_var(t) for t in atom[1:]):
                    raise PddlParseError("variables are not allowed in :init", *_pos(node))
                init.add(atom)
        elif key == ":goal":
            if len(sec) != 2:
                raise PddlParseError(":goal takes one formula", *_pos(sec))
            goal_pos, goal_neg = _literals(sec[1], ":goal", allow_negative=True)
        else:
            where = sec[0] if sec else sec
            raise PddlParseError(f"unknown construct {key or '()'}", *_pos(where))
    if domain_name is None:
        raise PddlParseError("problem is missing (:domain ...)", *_pos(tree))
    return Problem(name, domain_name, tuple(objects), frozenset(init), tuple(goal_pos), tuple(goal_neg))


# ---------------------------------------------------------------- rendering


def _fmt_atom(atom: Atom) -> str:
    return "(" + " ".join(atom) + ")"


def _fmt_typed(items: Iterable[tuple[str, str]]) -> str:
    parts = []
    for name, t in items:
        parts.append(f"{name} - {t}")
    return " ".join(parts)


def _fmt_conj(pos: Sequence[Atom], neg: Sequence[Atom]) -> str:
    lits = [_fmt_atom(a) for a in pos] + [f"(not {_fmt_atom(a)})" for a in neg]
    return "(and " + " ".join(lits) + ")" if lits else "(and)"


def render_domain(domain: Domain) -> str:
    lines = [f"(define (domain {domain.name})"]
    lines.append("  (:requirements " + " ".join(domain.requirements) + ")")
    if domain.types:
        lines.append("  (:types " + _fmt_typed(domain.types) + ")")
    lines.append("  (:predicates")
    for p in domain.predicates:
        inner = " ".join([p.name] + ([_fmt_typed(p.params)] if p.params else []))
        lines.append(f"    ({inner})")
    lines.append("  )")
    for a in domain.actions:
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_fmt_typed(a.params)})")
        lines.append(f"    :precondition {_fmt_conj(a.pre_pos, a.pre_neg)}")
        lines.append(f"    :effect {_fmt_conj(a.add, a.delete)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def render_problem(problem: Problem) -> str:
    lines = [f"(define (problem {problem.name})", f"  (:domain {problem.domain})"]
    lines.append("  (:objects " + _fmt_typed(problem.objects) + ")")
    lines.append("  (:init")
    for atom in sorted(problem.init):
        lines.append(f"    {_fmt_atom(atom)}")
    lines.append("  )")
    lines.append(f"  (:goal {_fmt_conj(problem.goal_pos, problem.goal_neg)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- scene -> PDDL


def emit_domain(scene: Scene, name: str = "skills") -> Domain:
    """One action per skill template; predicates restricted to the vocabulary in use."""
    used: set[str] = set()
    negative = False
    actions = []
    for skill in scene.skills:
        for pat in skill.patterns():
            if pat[0] not in scene.predicates:
                raise PddlError(f"vocabulary violation: {pat[0]!r} used by {skill.name}")
            if any(not is_var(t) for t in pat[1:]):
                raise PddlError(f"skill {skill.name}: constants in {pat} are not supported")
            used.add(pat[0])
        negative |= any(not pos for pos, _ in skill.preconditions)
        actions.append(
            Action(
                skill.name,
                tuple(("?" + p.name, p.type) for p in skill.symbolic_params),
                tuple(pat for pos, pat in skill.preconditions if pos),
                tuple(pat for pos, pat in skill.preconditions if not pos),
                tuple(skill.add),
                tuple(skill.delete),
            )
        )
    used |= {r.predicate for r in scene.relations}
    classes = {e.cls for e in scene.entities}
    classes |= {p.type for s in scene.skills for p in s.symbolic_params}
    classes |= {c for sig in scene.predicates.values() for c in sig}
    if scene.literals():
        classes.add("literal")
    classes.discard(ANY_CLASS)
    predicates = tuple(
        Predicate(pname, tuple((f"?a{i}", t) for i, t in enumerate(sig)))
        for pname, sig in scene.predicates.items()
        if pname in used
    )
    reqs = (":strips", ":typing") + ((":negative-preconditions",) if negative else ())
    return Domain(name, reqs, tuple((c, ANY_CLASS) for c in sorted(classes)), predicates, tuple(actions))


def parse_goal(goal: str | Sequence) -> tuple[tuple[Atom, ...], tuple[Atom, ...]]:
    """Goal as PDDL text ``(and (p a b) (not (q c)))`` or a list of ``[pred, args...]``/``["not", [...]]``."""
    if isinstance(goal, str):
        text = goal.strip()
        if not text:
            return (), ()
        tree = read_sexpr(text)
        pos, neg = _literals(tree, "goal", allow_negative=True)
        return tuple(pos), tuple(neg)
    pos, neg = [], []
    for lit in goal:
        if lit and lit[0] == "not":
            neg.append(tuple(lit[1]))
        else:
            pos.append(tuple(lit))
    return tuple(pos), tuple(neg)


def check_problem(domain: Domain, problem: Problem) -> None:
    """Raise ``IllTypedError`` unless every atom is well-typed against ``domain``."""
    types = dict(problem.objects)
    preds = {p.name: p for p in domain.predicates}
    declared = {t for t, _ in domain.types} | {ANY_CLASS}
    for obj, t in problem.objects:
        if t not in declared:
            raise IllTypedError(f"object {obj}: undeclared type {t!r}")
    for where, atoms in (("init", problem.init), ("goal", problem.goal_pos + problem.goal_neg)):
        for atom in atoms:
            pred = preds.get(atom[0])
            if pred is None:
                raise IllTypedError(f"{where}: undeclared predicate {atom[0]!r}")
            if pred.arity != len(atom) - 1:
                raise IllTypedError(f"{where}: {atom[0]} takes {pred.arity} argument(s), got {atom}")
            for arg, (_, ptype) in zip(atom[1:], pred.params):
                if arg not in types:
                    raise IllTypedError(f"{where}: unknown object {arg!r} in {atom}")
                if not domain.is_subtype(types[arg], ptype):
                    raise IllTypedError(f"{where}: {arg} is {types[arg]}, {atom[0]} expects {ptype}")


def emit_problem(scene: Scene, goal, domain: Domain | None = None, name: str = "task") -> Problem:
    domain = domain or emit_domain(scene)
    goal_pos, goal_neg = parse_goal(goal)
    objects = tuple((e.id, e.cls) for e in scene.entities) + tuple((lit, "literal") for lit in scene.literals())
    problem = Problem(name, domain.name, objects, frozenset(r.atom for r in scene.relations), goal_pos, goal_neg)
    check_problem(domain, problem)
    return problem
