"""Domain-definition text format and the line-delimited trace format.

The domain grammar is line oriented: one declaration per line, with braces
opening blocks for operators, the world configuration, and the adversary
script.  Conditions are lists of s-expression literals such as
``(in_drawer spam indigo_drawer)`` or ``(not (drawer_is_open indigo_drawer))``.
Parsing never raises on bad input; it collects every diagnosable problem with
line and column positions and returns the validated file only when no errors
remain.  Serialization is canonical: parse(serialize(f)) is structurally
equal to f, and serializing twice is byte-identical.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import TraceFormatError
from .executor import ExecutionTrace, TickRecord
from .geometry import Pose
from .logic import Condition, Domain, Literal, LogicalState, PredicateSchema
from .operators import Chain, Operator
from .worlds.kitchen import (
    AdversaryEvent,
    DrawerConfig,
    ItemConfig,
    KitchenConfig,
    KitchenWorld,
)

FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# declaration model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiteralSpec:
    """A literal as written: polarity, schema name, argument names."""

    positive: bool
    schema: str
    args: tuple[str, ...]

    def key(self) -> tuple:
        return (self.schema, self.args)


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    param_types: tuple[str, ...]


@dataclass(frozen=True)
class ObjectDecl:
    name: str
    type: str


@dataclass(frozen=True)
class OperatorDecl:
    name: str
    policy: tuple[str, tuple[str, ...]] | None
    pre: tuple[LiteralSpec, ...]
    run: tuple[LiteralSpec, ...]
    eff: tuple[LiteralSpec, ...]


@dataclass(frozen=True)
class GoalDecl:
    name: str
    literals: tuple[LiteralSpec, ...]


@dataclass(frozen=True)
class PlanDecl:
    name: str
    operator_names: tuple[str, ...]


@dataclass(frozen=True)
class DomainFile:
    name: str = ""
    version: int = FORMAT_VERSION
    predicates: tuple[PredicateDecl, ...] = ()
    objects: tuple[ObjectDecl, ...] = ()
    operators: tuple[OperatorDecl, ...] = ()
    goals: tuple[GoalDecl, ...] = ()
    plans: tuple[PlanDecl, ...] = ()
    world_name: str | None = None
    world: KitchenConfig | None = None

    # ------------------------------------------------------------------
    # compilation into runtime objects
    # ------------------------------------------------------------------

    def to_logic_domain(self) -> Domain:
        return Domain(
            [PredicateSchema(p.name, p.param_types) for p in self.predicates],
            [(o.name, o.type) for o in self.objects],
        )

    def _condition(self, domain: Domain, lits: Iterable[LiteralSpec]) -> Condition:
        return Condition(
            Literal(domain.index_of(l.schema, *l.args), l.positive) for l in lits
        )

    def build_operators(self, domain: Domain) -> dict[str, Operator]:
        out = {}
        for decl in self.operators:
            policy_id, policy_args = decl.policy if decl.policy else (None, ())
            out[decl.name] = Operator(
                name=decl.name,
                entry=self._condition(domain, decl.pre),
                run=self._condition(domain, decl.run),
                effects=self._condition(domain, decl.eff),
                policy_id=policy_id,
                policy_args=policy_args,
            )
        return out

    def goal_condition(self, name: str, domain: Domain) -> Condition:
        for g in self.goals:
            if g.name == name:
                return self._condition(domain, g.literals)
        raise KeyError(f"unknown goal '{name}'")

    def plan_operators(self, name: str, domain: Domain) -> tuple[Operator, ...]:
        ops = self.build_operators(domain)
        for p in self.plans:
            if p.name == name:
                return tuple(ops[n] for n in p.operator_names)
        raise KeyError(f"unknown plan '{name}'")

    def make_kitchen_world(
        self,
        domain: Domain | None = None,
        seed: int | None = None,
        randomize_placements: bool = False,
        config_override: KitchenConfig | None = None,
    ) -> KitchenWorld:
        if self.world is None:
            raise ValueError("domain file has no world configuration")
        return KitchenWorld(
            domain if domain is not None else self.to_logic_domain(),
            config_override if config_override is not None else self.world,
            seed=seed,
            randomize_placements=randomize_placements,
        )


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int  # 1-based
    column: int  # 1-based
    excerpt: str  # full source line

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class ParseResult:
    file: DomainFile | None
    diagnostics: tuple[ParseDiagnostic, ...]

    @property
    def ok(self) -> bool:
        return self.file is not None

    @property
    def errors(self) -> tuple[ParseDiagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == "error")


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>\#.*)
      | (?P<number>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[(){}:+/,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | "punct" | "end"
    text: str
    line: int
    col: int

    @property
    def value(self) -> float:
        return float(self.text)


class _LineError(Exception):
    """Internal: abort parsing of the current line after a diagnostic."""


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.diags: list[ParseDiagnostic] = []

    # --- diagnostics ---------------------------------------------------

    def error(self, line: int, col: int, message: str) -> None:
        excerpt = self.lines[line - 1] if 0 < line <= len(self.lines) else ""
        self.diags.append(ParseDiagnostic("error", message, line, col, excerpt))

    def warn(self, line: int, col: int, message: str) -> None:
        excerpt = self.lines[line - 1] if 0 < line <= len(self.lines) else ""
        self.diags.append(ParseDiagnostic("warning", message, line, col, excerpt))

    def fail(self, token: _Token, message: str) -> None:
        self.error(token.line, token.col, message)
        raise _LineError()

    # --- tokens ----------------------------------------------------------

    def tokenize(self, line_no: int, text: str) -> list[_Token]:
        tokens: list[_Token] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                self.error(
                    line_no, pos + 1, f"unexpected character {text[pos]!r}"
                )
                pos += 1
                continue
            kind = m.lastgroup
            if kind not in ("ws", "comment"):
                tokens.append(_Token(kind, m.group(), line_no, m.start() + 1))
            pos = m.end()
        tokens.append(_Token("end", "", line_no, len(text) + 1))
        return tokens


class _Cursor:
    """Token stream over one line with expectation helpers."""

    def __init__(self, parser: _Parser, tokens: list[_Token]):
        self.parser = parser
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "end":
            self.i += 1
        return tok

    def at_end(self) -> bool:
        return self.peek().kind == "end"

    def expect_ident(self, what: str = "identifier") -> _Token:
        tok = self.next()
        if tok.kind != "ident":
            self.parser.fail(tok, f"expected {what}, found {tok.text!r}" if tok.text else f"expected {what}")
        return tok

    def expect_number(self, what: str = "number") -> float:
        tok = self.next()
        if tok.kind != "number":
            self.parser.fail(tok, f"expected {what}, found {tok.text!r}" if tok.text else f"expected {what}")
        if not math.isfinite(tok.value):
            self.parser.fail(tok, f"non-finite {what} {tok.text!r}")
        return tok.value

    def expect_int(self, what: str = "integer") -> int:
        tok = self.next()
        if tok.kind != "number" or not re.fullmatch(r"[-+]?\d+", tok.text):
            self.parser.fail(tok, f"expected {what}, found {tok.text!r}" if tok.text else f"expected {what}")
        return int(tok.text)

    def expect_punct(self, char: str) -> _Token:
        tok = self.next()
        if tok.kind != "punct" or tok.text != char:
            self.parser.fail(tok, f"expected '{char}', found {tok.text!r}" if tok.text else f"expected '{char}'")
        return tok

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind != "end":
            self.parser.fail(tok, f"unexpected trailing {tok.text!r}")

    def skip_commas(self) -> None:
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.next()


# ---------------------------------------------------------------------------
# grammar
# ---------------------------------------------------------------------------

_WORLD_SCALARS = {
    "v_max",
    "omega_max",
    "z_lift",
    "lift_clearance",
    "pose_noise",
    "lambda_p",
    "lambda_r",
    "max_shove",
    "max_displace",
    "home_margin",
}
_ITEM_SCALARS = {"approach_radius", "position_margin", "angle_margin"}
_DRAWER_SCALARS = {
    "travel",
    "open_threshold",
    "handle_margin",
    "above_margin",
    "initial_extension",
}


def parse_domain(text: str) -> ParseResult:
    """Parse domain text, returning the file plus all diagnostics.

    The file is None whenever at least one error-severity diagnostic was
    produced; warnings alone do not block.
    """
    p = _Parser(text)

    name = ""
    version = FORMAT_VERSION
    predicates: list[PredicateDecl] = []
    objects: list[ObjectDecl] = []
    operators: list[OperatorDecl] = []
    goals: list[GoalDecl] = []
    plans: list[PlanDecl] = []
    world_name: str | None = None
    world_kwargs: dict = {}
    items: list[ItemConfig] = []
    drawers: list[DrawerConfig] = []
    adversary: list[AdversaryEvent] = []

    # block state: None | ("operator", dict) | ("world",) | ("item"/"drawer", name, dict, line) | ("adversary",)
    stack: list[tuple] = []

    def parse_literal(cur: _Cursor) -> LiteralSpec:
        cur.expect_punct("(")
        head = cur.expect_ident("predicate name or 'not'")
        positive = True
        if head.text == "not":
            positive = False
            cur.expect_punct("(")
            head = cur.expect_ident("predicate name")
        args = []
        while cur.peek().kind == "ident":
            args.append(cur.next().text)
            cur.skip_commas()
        cur.expect_punct(")")
        if not positive:
            cur.expect_punct(")")
        return LiteralSpec(positive, head.text, tuple(args))

    def parse_literal_list(cur: _Cursor) -> tuple[LiteralSpec, ...]:
        lits = []
        while not cur.at_end():
            lits.append(parse_literal(cur))
        return tuple(lits)

    def parse_floats(cur: _Cursor, n: int) -> tuple[float, ...]:
        return tuple(cur.expect_number() for _ in range(n))

    def parse_quat(cur: _Cursor, head: _Token) -> tuple[float, ...]:
        q = parse_floats(cur, 4)
        if math.sqrt(q[0] ** 2 + q[1] ** 2 + q[2] ** 2 + q[3] ** 2) < 1e-9:
            p.fail(head, "orientation is a zero quaternion")
        return q

    def parse_event(cur: _Cursor, at_tick, after_pred, delay) -> AdversaryEvent:
        kind_tok = cur.expect_ident("event kind")
        kind = kind_tok.text
        if kind == "close_drawer":
            target = cur.expect_ident("drawer name").text
            amount = cur.expect_number("amount")
            ev = AdversaryEvent(kind, target=target, amount=amount)
        elif kind == "displace_object":
            target = cur.expect_ident("object name").text
            ev = AdversaryEvent(kind, target=target, offset=parse_floats(cur, 3))
        elif kind == "shove_gripper":
            ev = AdversaryEvent(kind, offset=parse_floats(cur, 3))
        else:
            p.fail(kind_tok, f"unknown adversary event kind '{kind}'")
        cur.expect_end()
        return replace(ev, at_tick=at_tick, after_predicate=after_pred, delay=delay)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = p.tokenize(line_no, raw)
        if tokens[0].kind == "end":
            continue
        cur = _Cursor(p, tokens)
        context = stack[-1][0] if stack else None
        try:
            head = cur.peek()
            if head.kind == "punct" and head.text == "}":
                cur.next()
                cur.expect_end()
                if not stack:
                    p.error(head.line, head.col, "unmatched '}'")
                    continue
                frame = stack.pop()
                if frame[0] == "operator":
                    d = frame[1]
                    operators.append(
                        OperatorDecl(
                            d["name"],
                            d.get("policy"),
                            d.get("pre", ()),
                            d.get("run", ()),
                            d.get("eff", ()),
                        )
                    )
                elif frame[0] == "item":
                    items.append(_finish_item(p, frame))
                elif frame[0] == "drawer":
                    drawers.append(_finish_drawer(p, frame))
                continue

            if head.kind != "ident":
                p.fail(head, f"expected a declaration keyword, found {head.text!r}")
            keyword = cur.next().text

            if context is None:
                if keyword == "version":
                    version = cur.expect_int("version number")
                    cur.expect_end()
                elif keyword == "domain":
                    name = cur.expect_ident("domain name").text
                    cur.expect_end()
                elif keyword == "predicate":
                    pname = cur.expect_ident("predicate name")
                    params: list[str] = []
                    if not cur.at_end():
                        cur.expect_punct("(")
                        while cur.peek().kind == "ident":
                            params.append(cur.next().text)
                            cur.skip_commas()
                        cur.expect_punct(")")
                    cur.expect_end()
                    predicates.append(PredicateDecl(pname.text, tuple(params)))
                elif keyword == "object":
                    oname = cur.expect_ident("object name")
                    cur.expect_punct(":")
                    otype = cur.expect_ident("object type")
                    cur.expect_end()
                    objects.append(ObjectDecl(oname.text, otype.text))
                elif keyword == "operator":
                    opname = cur.expect_ident("operator name")
                    cur.expect_punct("{")
                    cur.expect_end()
                    stack.append(("operator", {"name": opname.text, "line": line_no}))
                elif keyword == "goal":
                    gname = cur.expect_ident("goal name")
                    goals.append(GoalDecl(gname.text, parse_literal_list(cur)))
                elif keyword == "plan":
                    plname = cur.expect_ident("plan name")
                    opnames = []
                    while cur.peek().kind == "ident":
                        opnames.append(cur.next().text)
                        cur.skip_commas()
                    cur.expect_end()
                    plans.append(PlanDecl(plname.text, tuple(opnames)))
                elif keyword == "world":
                    wname = cur.expect_ident("world name")
                    cur.expect_punct("{")
                    cur.expect_end()
                    if world_name is not None:
                        p.error(head.line, head.col, "duplicate world section")
                    world_name = wname.text
                    stack.append(("world",))
                elif keyword == "adversary":
                    cur.expect_punct("{")
                    cur.expect_end()
                    stack.append(("adversary",))
                else:
                    p.fail(head, f"unknown declaration '{keyword}'")

            elif context == "operator":
                d = stack[-1][1]
                if keyword == "policy":
                    pid = cur.expect_ident("policy id")
                    pargs: list[str] = []
                    if not cur.at_end():
                        cur.expect_punct("(")
                        while cur.peek().kind == "ident":
                            pargs.append(cur.next().text)
                            cur.skip_commas()
                        cur.expect_punct(")")
                    cur.expect_end()
                    if pid.text == "none" and not pargs:
                        d["policy"] = None
                    else:
                        d["policy"] = (pid.text, tuple(pargs))
                elif keyword in ("pre", "run", "eff"):
                    if keyword in d:
                        p.error(head.line, head.col, f"duplicate '{keyword}' line")
                    d[keyword] = parse_literal_list(cur)
                else:
                    p.fail(head, f"unknown operator field '{keyword}'")

            elif context == "world":
                if keyword == "set":
                    key = cur.expect_ident("setting name").text
                    if key in _WORLD_SCALARS:
                        world_kwargs[key] = cur.expect_number()
                    elif key == "gripper":
                        world_kwargs["gripper"] = cur.expect_ident("gripper name").text
                    elif key == "home_position":
                        world_kwargs["home_position"] = parse_floats(cur, 3)
                    elif key == "home_orientation":
                        world_kwargs["home_orientation"] = parse_quat(cur, head)
                    else:
                        p.fail(head, f"unknown world setting '{key}'")
                    cur.expect_end()
                elif keyword in ("item", "drawer"):
                    ename = cur.expect_ident(f"{keyword} name")
                    cur.expect_punct("{")
                    cur.expect_end()
                    stack.append((keyword, ename.text, {}, line_no))
                else:
                    p.fail(head, f"unknown world declaration '{keyword}'")

            elif context in ("item", "drawer"):
                d = stack[-1][2]
                scalars = _ITEM_SCALARS if context == "item" else _DRAWER_SCALARS
                if keyword in scalars:
                    d[keyword] = cur.expect_number()
                    cur.expect_end()
                elif context == "item" and keyword == "position":
                    d["position"] = parse_floats(cur, 3)
                    cur.expect_end()
                elif context == "item" and keyword == "orientation":
                    d["orientation"] = parse_quat(cur, head)
                    cur.expect_end()
                elif context == "item" and keyword == "grasp":
                    pos = parse_floats(cur, 3)
                    cur.expect_punct("/")
                    quat = parse_quat(cur, head)
                    cur.expect_end()
                    d.setdefault("grasps", []).append((pos, quat))
                elif context == "item" and keyword == "standoff":
                    d["standoff"] = parse_floats(cur, 3)
                    cur.expect_end()
                elif context == "item" and keyword == "region":
                    d["region"] = (parse_floats(cur, 3), parse_floats(cur, 3))
                    cur.expect_end()
                elif context == "drawer" and keyword in (
                    "position",
                    "axis",
                    "handle_offset",
                    "above_offset",
                ):
                    d[keyword] = parse_floats(cur, 3)
                    cur.expect_end()
                elif context == "drawer" and keyword == "interior":
                    d["interior"] = (parse_floats(cur, 3), parse_floats(cur, 3))
                    cur.expect_end()
                else:
                    p.fail(head, f"unknown {context} field '{keyword}'")

            elif context == "adversary":
                if keyword == "at":
                    tick = cur.expect_int("tick index")
                    adversary.append(parse_event(cur, tick, None, 0))
                elif keyword == "after":
                    lit = parse_literal(cur)
                    if not lit.positive:
                        p.error(
                            head.line, head.col, "trigger predicate must be positive"
                        )
                    delay = cur.expect_int("delay in ticks")
                    if delay < 0:
                        p.error(head.line, head.col, "delay must be >= 0")
                    adversary.append(
                        parse_event(cur, None, (lit.schema, lit.args), delay)
                    )
                else:
                    p.fail(head, f"unknown adversary trigger '{keyword}'")
        except _LineError:
            continue

    for frame in stack:
        kind = frame[0]
        where = frame[1]["line"] if kind == "operator" else (
            frame[3] if kind in ("item", "drawer") else len(p.lines)
        )
        p.error(where if isinstance(where, int) else len(p.lines), 1,
                f"unclosed '{kind}' block at end of input")

    world = None
    if world_name is not None:
        world = _build_world_config(world_kwargs, items, drawers, adversary)
    elif items or drawers or adversary:
        p.error(1, 1, "item/drawer/adversary sections require a world section")

    file = DomainFile(
        name=name,
        version=version,
        predicates=tuple(predicates),
        objects=tuple(objects),
        operators=tuple(operators),
        goals=tuple(goals),
        plans=tuple(plans),
        world_name=world_name,
        world=world,
    )
    _validate(p, file)
    has_errors = any(d.severity == "error" for d in p.diags)
    return ParseResult(None if has_errors else file, tuple(p.diags))


def _finish_item(p: _Parser, frame) -> ItemConfig:
    _, name, d, line = frame
    if "position" not in d:
        p.error(line, 1, f"item '{name}' needs a position")
    if not d.get("grasps"):
        p.error(line, 1, f"item '{name}' needs at least one grasp")
    pose = Pose(d.get("position", (0.0, 0.0, 0.0)), d.get("orientation", (1.0, 0.0, 0.0, 0.0)))
    kwargs = {}
    for key, attr in (
        ("standoff", "standoff_offset"),
        ("approach_radius", "approach_radius"),
        ("position_margin", "position_margin"),
        ("angle_margin", "angle_margin"),
        ("region", "region"),
    ):
        if key in d:
            kwargs[attr] = d[key]
    return ItemConfig(
        name=name,
        pose=pose,
        grasps=tuple(Pose(pos, quat) for pos, quat in d.get("grasps", [])),
        **kwargs,
    )


def _finish_drawer(p: _Parser, frame) -> DrawerConfig:
    _, name, d, line = frame
    if "position" not in d:
        p.error(line, 1, f"drawer '{name}' needs a position")
    kwargs = {}
    for key, attr in (
        ("axis", "axis"),
        ("travel", "travel"),
        ("open_threshold", "open_threshold"),
        ("handle_offset", "handle_offset"),
        ("handle_margin", "handle_margin"),
        ("above_offset", "above_offset"),
        ("above_margin", "above_margin"),
        ("initial_extension", "initial_extension"),
    ):
        if key in d:
            kwargs[attr] = d[key]
    if "interior" in d:
        kwargs["interior_min"], kwargs["interior_max"] = d["interior"]
    return DrawerConfig(name=name, position=d.get("position", (0.0, 0.0, 0.0)), **kwargs)


def _build_world_config(kwargs, items, drawers, adversary) -> KitchenConfig:
    home = Pose(
        kwargs.pop("home_position", (0.0, -0.4, 0.5)),
        kwargs.pop("home_orientation", (1.0, 0.0, 0.0, 0.0)),
    )
    return KitchenConfig(
        home=home,
        items=tuple(items),
        drawers=tuple(drawers),
        adversary=tuple(adversary),
        **kwargs,
    )


# ---------------------------------------------------------------------------
# semantic validation
# ---------------------------------------------------------------------------


def _validate(p: _Parser, file: DomainFile) -> None:
    pred_by_name = {}
    for d in file.predicates:
        if d.name in pred_by_name:
            p.error(1, 1, f"duplicate predicate '{d.name}'")
        pred_by_name[d.name] = d
    obj_types = {}
    for o in file.objects:
        if o.name in obj_types:
            p.error(1, 1, f"duplicate object '{o.name}'")
        obj_types[o.name] = o.type

    def check_literals(owner: str, lits: Sequence[LiteralSpec]) -> None:
        seen: dict[tuple, bool] = {}
        for lit in lits:
            decl = pred_by_name.get(lit.schema)
            if decl is None:
                p.error(1, 1, f"{owner}: undeclared predicate '{lit.schema}'")
                continue
            if len(lit.args) != len(decl.param_types):
                p.error(
                    1,
                    1,
                    f"{owner}: predicate '{lit.schema}' expects "
                    f"{len(decl.param_types)} arguments, got {len(lit.args)}",
                )
                continue
            ok = True
            for arg, want in zip(lit.args, decl.param_types):
                got = obj_types.get(arg)
                if got is None:
                    p.error(1, 1, f"{owner}: undeclared object '{arg}'")
                    ok = False
                elif got != want:
                    p.error(
                        1,
                        1,
                        f"{owner}: object '{arg}' has type '{got}', "
                        f"predicate '{lit.schema}' wants '{want}'",
                    )
                    ok = False
            if not ok:
                continue
            prev = seen.get(lit.key())
            if prev is not None and prev != lit.positive:
                p.error(
                    1, 1, f"{owner}: contradictory literals on '{lit.schema}'"
                )
            seen[lit.key()] = lit.positive

    op_names = set()
    for op in file.operators:
        if op.name in op_names:
            p.error(1, 1, f"duplicate operator '{op.name}'")
        op_names.add(op.name)
        check_literals(f"operator '{op.name}' pre", op.pre)
        check_literals(f"operator '{op.name}' run", op.run)
        check_literals(f"operator '{op.name}' eff", op.eff)

    goal_names = set()
    for g in file.goals:
        if g.name in goal_names:
            p.error(1, 1, f"duplicate goal '{g.name}'")
        goal_names.add(g.name)
        check_literals(f"goal '{g.name}'", g.literals)

    plan_names = set()
    for pl in file.plans:
        if pl.name in plan_names:
            p.error(1, 1, f"duplicate plan '{pl.name}'")
        plan_names.add(pl.name)
        for opname in pl.operator_names:
            if opname not in op_names:
                p.error(1, 1, f"plan '{pl.name}': unknown operator '{opname}'")

    if file.world is not None:
        seen_entities = set()
        for it in file.world.items:
            if it.name in seen_entities:
                p.error(1, 1, f"duplicate world entity '{it.name}'")
            seen_entities.add(it.name)
            if it.name not in obj_types:
                p.error(1, 1, f"world item '{it.name}' is not a declared object")
        for dw in file.world.drawers:
            if dw.name in seen_entities:
                p.error(1, 1, f"duplicate world entity '{dw.name}'")
            seen_entities.add(dw.name)
            if dw.name not in obj_types:
                p.error(1, 1, f"world drawer '{dw.name}' is not a declared object")
        entity_names = {e.name for e in file.world.items} | {
            e.name for e in file.world.drawers
        }
        for ev in file.world.adversary:
            if ev.target is not None and ev.target not in entity_names:
                p.error(1, 1, f"adversary event targets unknown entity '{ev.target}'")
            if ev.after_predicate is not None:
                schema, args = ev.after_predicate
                check_literals("adversary trigger", [LiteralSpec(True, schema, args)])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_vec(v: Sequence[float]) -> str:
    return " ".join(_fmt(x) for x in v)


def _fmt_literal(lit: LiteralSpec) -> str:
    inner = " ".join((lit.schema,) + lit.args)
    return f"({inner})" if lit.positive else f"(not ({inner}))"


def _fmt_literals(lits: Sequence[LiteralSpec]) -> str:
    return " ".join(_fmt_literal(l) for l in lits)


def serialize_domain(file: DomainFile) -> str:
    """Render a DomainFile in canonical formatting (deterministic bytes)."""
    out: list[str] = [f"version {file.version}"]
    if file.name:
        out.append(f"domain {file.name}")
    if file.predicates:
        out.append("")
        for d in file.predicates:
            suffix = f"({', '.join(d.param_types)})" if d.param_types else ""
            out.append(f"predicate {d.name}{suffix}")
    if file.objects:
        out.append("")
        for o in file.objects:
            out.append(f"object {o.name} : {o.type}")
    for op in file.operators:
        out.append("")
        out.append(f"operator {op.name} {{")
        if op.policy is not None:
            pid, pargs = op.policy
            suffix = f"({', '.join(pargs)})" if pargs else ""
            out.append(f"  policy {pid}{suffix}")
        else:
            out.append("  policy none")
        for key, lits in (("pre", op.pre), ("run", op.run), ("eff", op.eff)):
            out.append(f"  {key} {_fmt_literals(lits)}".rstrip())
        out.append("}")
    if file.goals:
        out.append("")
        for g in file.goals:
            out.append(f"goal {g.name} {_fmt_literals(g.literals)}".rstrip())
    if file.plans:
        out.append("")
        for pl in file.plans:
            out.append(f"plan {pl.name} {' '.join(pl.operator_names)}".rstrip())
    if file.world is not None:
        cfg = file.world
        out.append("")
        out.append(f"world {file.world_name} {{")
        out.append(f"  set gripper {cfg.gripper}")
        out.append(f"  set home_position {_fmt_vec(cfg.home.position)}")
        out.append(f"  set home_orientation {_fmt_vec(cfg.home.orientation)}")
        for key in sorted(_WORLD_SCALARS):
            out.append(f"  set {key} {_fmt(getattr(cfg, key))}")
        for it in cfg.items:
            out.append(f"  item {it.name} {{")
            out.append(f"    position {_fmt_vec(it.pose.position)}")
            out.append(f"    orientation {_fmt_vec(it.pose.orientation)}")
            for g in it.grasps:
                out.append(
                    f"    grasp {_fmt_vec(g.position)} / {_fmt_vec(g.orientation)}"
                )
            out.append(f"    standoff {_fmt_vec(it.standoff_offset)}")
            out.append(f"    approach_radius {_fmt(it.approach_radius)}")
            out.append(f"    position_margin {_fmt(it.position_margin)}")
            out.append(f"    angle_margin {_fmt(it.angle_margin)}")
            if it.region is not None:
                out.append(
                    f"    region {_fmt_vec(it.region[0])} {_fmt_vec(it.region[1])}"
                )
            out.append("  }")
        for dw in cfg.drawers:
            out.append(f"  drawer {dw.name} {{")
            out.append(f"    position {_fmt_vec(dw.position)}")
            out.append(f"    axis {_fmt_vec(dw.axis)}")
            out.append(f"    travel {_fmt(dw.travel)}")
            out.append(f"    open_threshold {_fmt(dw.open_threshold)}")
            out.append(f"    handle_offset {_fmt_vec(dw.handle_offset)}")
            out.append(f"    handle_margin {_fmt(dw.handle_margin)}")
            out.append(
                f"    interior {_fmt_vec(dw.interior_min)} {_fmt_vec(dw.interior_max)}"
            )
            out.append(f"    above_offset {_fmt_vec(dw.above_offset)}")
            out.append(f"    above_margin {_fmt(dw.above_margin)}")
            out.append(f"    initial_extension {_fmt(dw.initial_extension)}")
            out.append("  }")
        out.append("}")
        if cfg.adversary:
            out.append("")
            out.append("adversary {")
            for ev in cfg.adversary:
                if ev.at_tick is not None:
                    trigger = f"at {ev.at_tick}"
                else:
                    schema, args = ev.after_predicate
                    lit = _fmt_literal(LiteralSpec(True, schema, args))
                    trigger = f"after {lit} +{ev.delay}"
                if ev.kind == "close_drawer":
                    payload = f"close_drawer {ev.target} {_fmt(ev.amount)}"
                elif ev.kind == "displace_object":
                    payload = f"displace_object {ev.target} {_fmt_vec(ev.offset)}"
                else:
                    payload = f"shove_gripper {_fmt_vec(ev.offset)}"
                out.append(f"  {trigger} {payload}")
            out.append("}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# trace records
# ---------------------------------------------------------------------------


def trace_to_lines(trace: ExecutionTrace, width: int) -> list[str]:
    """Encode a trace as line-delimited JSON records plus a summary footer.

    `width` is the domain's grounding count; states serialize as hex strings
    of ceil(width / 4) digits.
    """

    def dump(obj) -> str:
        return json.dumps(obj, separators=(",", ":"), sort_keys=False)

    lines = [dump({"format": "opchain-trace", "version": FORMAT_VERSION, "width": width})]
    for rec in trace.records:
        lines.append(
            dump(
                {
                    "tick": rec.tick,
                    "state": rec.state.to_hex(),
                    "sel": rec.selected,
                    "op": rec.operator,
                    "transition": rec.transition,
                    "replan": rec.replanned,
                }
            )
        )
    lines.append(
        dump(
            {
                "summary": {
                    "outcome": trace.outcome,
                    "reason": trace.failure_reason,
                    "transitions": trace.transitions,
                    "uncontrolled": trace.uncontrolled,
                    "replans": trace.replans,
                    "final_state": trace.final_state.to_hex(),
                    "stuck_witness": (
                        trace.stuck_witness.to_hex() if trace.stuck_witness else None
                    ),
                    "ticks": trace.ticks,
                }
            }
        )
    )
    return lines


def write_trace(trace: ExecutionTrace, width: int, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(trace_to_lines(trace, width)) + "\n")


def read_trace(text: str) -> ExecutionTrace:
    """Decode a trace written by write_trace; inverse of trace_to_lines."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TraceFormatError(1, "empty trace file")

    def decode(line_no: int, line: str) -> dict:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise TraceFormatError(line_no, f"bad JSON: {e.msg}") from None
        if not isinstance(obj, dict):
            raise TraceFormatError(line_no, "record is not an object")
        return obj

    header = decode(1, lines[0])
    if header.get("format") != "opchain-trace":
        raise TraceFormatError(1, "missing trace header")
    width = header.get("width")
    if not isinstance(width, int) or width < 1:
        raise TraceFormatError(1, "header lacks a valid state width")

    records: list[TickRecord] = []
    summary = None
    for line_no, line in enumerate(lines[1:], start=2):
        obj = decode(line_no, line)
        if "summary" in obj:
            if summary is not None:
                raise TraceFormatError(line_no, "duplicate summary record")
            summary = obj["summary"]
            continue
        if summary is not None:
            raise TraceFormatError(line_no, "record after summary footer")
        try:
            records.append(
                TickRecord(
                    tick=obj["tick"],
                    state=LogicalState.from_hex(width, obj["state"]),
                    selected=obj["sel"],
                    operator=obj["op"],
                    transition=obj["transition"],
                    replanned=obj["replan"],
                )
            )
        except (KeyError, ValueError, TypeError) as e:
            raise TraceFormatError(line_no, f"bad tick record: {e}") from None
    if summary is None:
        raise TraceFormatError(len(lines), "missing summary footer")
    try:
        witness = summary["stuck_witness"]
        return ExecutionTrace(
            records=tuple(records),
            outcome=summary["outcome"],
            failure_reason=summary["reason"],
            transitions=summary["transitions"],
            uncontrolled=summary["uncontrolled"],
            replans=summary["replans"],
            final_state=LogicalState.from_hex(width, summary["final_state"]),
            stuck_witness=(
                LogicalState.from_hex(width, witness) if witness else None
            ),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise TraceFormatError(len(lines), f"bad summary record: {e}") from None


def load_domain(path) -> ParseResult:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_domain(fh.read())
