"""Operators, chains, chain verification, composition, and implicit conditions.

An operator couples an entry condition (when it may be newly selected), a run
condition (when it may keep running), expected effects, and a policy
reference.  A chain is an ordered operator sequence driving toward a goal;
verification checks that each operator's effects, together with literals that
persist, establish the next operator's entry condition and that every entry
condition implies its run condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Literal as TLiteral, Sequence

import numpy as np

from .errors import AugmentationError, CapacityError
from .logic import Condition, Domain, Literal, LogicalState


@dataclass(frozen=True)
class Operator:
    """Atomic task unit: entry/run conditions, expected effects, and a policy."""

    name: str
    entry: Condition = Condition()
    run: Condition = Condition()
    effects: Condition = Condition()
    policy_id: str | None = None
    policy_args: tuple[str, ...] = ()

    def with_guard(self, guard: Condition) -> Operator:
        """Return a copy whose entry and run conditions both require `guard`."""
        return replace(
            self, entry=self.entry.union(guard), run=self.run.union(guard)
        )

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Chain:
    """Ordered operator sequence plus goal; reactions are a highest-priority
    suffix excluded from the pairwise chaining check."""

    operators: tuple[Operator, ...]
    goal: Condition
    reactions: tuple[Operator, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(self.operators))
        object.__setattr__(self, "reactions", tuple(self.reactions))

    def __len__(self) -> int:
        return len(self.operators)

    @property
    def priority_order(self) -> tuple[Operator, ...]:
        """All operators in upstream-to-downstream order, reactions last."""
        return self.operators + self.reactions


@dataclass(frozen=True)
class Violation:
    """One broken chaining requirement, attached to a chain position (1-based)."""

    position: int
    operator: str
    kind: str  # "unestablished" | "clobbered" | "entry_implies_run"
    literal: Literal | None
    message: str

    def __str__(self) -> str:
        return f"[{self.position}:{self.operator}] {self.kind}: {self.message}"


@dataclass(frozen=True)
class VerificationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _establishes(prev: Operator, lit: Literal) -> tuple[bool, str]:
    """Frame-aware establishment of `lit` across `prev`.

    A literal is established if prev's effects assert it, or if it is carried
    over: already required by prev's entry or run condition and not clobbered
    by prev's effects.
    """
    if prev.effects.mentions(lit):
        return True, "effect"
    if prev.effects.contradicts(lit):
        return False, "clobbered"
    if prev.entry.mentions(lit) or prev.run.mentions(lit):
        return True, "carried"
    return False, "unestablished"


def verify_chain(chain: Chain) -> VerificationReport:
    """Check the pairwise chaining condition and entry-implies-run everywhere.

    Violations are data, not errors: the report lists every literal that the
    preceding operator fails to establish, plus every operator whose entry
    condition does not syntactically imply its run condition (reactions
    included).
    """
    violations: list[Violation] = []
    ops = chain.operators
    for i, op in enumerate(ops[:-1]):
        nxt = ops[i + 1]
        for lit in nxt.entry:
            ok, how = _establishes(op, lit)
            if not ok:
                violations.append(
                    Violation(
                        position=i + 1,
                        operator=op.name,
                        kind=how,
                        literal=lit,
                        message=(
                            f"entry literal {lit} of '{nxt.name}' is not "
                            f"established by '{op.name}'"
                        ),
                    )
                )
    for i, op in enumerate(chain.priority_order):
        if not op.entry.entails(op.run):
            missing = [l for l in op.run if not op.entry.mentions(l)]
            violations.append(
                Violation(
                    position=i + 1,
                    operator=op.name,
                    kind="entry_implies_run",
                    literal=missing[0] if missing else None,
                    message=f"entry condition of '{op.name}' does not imply its run condition",
                )
            )
    return VerificationReport(tuple(violations))


@dataclass(frozen=True)
class CompletenessResult:
    complete: bool
    witness: LogicalState | None
    states_checked: int
    exhaustive: bool

    def __bool__(self) -> bool:
        return self.complete


_EXHAUSTIVE_LIMIT = 20


def check_completeness(
    chain: Chain,
    domain: Domain,
    samples: int | None = None,
    seed: int | None = None,
) -> CompletenessResult:
    """Decide whether the union of all entry conditions covers the state space.

    Exhaustive mode (samples=None) enumerates all 2^G states and is capped at
    G <= 20; sampled mode draws `samples` uniform states and gives a
    probabilistic verdict.  Returns the first uncovered state as a witness.
    """
    g = domain.size
    ops = chain.priority_order
    if samples is None:
        if g > _EXHAUSTIVE_LIMIT:
            raise CapacityError(
                f"exhaustive completeness needs G <= {_EXHAUSTIVE_LIMIT}, got {g}"
            )
        states = np.arange(1 << g, dtype=np.uint64)
        covered = np.zeros(states.shape, dtype=bool)
        for op in ops:
            pos = np.uint64(op.entry.pos_mask)
            neg = np.uint64(op.entry.neg_mask)
            covered |= ((states & pos) == pos) & ((states & neg) == 0)
        uncovered = np.flatnonzero(~covered)
        if uncovered.size:
            witness = LogicalState(g, int(states[uncovered[0]]))
            return CompletenessResult(False, witness, int(states.size), True)
        return CompletenessResult(True, None, int(states.size), True)

    rng = np.random.default_rng(seed)
    for _ in range(samples):
        value = 0
        for i in range(g):
            if rng.integers(0, 2):
                value |= 1 << i
        state = LogicalState(g, value)
        if not any(op.entry.evaluate(state) for op in ops):
            return CompletenessResult(False, state, samples, False)
    return CompletenessResult(True, None, samples, False)


def cumulative_effects(plan: Sequence[Operator]) -> Condition:
    """Fold effects left to right; later assignments override earlier ones."""
    assigned: dict[int, bool] = {}
    for op in plan:
        for lit in op.effects:
            assigned[lit.index] = lit.positive
    return Condition(Literal(i, v) for i, v in assigned.items())


def compose_hierarchical(plan: Sequence[Operator], name: str) -> Operator:
    """Collapse a plan into one macro operator carrying its cumulative effects.

    The macro starts with empty entry and run conditions; callers specialise
    it by adding guard literals (see Operator.with_guard).
    """
    if not plan:
        raise ValueError("cannot compose an empty plan")
    return Operator(name=name, effects=cumulative_effects(plan), policy_id=None)


@dataclass(frozen=True)
class ImplicitWarning:
    """A propagated requirement that an earlier operator's effects contradict."""

    position: int
    operator: str
    literal: Literal

    def __str__(self) -> str:
        return (
            f"operator {self.position} ('{self.operator}') clobbers "
            f"propagated requirement {self.literal}"
        )


@dataclass(frozen=True)
class ImplicitConditionSet:
    """Backward-propagated sequencing requirements, one condition per position."""

    per_operator: tuple[Condition, ...]
    warnings: tuple[ImplicitWarning, ...] = ()

    def __len__(self) -> int:
        return len(self.per_operator)

    def __getitem__(self, i: int) -> Condition:
        return self.per_operator[i]


def implicit_conditions(
    plan: Sequence[Operator],
    goal: Condition,
    mode: TLiteral["strict", "general"] = "strict",
) -> ImplicitConditionSet:
    """Propagate requirements backward from the goal through the plan.

    Working back from the goal, position i keeps every literal needed by a
    later entry condition or by the goal that operator i's effects do not
    supply.  A propagated literal that operator i's effects contradict is a
    plan-ordering defect: it is reported as a warning, removed to keep the
    result consistent, and not propagated further (requiring it earlier
    cannot survive the clobbering effects anyway).

    In "general" mode, a position additionally drops literals that no earlier
    operator produces; those cannot be sequencing constraints internal to the
    plan.  Default is "strict", which keeps them.
    """
    n = len(plan)
    per: list[Condition] = [Condition()] * n
    warnings: list[ImplicitWarning] = []
    pending: set[Literal] = set()
    next_entry: Iterable[Literal] = goal
    for i in range(n - 1, -1, -1):
        op = plan[i]
        candidates = pending | set(next_entry)
        kept: set[Literal] = set()
        for lit in candidates:
            if op.effects.mentions(lit):
                continue  # expected result of this operator
            if op.effects.contradicts(lit):
                warnings.append(ImplicitWarning(i + 1, op.name, lit))
                continue
            kept.add(lit)
        per[i] = Condition(kept)
        pending = kept
        next_entry = op.entry

    if mode == "general":
        produced: set[Literal] = set()
        filtered: list[Condition] = []
        for i in range(n):
            filtered.append(Condition(l for l in per[i] if l in produced))
            produced.update(plan[i].effects)
        per = filtered
    elif mode != "strict":
        raise ValueError(f"unknown mode {mode!r}")

    return ImplicitConditionSet(tuple(per), tuple(warnings))


def augment_with_implicit(chain: Chain, implicit: ImplicitConditionSet) -> Chain:
    """Union each operator's entry and run conditions with its implicit set.

    Returns a new chain; the input is untouched.  A union that would demand
    both polarities of a grounding is a construction error naming the
    operator and the offending literal.
    """
    if len(implicit) != len(chain.operators):
        raise ValueError(
            f"implicit set has {len(implicit)} entries for a chain of "
            f"{len(chain.operators)} operators"
        )
    augmented = []
    for op, extra in zip(chain.operators, implicit.per_operator):
        for lit in extra:
            if op.entry.contradicts(lit) or op.run.contradicts(lit):
                raise AugmentationError(
                    op.name, f"implicit literal {lit} contradicts its conditions"
                )
            if op.effects.contradicts(lit):
                raise AugmentationError(
                    op.name, f"implicit literal {lit} contradicts its effects"
                )
        augmented.append(op.with_guard(extra))
    return Chain(tuple(augmented), chain.goal, chain.reactions)
