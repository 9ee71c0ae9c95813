"""Ground-predicate vocabulary, logical states, and conjunctive conditions.

A Domain enumerates every type-valid grounding of its predicate schemas and
assigns each one a dense, stable index.  A LogicalState is a truth assignment
over those groundings; a Condition is a conjunction of ground literals.  All
three are immutable values, safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import ContradictionError, DomainMismatchError


@dataclass(frozen=True)
class PredicateSchema:
    """A named predicate with an ordered list of parameter types."""

    name: str
    parameter_types: tuple[str, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.parameter_types)


@dataclass(frozen=True)
class GroundPredicate:
    """A schema with concrete objects bound to every parameter."""

    schema: str
    arguments: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.arguments:
            return self.schema
        return f"{self.schema}({', '.join(self.arguments)})"


class Domain:
    """Immutable predicate vocabulary with a dense grounding index.

    Grounding is eager: every type-valid combination of objects is enumerated
    at construction, ordered lexicographically by schema name and then by
    argument names so that indices are reproducible across runs.
    """

    def __init__(
        self,
        schemas: Iterable[PredicateSchema],
        objects: Iterable[tuple[str, str]],
    ):
        self.schemas: tuple[PredicateSchema, ...] = tuple(
            sorted(schemas, key=lambda s: s.name)
        )
        names = [s.name for s in self.schemas]
        if len(set(names)) != len(names):
            raise ValueError("duplicate predicate schema names")
        self.objects: tuple[tuple[str, str], ...] = tuple(sorted(objects))
        if len({name for name, _ in self.objects}) != len(self.objects):
            raise ValueError("duplicate object names")

        by_type: dict[str, list[str]] = {}
        for obj_name, obj_type in self.objects:
            by_type.setdefault(obj_type, []).append(obj_name)
        for pool in by_type.values():
            pool.sort()

        groundings: list[GroundPredicate] = []
        for schema in self.schemas:
            pools = [by_type.get(t, []) for t in schema.parameter_types]
            for combo in product(*pools):
                groundings.append(GroundPredicate(schema.name, combo))
        self.groundings: tuple[GroundPredicate, ...] = tuple(groundings)
        self._index = {g: i for i, g in enumerate(self.groundings)}

    @property
    def size(self) -> int:
        """Number of groundings G; also the logical-state width in bits."""
        return len(self.groundings)

    def index_of(self, schema: str, *arguments: str) -> int:
        key = GroundPredicate(schema, tuple(arguments))
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"unknown grounding {key}") from None

    def grounding_at(self, index: int) -> GroundPredicate:
        return self.groundings[index]

    def literal(self, schema: str, *arguments: str, positive: bool = True) -> Literal:
        return Literal(self.index_of(schema, *arguments), positive)

    def condition(self, *literals: Literal | tuple) -> Condition:
        """Build a Condition from Literals or (schema, *args) tuples.

        A tuple prefixed with "not" negates, e.g. ("not", "drawer_is_open", "d").
        """
        out = []
        for lit in literals:
            if isinstance(lit, Literal):
                out.append(lit)
            elif lit and lit[0] == "not":
                out.append(self.literal(lit[1], *lit[2:], positive=False))
            else:
                out.append(self.literal(lit[0], *lit[1:]))
        return Condition(out)

    def state(self, *true_groundings: tuple | int) -> LogicalState:
        """Build a state with the named groundings true and all others false."""
        value = 0
        for g in true_groundings:
            idx = g if isinstance(g, int) else self.index_of(g[0], *g[1:])
            value |= 1 << idx
        return LogicalState(self.size, value)

    def state_from_bits(self, bits: Sequence[int] | np.ndarray) -> LogicalState:
        arr = np.asarray(bits, dtype=bool)
        if arr.shape != (self.size,):
            raise DomainMismatchError(
                f"expected {self.size} bits, got shape {arr.shape}"
            )
        value = 0
        for i in np.flatnonzero(arr):
            value |= 1 << int(i)
        return LogicalState(self.size, value)

    def all_states(self):
        """Iterate every logical state; only sensible for small domains."""
        for value in range(1 << self.size):
            yield LogicalState(self.size, value)

    def describe(self, state: LogicalState) -> str:
        names = [str(g) for g, bit in zip(self.groundings, state.bits) if bit]
        return "{" + ", ".join(names) + "}"

    def __repr__(self) -> str:
        return f"Domain({len(self.schemas)} schemas, {len(self.objects)} objects, G={self.size})"


class LogicalState:
    """Fixed-width truth vector over a domain's groundings.

    Backed by an integer bit mask (bit i = grounding i) so evaluation and
    effect application are single mask operations; exposed as a numpy bool
    array through ``bits`` for vectorised analysis.
    """

    __slots__ = ("width", "value")

    def __init__(self, width: int, value: int = 0):
        if value < 0 or value >> width:
            raise DomainMismatchError(f"state value out of range for width {width}")
        self.width = width
        self.value = value

    @property
    def bits(self) -> np.ndarray:
        out = np.zeros(self.width, dtype=bool)
        v = self.value
        i = 0
        while v:
            if v & 1:
                out[i] = True
            v >>= 1
            i += 1
        return out

    def get(self, index: int) -> bool:
        if index >= self.width:
            raise DomainMismatchError(f"grounding index {index} out of range")
        return bool((self.value >> index) & 1)

    def with_bit(self, index: int, value: bool) -> LogicalState:
        if index >= self.width:
            raise DomainMismatchError(f"grounding index {index} out of range")
        mask = 1 << index
        new = self.value | mask if value else self.value & ~mask
        return LogicalState(self.width, new)

    def true_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.width) if (self.value >> i) & 1)

    def to_hex(self) -> str:
        """Hex encoding, zero-padded to ceil(width / 4) digits."""
        digits = max(1, (self.width + 3) // 4)
        return format(self.value, f"0{digits}x")

    @classmethod
    def from_hex(cls, width: int, text: str) -> LogicalState:
        return cls(width, int(text, 16))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LogicalState)
            and self.width == other.width
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((self.width, self.value))

    def __repr__(self) -> str:
        return f"LogicalState(width={self.width}, value={self.value:#x})"


@dataclass(frozen=True, order=True)
class Literal:
    """One grounding index with a polarity."""

    index: int
    positive: bool = True

    def negated(self) -> Literal:
        return Literal(self.index, not self.positive)


class Condition:
    """Conjunction of ground literals; the empty condition is always true."""

    __slots__ = ("literals", "pos_mask", "neg_mask")

    def __init__(self, literals: Iterable[Literal] = ()):
        lits = tuple(sorted(set(literals)))
        pos = 0
        neg = 0
        for lit in lits:
            mask = 1 << lit.index
            if lit.positive:
                pos |= mask
            else:
                neg |= mask
        if pos & neg:
            bad = (pos & neg).bit_length() - 1
            raise ContradictionError(
                f"condition requires both polarities of grounding {bad}"
            )
        self.literals = lits
        self.pos_mask = pos
        self.neg_mask = neg

    def evaluate(self, state: LogicalState) -> bool:
        """True iff every positive bit is set and every negative bit is clear."""
        self._check(state)
        v = state.value
        return (v & self.pos_mask) == self.pos_mask and not (v & self.neg_mask)

    def entails(self, other: Condition) -> bool:
        """Syntactic entailment: self implies other iff other's literals ⊆ self's."""
        return (
            (self.pos_mask & other.pos_mask) == other.pos_mask
            and (self.neg_mask & other.neg_mask) == other.neg_mask
        )

    def apply(self, state: LogicalState) -> LogicalState:
        """Apply as effects: set positive bits, clear negative bits, frame the rest."""
        self._check(state)
        return LogicalState(
            state.width, (state.value | self.pos_mask) & ~self.neg_mask
        )

    def distance(self, state: LogicalState) -> int:
        """Number of literals this condition has that the state does not satisfy."""
        self._check(state)
        unmet_pos = self.pos_mask & ~state.value
        unmet_neg = self.neg_mask & state.value
        return int(unmet_pos.bit_count() + unmet_neg.bit_count())

    def union(self, other: Condition) -> Condition:
        return Condition(self.literals + other.literals)

    def contradicts(self, lit: Literal) -> bool:
        mask = 1 << lit.index
        return bool((self.neg_mask if lit.positive else self.pos_mask) & mask)

    def mentions(self, lit: Literal) -> bool:
        mask = 1 << lit.index
        return bool((self.pos_mask if lit.positive else self.neg_mask) & mask)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    def max_index(self) -> int:
        return (self.pos_mask | self.neg_mask).bit_length() - 1

    def _check(self, state: LogicalState) -> None:
        if self.max_index() >= state.width:
            raise DomainMismatchError(
                f"condition references grounding {self.max_index()} "
                f"but state has width {state.width}"
            )

    def describe(self, domain: Domain) -> str:
        parts = []
        for lit in self.literals:
            name = str(domain.grounding_at(lit.index))
            parts.append(name if lit.positive else f"not {name}")
        return "{" + ", ".join(parts) + "}"

    def __eq__(self, other) -> bool:
        return isinstance(other, Condition) and self.literals == other.literals

    def __hash__(self) -> int:
        return hash(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def __repr__(self) -> str:
        return f"Condition({list(self.literals)})"


TRUE_CONDITION = Condition()


def evaluate(cond: Condition, state: LogicalState) -> bool:
    return cond.evaluate(state)


def entails(a: Condition, b: Condition) -> bool:
    return a.entails(b)


def apply_effects(effects: Condition, state: LogicalState) -> LogicalState:
    return effects.apply(state)


def goal_distance(state: LogicalState, goal: Condition) -> int:
    return goal.distance(state)
