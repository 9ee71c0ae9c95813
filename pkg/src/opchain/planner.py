"""Greedy best-first task planning over logical states.

Search scores each node by depth plus the number of unmet goal literals and
always expands the lowest score, so it quickly finds short operator sequences
without optimality guarantees.  plan_and_prepare chains planning with
implicit-condition propagation and augmentation to produce an
execution-ready, verified chain.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import PlanningFailedError
from .logic import Condition, LogicalState
from .operators import (
    Chain,
    ImplicitConditionSet,
    Operator,
    augment_with_implicit,
    implicit_conditions,
)

DEFAULT_MAX_EXPANSIONS = 100_000
DEFAULT_MAX_DEPTH = 50


@dataclass
class SearchNode:
    state: LogicalState
    depth: int
    parent: "SearchNode | None" = None
    producing_operator: Operator | None = None
    score: int = 0


@dataclass(frozen=True)
class SearchLimits:
    max_expansions: int = DEFAULT_MAX_EXPANSIONS
    max_depth: int = DEFAULT_MAX_DEPTH


@dataclass(frozen=True)
class PlanResult:
    """Outcome of one planning call.

    `operators` is None when no plan was found; `exhausted_frontier`
    distinguishes proven unsolvability from giving up at the limits.
    """

    operators: tuple[Operator, ...] | None
    expansions: int
    exhausted_frontier: bool = False
    hit_limit: bool = False

    @property
    def solved(self) -> bool:
        return self.operators is not None


def plan(
    initial: LogicalState,
    goal: Condition,
    operators: Iterable[Operator],
    limits: SearchLimits = SearchLimits(),
) -> PlanResult:
    """Greedy best-first search from `initial` to a goal-satisfying state.

    Ties on score break toward lower depth, then lexicographic producing
    operator name, then insertion order, which makes plans reproducible.
    Revisited states re-point their parent only when reached at strictly
    smaller depth; updated nodes are not re-inserted into the frontier.
    """
    ops = sorted(operators, key=lambda o: o.name)
    root = SearchNode(initial, 0, score=goal.distance(initial))
    visited: dict[LogicalState, SearchNode] = {initial: root}
    counter = 0
    frontier: list[tuple[int, int, str, int, SearchNode]] = [
        (root.score, 0, "", counter, root)
    ]
    expansions = 0

    while frontier:
        _, _, _, _, node = heapq.heappop(frontier)
        if goal.evaluate(node.state):
            return PlanResult(_backup(node), expansions)
        if expansions >= limits.max_expansions:
            return PlanResult(None, expansions, hit_limit=True)
        expansions += 1
        if node.depth >= limits.max_depth:
            continue
        for op in ops:
            if not op.entry.evaluate(node.state):
                continue
            successor = op.effects.apply(node.state)
            known = visited.get(successor)
            if known is not None:
                if node.depth + 1 < known.depth:
                    known.parent = node
                    known.producing_operator = op
                    known.depth = node.depth + 1
                continue
            child = SearchNode(
                state=successor,
                depth=node.depth + 1,
                parent=node,
                producing_operator=op,
                score=node.depth + 1 + goal.distance(successor),
            )
            visited[successor] = child
            counter += 1
            heapq.heappush(
                frontier, (child.score, child.depth, op.name, counter, child)
            )
    return PlanResult(None, expansions, exhausted_frontier=True)


def _backup(node: SearchNode) -> tuple[Operator, ...]:
    out: list[Operator] = []
    while node.parent is not None:
        out.append(node.producing_operator)
        node = node.parent
    out.reverse()
    return tuple(out)


def plan_and_prepare(
    initial: LogicalState,
    goal: Condition,
    operators: Iterable[Operator],
    limits: SearchLimits = SearchLimits(),
    mode: str = "strict",
) -> tuple[Chain, ImplicitConditionSet]:
    """Plan, derive implicit conditions, and return the augmented chain.

    Raises PlanningFailedError when the search fails; an already-satisfied
    goal yields an empty chain.
    """
    result = plan(initial, goal, operators, limits)
    if not result.solved:
        raise PlanningFailedError(result)
    implicit = implicit_conditions(result.operators, goal, mode=mode)
    chain = Chain(result.operators, goal)
    return augment_with_implicit(chain, implicit), implicit
