"""Tick-based execution of operator chains against a world.

Three strategies share one engine loop:

* reactive     - every tick, scan operators downstream-to-upstream and select
                 the first whose entry condition holds (or run condition, for
                 the operator already running); the most downstream applicable
                 operator always wins.
* linear       - advance to the next operator only when its entry condition
                 holds, keep running the current one while its run condition
                 holds, and fail otherwise.
* linear-replan - like linear, but the failure case replans from the current
                 logical state and resumes on the fresh chain.

Every selection change is a transition; a change is controlled when the
departing operator's effects held at the moment of departure and uncontrolled
otherwise (which covers both upstream falls and forward skips).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

from .errors import PlanningFailedError
from .logic import Condition, LogicalState
from .operators import Chain, Operator
from .planner import SearchLimits, plan_and_prepare


class Strategy(str, Enum):
    REACTIVE = "reactive"
    LINEAR = "linear"
    LINEAR_REPLAN = "linear-replan"


@dataclass(frozen=True)
class EngineConfig:
    """Engine knobs.

    tick_rate_hint documents how many ticks stand for one simulated second;
    nothing in the engine depends on it.  stuck_limit is the error_after
    policy: None idles through ticks where no operator is selectable, an
    integer m fails the run after m consecutive stuck ticks.
    """

    tick_budget: int = 10_000
    tick_rate_hint: float = 10.0
    stuck_limit: int | None = None

    def __post_init__(self):
        if self.tick_budget < 1:
            raise ValueError("tick_budget must be >= 1")


CONTROLLED = "controlled"
UNCONTROLLED = "uncontrolled"
NO_TRANSITION = "none"


@dataclass(frozen=True)
class TickRecord:
    tick: int
    state: LogicalState
    selected: int | None  # index into the chain's priority order
    operator: str | None
    transition: str  # none | controlled | uncontrolled
    replanned: bool = False


@dataclass(frozen=True)
class ExecutionTrace:
    records: tuple[TickRecord, ...]
    outcome: str  # success | failure | budget_exhausted
    failure_reason: str | None
    transitions: int
    uncontrolled: int
    replans: int
    final_state: LogicalState
    stuck_witness: LogicalState | None = None

    @property
    def succeeded(self) -> bool:
        return self.outcome == "success"

    @property
    def ticks(self) -> int:
        return len(self.records)


def _select_reactive(
    seq: Sequence[Operator], state: LogicalState, prev: int | None
) -> int | None:
    for i in range(len(seq) - 1, -1, -1):
        if i != prev:
            if seq[i].entry.evaluate(state):
                return i
        elif seq[i].run.evaluate(state):
            return i
    return None


def _select_linear(
    seq: Sequence[Operator], state: LogicalState, prev: int | None
) -> int | None:
    nxt = 0 if prev is None else prev + 1
    if nxt < len(seq) and seq[nxt].entry.evaluate(state):
        return nxt
    if prev is not None and seq[prev].run.evaluate(state):
        return prev
    return None


def execute(
    chain: Chain,
    world,
    strategy: Strategy = Strategy.REACTIVE,
    config: EngineConfig = EngineConfig(),
    seed: int | None = None,
    replan_operators: Sequence[Operator] | None = None,
    replan_limits: SearchLimits = SearchLimits(),
) -> ExecutionTrace:
    """Run `chain` against `world` until the goal holds or the budget runs out.

    The chain is expected to pass verify_chain and the world to resolve every
    policy id.  With a seed, the world is reseeded first so runs are
    reproducible.  linear-replan needs `replan_operators`, the pool handed to
    the planner when the linear order breaks down.
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.LINEAR_REPLAN and replan_operators is None:
        raise ValueError("linear-replan requires replan_operators")
    if seed is not None:
        world.reseed(seed)

    goal = chain.goal
    seq: tuple[Operator, ...] = (
        chain.priority_order if strategy is Strategy.REACTIVE else chain.operators
    )
    records: list[TickRecord] = []
    prev: int | None = None
    transitions = 0
    uncontrolled = 0
    replans = 0
    stuck_streak = 0
    outcome = "success"
    reason: str | None = None
    witness: LogicalState | None = None

    state = world.logical_state()
    tick = 0
    while not goal.evaluate(state):
        if tick >= config.tick_budget:
            outcome = "budget_exhausted"
            break
        tick += 1
        sel = (
            _select_reactive(seq, state, prev)
            if strategy is Strategy.REACTIVE
            else _select_linear(seq, state, prev)
        )

        if sel is None and strategy is Strategy.LINEAR_REPLAN:
            try:
                new_chain, _ = plan_and_prepare(
                    state, goal, replan_operators, replan_limits
                )
            except PlanningFailedError:
                outcome = "failure"
                reason = "plan_unsolvable"
                records.append(
                    TickRecord(tick, state, None, None, NO_TRANSITION, True)
                )
                break
            seq = new_chain.operators
            replans += 1
            prev = None
            records.append(TickRecord(tick, state, None, None, NO_TRANSITION, True))
            continue

        if sel is None and strategy is Strategy.LINEAR:
            outcome = "failure"
            reason = "linear_order_broken"
            records.append(TickRecord(tick, state, None, None, NO_TRANSITION))
            break

        if sel is None:  # reactive with no enterable operator
            stuck_streak += 1
            records.append(TickRecord(tick, state, None, None, NO_TRANSITION))
            if config.stuck_limit is not None and stuck_streak >= config.stuck_limit:
                outcome = "failure"
                reason = "no_enterable_operator"
                witness = state
                break
            prev = None
            world.step(None, ())
            state = world.logical_state()
            continue

        stuck_streak = 0
        label = NO_TRANSITION
        if sel != prev:
            transitions += 1
            if prev is not None and not seq[prev].effects.evaluate(state):
                label = UNCONTROLLED
                uncontrolled += 1
            else:
                label = CONTROLLED
        op = seq[sel]
        records.append(TickRecord(tick, state, sel, op.name, label))
        world.step(op.policy_id, op.policy_args)
        prev = sel
        state = world.logical_state()

    return ExecutionTrace(
        records=tuple(records),
        outcome=outcome,
        failure_reason=reason,
        transitions=transitions,
        uncontrolled=uncontrolled,
        replans=replans,
        final_state=state,
        stuck_witness=witness,
    )


def label_transitions(trace: ExecutionTrace, chain: Chain) -> ExecutionTrace:
    """Recompute transition labels of a trace from its state snapshots.

    Pure function of the recorded states and selections; produces a trace
    whose labels and counts are derived solely from the chain's effect
    conditions, which makes it a cross-check on the engine's online labels.
    """
    seq = chain.priority_order
    relabeled: list[TickRecord] = []
    prev: int | None = None
    transitions = 0
    uncontrolled = 0
    for rec in trace.records:
        label = NO_TRANSITION
        if rec.selected is not None and rec.selected != prev:
            transitions += 1
            if prev is not None and not seq[prev].effects.evaluate(rec.state):
                label = UNCONTROLLED
                uncontrolled += 1
            else:
                label = CONTROLLED
        relabeled.append(replace(rec, transition=label))
        prev = rec.selected
    return replace(
        trace,
        records=tuple(relabeled),
        transitions=transitions,
        uncontrolled=uncontrolled,
    )
