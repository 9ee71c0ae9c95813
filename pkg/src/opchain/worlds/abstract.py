"""Abstract stochastic stage chain for convergence experiments.

The world is a ladder of N stages with marker predicates stage_reached(s_i).
Each tick, the running operator's pending attempt either succeeds (stage
advances by one) with its configured probability or fails, regressing the
stage; an independent ambient perturbation can also fire with probability q
per tick.  The default regression jumps all the way back to stage zero, the
worst case for convergence, so measured statistics can be compared directly
against the closed-form transition bounds.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import PolicyError
from ..logic import Condition, Domain, LogicalState, PredicateSchema
from ..operators import Chain, Operator
from .base import WorldModel

REGRESSION_MODES = ("to_start", "back_one")


def _marker(i: int) -> str:
    return f"s{i:02d}"


class AbstractStochasticWorld(WorldModel):
    """Stage ladder with per-operator success probabilities and perturbations."""

    def __init__(
        self,
        chain_length: int,
        p: float | Sequence[float] = 0.9,
        q: float = 0.0,
        regression: str = "to_start",
        attempt_ticks: int = 1,
        seed: int | None = None,
    ):
        if chain_length < 1:
            raise ValueError("chain_length must be >= 1")
        if regression not in REGRESSION_MODES:
            raise ValueError(f"regression must be one of {REGRESSION_MODES}")
        if not 0 <= q < 1:
            raise ValueError("q must lie in [0, 1)")
        self.n = chain_length
        if np.isscalar(p):
            self.p = [float(p)] * chain_length
        else:
            self.p = [float(x) for x in p]
            if len(self.p) != chain_length:
                raise ValueError("need one success probability per stage")
        if any(not 0 < x <= 1 for x in self.p):
            raise ValueError("success probabilities must lie in (0, 1]")
        self.q = q
        self.regression = regression
        self.attempt_ticks = attempt_ticks
        self._seed = seed

        markers = [(_marker(i), "stage") for i in range(chain_length + 1)]
        self.domain = Domain([PredicateSchema("stage_reached", ("stage",))], markers)
        self.reseed(seed)

    def reseed(self, seed: int | None) -> None:
        self._seed = seed
        self.rng = np.random.default_rng(seed)
        self.stage = 0
        self._progress = 0
        self._target: int | None = None
        self.attempts = np.zeros(self.n, dtype=np.int64)
        self.successes = np.zeros(self.n, dtype=np.int64)

    def observe(self) -> int:
        return self.stage

    def logical_state(self) -> LogicalState:
        # stage_reached(s_i) holds for every i <= current stage
        return LogicalState(self.domain.size, (1 << (self.stage + 1)) - 1)

    def step(self, policy_id: str | None, args: tuple[str, ...] = ()) -> None:
        if self.q and self.rng.random() < self.q:
            self._regress()
            return
        if policy_id is None:
            return
        if policy_id != "advance":
            raise PolicyError(f"unknown policy '{policy_id}'")
        target = int(args[0])
        if target != self._target:
            self._target = target
            self._progress = 0
        self._progress += 1
        if self._progress < self.attempt_ticks:
            return
        self._progress = 0
        self.attempts[target - 1] += 1
        if self.rng.random() < self.p[target - 1]:
            self.successes[target - 1] += 1
            self.stage = target
        else:
            self._regress()

    def _regress(self) -> None:
        self._progress = 0
        if self.regression == "to_start":
            self.stage = 0
        else:
            self.stage = max(0, self.stage - 1)

    def inject(self, event) -> None:
        kind, *rest = event
        if kind == "set_stage":
            self.stage = int(rest[0])
        elif kind == "regress":
            self._regress()
        else:
            raise ValueError(f"unknown event kind '{kind}'")

    # chain construction -----------------------------------------------------

    def make_operators(self) -> tuple[Operator, ...]:
        """One advance operator per stage; entry requires the previous marker
        and excludes the final one, so exactly the operator at the current
        stage is the most downstream enterable one."""
        dom = self.domain
        ops = []
        for i in range(1, self.n + 1):
            entry = dom.condition(
                ("stage_reached", _marker(i - 1)),
                ("not", "stage_reached", _marker(self.n)),
            )
            ops.append(
                Operator(
                    name=f"advance_{_marker(i)}",
                    entry=entry,
                    run=entry,
                    effects=dom.condition(("stage_reached", _marker(i))),
                    policy_id="advance",
                    policy_args=(str(i),),
                )
            )
        return tuple(ops)

    def goal(self) -> Condition:
        return self.domain.condition(("stage_reached", _marker(self.n)))

    def make_chain(self) -> Chain:
        return Chain(self.make_operators(), self.goal())
