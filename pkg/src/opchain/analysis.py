"""Convergence bounds, the Monte Carlo harness that checks them, and the
strategy benchmark.

For a chain of N operators that each complete with probability at least p,
the probability of reaching the goal within k uncontrolled transitions is
bounded below by 1 - (1 - p^N)^(k+1), and the expected number of transitions
is bounded above by N / p^N.  The harness runs the reactive engine on the
abstract stage world in its worst-case regression mode and checks empirical
statistics against both bounds (one-sided, with a 3-standard-error margin on
the probability curve).  The benchmark reruns the kitchen task under the
three execution strategies with randomized placements and an optional
drawer-closing adversary.

Trials are independent; per-trial seeds derive from the master seed and the
trial index, so serial and parallel runs aggregate identical numbers.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .domain_io import DomainFile
from .executor import EngineConfig, Strategy, execute
from .planner import plan_and_prepare
from .worlds.abstract import AbstractStochasticWorld
from .worlds.kitchen import AdversaryEvent

# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceParams:
    """Chain length and per-operator controlled-transition probability."""

    chain_length: int
    p: float

    def __post_init__(self):
        if self.chain_length < 1:
            raise ValueError("chain_length must be >= 1")
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")

    @property
    def gamma(self) -> float:
        """Probability that one full run through the chain fails somewhere."""
        return 1.0 - self.p**self.chain_length

    @property
    def inflation(self) -> float:
        """Multiplicative transition overhead caused by failures: p^-N."""
        return self.p**-self.chain_length


def pk_bound(params: ConvergenceParams, k: int) -> float:
    """Lower bound on P(goal reached with at most k uncontrolled transitions)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return 1.0 - params.gamma ** (k + 1)


def expected_transitions_bound(params: ConvergenceParams) -> float:
    """Upper bound on the expected number of operator transitions: N / p^N."""
    return params.chain_length * params.inflation


def default_tick_budget(params: ConvergenceParams) -> int:
    return int(np.ceil(100 * params.chain_length * params.inflation))


# ---------------------------------------------------------------------------
# Monte Carlo convergence harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    name: str  # "mean_transitions" | "pk"
    k: int | None
    empirical: float
    bound: float
    margin: float
    ok: bool


@dataclass(frozen=True)
class TrialSummary:
    """Aggregate of seeded convergence trials plus bound verdicts."""

    params: ConvergenceParams
    trials: int
    succeeded: tuple[bool, ...]
    transitions: tuple[int, ...]
    uncontrolled: tuple[int, ...]
    ticks: tuple[int, ...]
    wall_clock: tuple[float, ...]
    tick_budget: int
    q: float
    regression: str
    seed: int

    @property
    def successes(self) -> int:
        return int(sum(self.succeeded))

    @property
    def mean_transitions(self) -> float:
        return float(np.mean(self.transitions))

    def pk_curve(self) -> tuple[np.ndarray, np.ndarray]:
        """Empirical P(success within k uncontrolled transitions) for each
        observed k; nondecreasing by construction."""
        counts = np.asarray(self.uncontrolled)
        succ = np.asarray(self.succeeded, dtype=bool)
        ks = np.arange(0, int(counts.max()) + 1)
        values = np.array([float(np.mean(succ & (counts <= k))) for k in ks])
        return ks, values

    def checks(self) -> list[BoundCheck]:
        mean = self.mean_transitions
        bound = expected_transitions_bound(self.params)
        out = [
            BoundCheck("mean_transitions", None, mean, bound, 0.0, mean <= bound)
        ]
        ks, values = self.pk_curve()
        for k, v in zip(ks, values):
            b = pk_bound(self.params, int(k))
            v = float(v)
            margin = 3.0 * float(np.sqrt(v * (1.0 - v) / self.trials))
            out.append(BoundCheck("pk", int(k), v, b, margin, v >= b - margin))
        return out

    @property
    def all_ok(self) -> bool:
        return self.successes == self.trials and all(c.ok for c in self.checks())


def _trial_seed(master: int, index: int, salt: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence((master, index, salt))


def _convergence_chunk(args) -> list[tuple[bool, int, int, int, float]]:
    n, p, q, regression, budget, master_seed, start, stop = args
    world = AbstractStochasticWorld(n, p=p, q=q, regression=regression)
    chain = world.make_chain()
    config = EngineConfig(tick_budget=budget)
    out = []
    for i in range(start, stop):
        world.reseed(_trial_seed(master_seed, i))
        t0 = time.perf_counter()
        trace = execute(chain, world, Strategy.REACTIVE, config)
        elapsed = time.perf_counter() - t0
        out.append(
            (trace.succeeded, trace.transitions, trace.uncontrolled, trace.ticks, elapsed)
        )
    return out


def _chunk_ranges(total: int, jobs: int) -> list[tuple[int, int]]:
    size = (total + jobs - 1) // jobs
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def montecarlo_convergence(
    params: ConvergenceParams,
    trials: int,
    seed: int,
    q: float = 0.0,
    regression: str = "to_start",
    tick_budget: int | None = None,
    jobs: int = 1,
) -> TrialSummary:
    """Run seeded reactive trials on the abstract world and summarise them.

    Bound violations are reported in the summary's checks, not raised.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    budget = default_tick_budget(params) if tick_budget is None else tick_budget
    base = (params.chain_length, params.p, q, regression, budget, seed)
    if jobs <= 1:
        rows = _convergence_chunk(base + (0, trials))
    else:
        rows = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(
                _convergence_chunk,
                [base + rng for rng in _chunk_ranges(trials, jobs)],
            ):
                rows.extend(part)
    succeeded, transitions, uncontrolled, ticks, wall = zip(*rows)
    return TrialSummary(
        params=params,
        trials=trials,
        succeeded=succeeded,
        transitions=transitions,
        uncontrolled=uncontrolled,
        ticks=ticks,
        wall_clock=wall,
        tick_budget=budget,
        q=q,
        regression=regression,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# kitchen benchmark
# ---------------------------------------------------------------------------

DEFAULT_STRATEGIES = (Strategy.REACTIVE, Strategy.LINEAR, Strategy.LINEAR_REPLAN)
BENCH_POSE_NOISE = 0.0015
BENCH_CLOSE_AMOUNT = (0.5, 1.0)


@dataclass(frozen=True)
class StrategyRow:
    strategy: str
    trials: int
    successes: int
    ticks: tuple[int, ...]  # per trial, successes only carry timing meaning
    succeeded: tuple[bool, ...]
    replans: tuple[int, ...]

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def mean_ticks(self) -> float | None:
        good = [t for t, ok in zip(self.ticks, self.succeeded) if ok]
        return float(np.mean(good)) if good else None

    @property
    def std_ticks(self) -> float | None:
        good = [t for t, ok in zip(self.ticks, self.succeeded) if ok]
        if len(good) < 2:
            return None
        return float(np.std(good, ddof=1))

    @property
    def mean_replans(self) -> float:
        return float(np.mean(self.replans))


@dataclass(frozen=True)
class BenchmarkReport:
    goal: str
    trials: int
    interference: bool
    pose_noise: float
    seed: int
    rows: tuple[StrategyRow, ...]

    def row(self, strategy: Strategy | str) -> StrategyRow:
        key = Strategy(strategy).value
        for r in self.rows:
            if r.strategy == key:
                return r
        raise KeyError(f"no row for strategy '{key}'")


def _bench_chunk(args) -> list[list[tuple[bool, int, int]]]:
    (file, goal_name, strategies, interference, pose_noise, budget, stuck_limit,
     master_seed, start, stop) = args
    domain = file.to_logic_domain()
    operators = list(file.build_operators(domain).values())
    goal = file.goal_condition(goal_name, domain)
    base_cfg = file.world
    out = []
    for t in range(start, stop):
        rng = np.random.default_rng(_trial_seed(master_seed, t, salt=1))
        adversary = ()
        if interference:
            lo, hi = BENCH_CLOSE_AMOUNT
            drawer = base_cfg.drawers[0].name
            adversary = (
                AdversaryEvent(
                    "close_drawer",
                    target=drawer,
                    amount=float(rng.uniform(lo, hi)),
                    after_predicate=("drawer_is_open", (drawer,)),
                    delay=50,
                ),
            )
        cfg = replace(base_cfg, pose_noise=pose_noise, adversary=adversary)
        world = file.make_kitchen_world(
            domain, seed=_trial_seed(master_seed, t), randomize_placements=True,
            config_override=cfg,
        )
        chain, _ = plan_and_prepare(world.logical_state(), goal, operators)
        engine_cfg = EngineConfig(tick_budget=budget, stuck_limit=stuck_limit)
        row = []
        for strat in strategies:
            world = file.make_kitchen_world(
                domain, seed=_trial_seed(master_seed, t),
                randomize_placements=True, config_override=cfg,
            )
            trace = execute(
                chain,
                world,
                strat,
                engine_cfg,
                replan_operators=operators if strat is Strategy.LINEAR_REPLAN else None,
            )
            row.append((trace.succeeded, trace.ticks, trace.replans))
        out.append(row)
    return out


def run_benchmark(
    file: DomainFile,
    goal: str = "spam_put_away",
    strategies: Sequence[Strategy] = DEFAULT_STRATEGIES,
    interference: bool = True,
    trials: int = 100,
    seed: int = 0,
    pose_noise: float = BENCH_POSE_NOISE,
    tick_budget: int = 5000,
    stuck_limit: int | None = 50,
    jobs: int = 1,
) -> BenchmarkReport:
    """Run seeded kitchen trials per strategy and aggregate the outcomes.

    Every trial randomizes item placements; with interference on, the drawer
    is slammed partly shut a fixed delay after it first opens, by an amount
    drawn per trial.  All strategies within a trial share the same placement
    seed and the same planned chain, so comparisons are paired.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    strategies = tuple(Strategy(s) for s in strategies)
    base = (
        file, goal, strategies, interference, pose_noise, tick_budget,
        stuck_limit, seed,
    )
    if jobs <= 1:
        rows = _bench_chunk(base + (0, trials))
    else:
        rows = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(
                _bench_chunk, [base + rng for rng in _chunk_ranges(trials, jobs)]
            ):
                rows.extend(part)

    out = []
    for s_idx, strat in enumerate(strategies):
        per = [row[s_idx] for row in rows]
        succeeded = tuple(r[0] for r in per)
        out.append(
            StrategyRow(
                strategy=strat.value,
                trials=trials,
                successes=int(sum(succeeded)),
                ticks=tuple(r[1] for r in per),
                succeeded=succeeded,
                replans=tuple(r[2] for r in per),
            )
        )
    return BenchmarkReport(
        goal=goal,
        trials=trials,
        interference=interference,
        pose_noise=pose_noise,
        seed=seed,
        rows=tuple(out),
    )


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def summary_lines(summary: TrialSummary) -> list[str]:
    """Machine-readable records for a convergence run (no wall-clock data)."""
    lines = [
        _dump(
            {
                "format": "opchain-montecarlo",
                "version": 1,
                "chain_length": summary.params.chain_length,
                "p": summary.params.p,
                "q": summary.q,
                "regression": summary.regression,
                "trials": summary.trials,
                "seed": summary.seed,
                "tick_budget": summary.tick_budget,
            }
        )
    ]
    for c in summary.checks():
        lines.append(
            _dump(
                {
                    "check": c.name,
                    "k": c.k,
                    "empirical": c.empirical,
                    "bound": c.bound,
                    "margin": c.margin,
                    "ok": c.ok,
                }
            )
        )
    lines.append(
        _dump(
            {
                "summary": {
                    "successes": summary.successes,
                    "mean_transitions": summary.mean_transitions,
                    "max_uncontrolled": int(max(summary.uncontrolled)),
                    "all_ok": summary.all_ok,
                }
            }
        )
    )
    return lines


def format_summary(summary: TrialSummary) -> str:
    params = summary.params
    bound = expected_transitions_bound(params)
    head = (
        f"chain N={params.chain_length} p={params.p} "
        f"(gamma={params.gamma:.6f}, inflation={params.inflation:.4f})\n"
        f"trials={summary.trials} successes={summary.successes} "
        f"budget={summary.tick_budget} ticks\n"
        f"mean transitions {summary.mean_transitions:.4f} vs bound {bound:.4f} "
        f"-> {'ok' if summary.mean_transitions <= bound else 'VIOLATED'}"
    )
    rows = ["  k  empirical   bound      verdict"]
    for c in summary.checks():
        if c.name != "pk":
            continue
        rows.append(
            f"{c.k:>3}  {c.empirical:9.5f}  {c.bound:9.5f}  "
            f"{'ok' if c.ok else 'VIOLATED'}"
        )
    return head + "\n" + "\n".join(rows)


def benchmark_lines(report: BenchmarkReport) -> list[str]:
    lines = [
        _dump(
            {
                "format": "opchain-bench",
                "version": 1,
                "goal": report.goal,
                "trials": report.trials,
                "interference": report.interference,
                "pose_noise": report.pose_noise,
                "seed": report.seed,
            }
        )
    ]
    for r in report.rows:
        lines.append(
            _dump(
                {
                    "strategy": r.strategy,
                    "successes": r.successes,
                    "success_rate": r.success_rate,
                    "mean_ticks": r.mean_ticks,
                    "std_ticks": r.std_ticks,
                    "mean_replans": r.mean_replans,
                }
            )
        )
    return lines


def format_benchmark(report: BenchmarkReport) -> str:
    head = (
        f"goal={report.goal} trials={report.trials} "
        f"interference={'on' if report.interference else 'off'} "
        f"pose_noise={report.pose_noise}"
    )
    rows = [f"{'strategy':<16} {'success':>8} {'mean ticks':>11} {'std':>8} {'replans':>8}"]
    for r in report.rows:
        mt = f"{r.mean_ticks:.1f}" if r.mean_ticks is not None else "n/a"
        st = f"{r.std_ticks:.1f}" if r.std_ticks is not None else "n/a"
        rows.append(
            f"{r.strategy:<16} {r.success_rate:>7.0%} {mt:>11} {st:>8} "
            f"{r.mean_replans:>8.2f}"
        )
    return head + "\n" + "\n".join(rows)
