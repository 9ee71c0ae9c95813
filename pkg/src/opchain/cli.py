"""Command-line entry point.

Subcommands wire the library into the standard workflows: validate a domain
file and its chains, plan and show implicit conditions, execute a strategy
and dump the trace, run the convergence harness, run the strategy benchmark,
and compose a named plan into a macro operator.  Exit status is 0 on success,
1 when diagnostics, violations, failures, or bound checks fail, and 2 on
usage errors.  Seeds are mandatory wherever randomness is involved so runs
are reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone

from . import __version__, bundled_domain_path
from .analysis import (
    ConvergenceParams,
    benchmark_lines,
    format_benchmark,
    format_summary,
    montecarlo_convergence,
    run_benchmark,
    summary_lines,
)
from .domain_io import (
    DomainFile,
    LiteralSpec,
    OperatorDecl,
    parse_domain,
    serialize_domain,
    trace_to_lines,
)
from .domain_io import write_trace
from .errors import OpchainError, PlanningFailedError
from .executor import EngineConfig, Strategy, execute
from .logic import Condition, Domain
from .operators import (
    Chain,
    augment_with_implicit,
    check_completeness,
    compose_hierarchical,
    implicit_conditions,
    verify_chain,
)
from .planner import SearchLimits, plan as plan_search, plan_and_prepare

ENV_DOMAIN_PATH = "OPCHAIN_DOMAIN_PATH"


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _resolve_domain_path(spec: str) -> str | None:
    if os.path.exists(spec):
        return spec
    for directory in os.environ.get(ENV_DOMAIN_PATH, "").split(os.pathsep):
        if not directory:
            continue
        candidate = os.path.join(directory, spec)
        if os.path.exists(candidate):
            return candidate
        candidate = os.path.join(directory, spec + ".domain")
        if os.path.exists(candidate):
            return candidate
    bundled = bundled_domain_path(spec)
    if bundled.is_file():
        return str(bundled)
    return None


def _load(spec: str, machine: bool):
    path = _resolve_domain_path(spec)
    if path is None:
        print(f"error: domain '{spec}' not found", file=sys.stderr)
        return None
    with open(path, "r", encoding="utf-8") as fh:
        result = parse_domain(fh.read())
    for diag in result.diagnostics:
        if machine:
            print(
                json.dumps(
                    {
                        "diagnostic": diag.severity,
                        "line": diag.line,
                        "column": diag.column,
                        "message": diag.message,
                    },
                    separators=(",", ":"),
                ),
                file=sys.stderr,
            )
        else:
            print(f"{diag.severity}: {path}:{diag}", file=sys.stderr)
    return result.file


def _header(args, subcommand: str) -> None:
    if not args.no_header:
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        print(f"# opchain {__version__} {subcommand} {stamp}")


def _describe_literals(cond: Condition, domain: Domain) -> list[str]:
    out = []
    for lit in cond:
        g = domain.grounding_at(lit.index)
        text = f"({' '.join((g.schema,) + g.arguments)})"
        out.append(text if lit.positive else f"(not {text})")
    return out


def _initial_state(file: DomainFile, domain: Domain, seed: int | None = None):
    if file.world is not None:
        return file.make_kitchen_world(domain, seed=seed).logical_state()
    return domain.state()


def _build_chain(file: DomainFile, domain: Domain, plan_name: str, goal_name: str):
    ops = file.plan_operators(plan_name, domain)
    goal = file.goal_condition(goal_name, domain)
    implicit = implicit_conditions(ops, goal)
    chain = augment_with_implicit(Chain(ops, goal), implicit)
    return chain, implicit


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    file = _load(args.domain, args.machine_readable)
    if file is None:
        return 1
    _header(args, "validate")
    status = 0
    domain = file.to_logic_domain()
    report_lines = []
    if args.plan:
        goal_name = args.goal or (file.goals[0].name if file.goals else None)
        if goal_name is None:
            return _fail("--plan requires a goal (none declared in the file)")
        try:
            chain, implicit = _build_chain(file, domain, args.plan, goal_name)
        except (KeyError, OpchainError) as e:
            return _fail(str(e))
        for warning in implicit.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        report = verify_chain(chain)
        for v in report.violations:
            status = 1
            if args.machine_readable:
                report_lines.append(
                    json.dumps(
                        {
                            "violation": v.kind,
                            "position": v.position,
                            "operator": v.operator,
                            "message": v.message,
                        },
                        separators=(",", ":"),
                    )
                )
            else:
                print(f"violation: {v}", file=sys.stderr)
        if args.completeness:
            samples = None if args.completeness == "exhaustive" else args.samples
            result = check_completeness(chain, domain, samples=samples, seed=args.seed)
            if args.machine_readable:
                report_lines.append(
                    json.dumps(
                        {
                            "completeness": result.complete,
                            "exhaustive": result.exhaustive,
                            "witness": (
                                result.witness.to_hex() if result.witness else None
                            ),
                        },
                        separators=(",", ":"),
                    )
                )
            else:
                verdict = "complete" if result.complete else "incomplete"
                extra = (
                    f" witness={domain.describe(result.witness)}"
                    if result.witness is not None
                    else ""
                )
                print(f"completeness: {verdict}{extra}")
    if args.machine_readable:
        for line in report_lines:
            print(line)
        print(json.dumps({"ok": status == 0}, separators=(",", ":")))
    elif status == 0:
        print("ok")
    return status


def _cmd_plan(args) -> int:
    file = _load(args.domain, args.machine_readable)
    if file is None:
        return 1
    _header(args, "plan")
    domain = file.to_logic_domain()
    try:
        goal = file.goal_condition(args.goal, domain)
    except KeyError as e:
        return _fail(str(e))
    operators = list(file.build_operators(domain).values())
    initial = _initial_state(file, domain)
    limits = SearchLimits(max_expansions=args.max_expansions, max_depth=args.max_depth)
    result = plan_search(initial, goal, operators, limits)
    if not result.solved:
        reason = "frontier exhausted" if result.exhausted_frontier else "limits hit"
        print(
            f"error: no plan found ({reason}, {result.expansions} expansions)",
            file=sys.stderr,
        )
        return 1
    implicit = implicit_conditions(result.operators, goal)
    chain = augment_with_implicit(Chain(result.operators, goal), implicit)
    for warning in implicit.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if args.machine_readable:
        for i, (op, raw, extra) in enumerate(
            zip(chain.operators, result.operators, implicit.per_operator), start=1
        ):
            print(
                json.dumps(
                    {
                        "position": i,
                        "operator": op.name,
                        "entry": _describe_literals(op.entry, domain),
                        "run": _describe_literals(op.run, domain),
                        "effects": _describe_literals(op.effects, domain),
                        "implicit": _describe_literals(extra, domain),
                    },
                    separators=(",", ":"),
                )
            )
    else:
        for i, (op, extra) in enumerate(
            zip(chain.operators, implicit.per_operator), start=1
        ):
            print(f"{i}. {op.name}")
            print(f"   entry    {' '.join(_describe_literals(op.entry, domain)) or '(always)'}")
            print(f"   run      {' '.join(_describe_literals(op.run, domain)) or '(always)'}")
            print(f"   effects  {' '.join(_describe_literals(op.effects, domain))}")
            print(f"   implicit {' '.join(_describe_literals(extra, domain)) or '-'}")
    return 0


def _cmd_exec(args) -> int:
    file = _load(args.domain, args.machine_readable)
    if file is None:
        return 1
    _header(args, "exec")
    domain = file.to_logic_domain()
    if file.world is None:
        return _fail("exec needs a world section in the domain file")
    try:
        goal = file.goal_condition(args.goal, domain)
    except KeyError as e:
        return _fail(str(e))
    operators = list(file.build_operators(domain).values())
    config = file.world
    if args.interference == "off":
        config = replace(config, adversary=())
    world = file.make_kitchen_world(domain, seed=args.seed, config_override=config)
    try:
        chain, _ = plan_and_prepare(world.logical_state(), goal, operators)
    except PlanningFailedError as e:
        return _fail(str(e))
    strategy = Strategy(args.strategy)
    trace = execute(
        chain,
        world,
        strategy,
        EngineConfig(tick_budget=args.ticks, stuck_limit=args.stuck_limit),
        replan_operators=operators if strategy is Strategy.LINEAR_REPLAN else None,
    )
    if args.out:
        write_trace(trace, domain.size, args.out)
    summary = {
        "outcome": trace.outcome,
        "reason": trace.failure_reason,
        "ticks": trace.ticks,
        "transitions": trace.transitions,
        "uncontrolled": trace.uncontrolled,
        "replans": trace.replans,
    }
    if args.machine_readable:
        print(json.dumps(summary, separators=(",", ":")))
    else:
        print(
            f"outcome={trace.outcome} ticks={trace.ticks} "
            f"transitions={trace.transitions} uncontrolled={trace.uncontrolled} "
            f"replans={trace.replans}"
        )
    return 0 if trace.succeeded else 1


def _cmd_montecarlo(args) -> int:
    _header(args, "montecarlo")
    params = ConvergenceParams(args.chain_length, args.p)
    summary = montecarlo_convergence(
        params,
        trials=args.trials,
        seed=args.seed,
        q=args.q,
        regression=args.regression,
        tick_budget=args.budget,
        jobs=args.jobs,
    )
    out = "\n".join(summary_lines(summary)) if args.machine_readable else format_summary(summary)
    print(out)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(summary_lines(summary)) + "\n")
    return 0 if summary.all_ok else 1


def _cmd_bench(args) -> int:
    file = _load(args.domain, args.machine_readable)
    if file is None:
        return 1
    _header(args, "bench")
    strategies = [Strategy(s) for s in args.strategies.split(",")]
    report = run_benchmark(
        file,
        goal=args.goal,
        strategies=strategies,
        interference=args.interference == "on",
        trials=args.trials,
        seed=args.seed,
        pose_noise=args.noise,
        jobs=args.jobs,
    )
    out = "\n".join(benchmark_lines(report)) if args.machine_readable else format_benchmark(report)
    print(out)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(benchmark_lines(report)) + "\n")
    return 0


def _cmd_compose(args) -> int:
    file = _load(args.domain, args.machine_readable)
    if file is None:
        return 1
    domain = file.to_logic_domain()
    try:
        ops = file.plan_operators(args.plan, domain)
    except KeyError as e:
        return _fail(str(e))
    macro = compose_hierarchical(ops, args.name)
    effects = []
    for lit in macro.effects:
        g = domain.grounding_at(lit.index)
        effects.append(LiteralSpec(lit.positive, g.schema, g.arguments))
    decl = OperatorDecl(args.name, None, (), (), tuple(effects))
    if any(op.name == args.name for op in file.operators):
        return _fail(f"operator '{args.name}' already exists in the domain")
    updated = replace(file, operators=file.operators + (decl,))
    text = serialize_domain(updated)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _header(args, "compose")
        print(f"wrote {args.out}")
    else:
        _header(args, "compose")
        print(text, end="")
    return 0


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _add_common(sub) -> None:
    sub.add_argument("--machine-readable", action="store_true")
    sub.add_argument("--no-header", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opchain",
        description="Verify, plan, execute, and analyse logical operator chains.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    v = subs.add_parser("validate", help="parse a domain file and verify a chain")
    v.add_argument("--domain", required=True)
    v.add_argument("--plan", help="named plan to verify as a chain")
    v.add_argument("--goal", help="goal for the chain (default: first declared)")
    v.add_argument("--completeness", choices=["exhaustive", "sampled"])
    v.add_argument("--samples", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=0)
    _add_common(v)
    v.set_defaults(func=_cmd_validate)

    p = subs.add_parser("plan", help="plan toward a goal and show implicit conditions")
    p.add_argument("--domain", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--max-expansions", type=int, default=100_000)
    p.add_argument("--max-depth", type=int, default=50)
    _add_common(p)
    p.set_defaults(func=_cmd_plan)

    e = subs.add_parser("exec", help="plan and execute a goal in the file's world")
    e.add_argument("--domain", required=True)
    e.add_argument("--goal", required=True)
    e.add_argument(
        "--strategy",
        choices=[s.value for s in Strategy],
        default=Strategy.REACTIVE.value,
    )
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--ticks", type=int, default=5000)
    e.add_argument("--stuck-limit", type=int, default=None)
    e.add_argument("--interference", choices=["on", "off"], default="on")
    e.add_argument("--out", help="write the trace to this path")
    _add_common(e)
    e.set_defaults(func=_cmd_exec)

    m = subs.add_parser("montecarlo", help="check convergence bounds by simulation")
    m.add_argument("--p", type=float, required=True)
    m.add_argument("--chain-length", type=int, required=True)
    m.add_argument("--trials", type=int, default=10_000)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--q", type=float, default=0.0)
    m.add_argument("--regression", choices=["to_start", "back_one"], default="to_start")
    m.add_argument("--budget", type=int, default=None)
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--out", help="write machine-readable records to this path")
    _add_common(m)
    m.set_defaults(func=_cmd_montecarlo)

    b = subs.add_parser("bench", help="compare execution strategies on a world")
    b.add_argument("--domain", required=True)
    b.add_argument("--goal", default="spam_put_away")
    b.add_argument(
        "--strategies",
        default=",".join(s.value for s in Strategy),
        help="comma-separated strategy list",
    )
    b.add_argument("--interference", choices=["on", "off"], default="on")
    b.add_argument("--trials", type=int, default=100)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--noise", type=float, default=0.0015)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", help="write machine-readable records to this path")
    _add_common(b)
    b.set_defaults(func=_cmd_bench)

    c = subs.add_parser("compose", help="fold a named plan into a macro operator")
    c.add_argument("--domain", required=True)
    c.add_argument("--plan", required=True)
    c.add_argument("--name", required=True)
    c.add_argument("--out", help="write the updated domain file here")
    _add_common(c)
    c.set_defaults(func=_cmd_compose)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OpchainError as e:
        return _fail(str(e))
    except OSError as e:
        return _fail(str(e))


if __name__ == "__main__":
    sys.exit(main())
