"""opchain: build, verify, plan, and reactively execute chains of logical
operators over simulated worlds, with a statistical harness for the chain
convergence bounds."""

from importlib import resources

from .analysis import (
    BenchmarkReport,
    ConvergenceParams,
    TrialSummary,
    expected_transitions_bound,
    montecarlo_convergence,
    pk_bound,
    run_benchmark,
)
from .domain_io import (
    DomainFile,
    ParseDiagnostic,
    ParseResult,
    load_domain,
    parse_domain,
    read_trace,
    serialize_domain,
    trace_to_lines,
    write_trace,
)
from .executor import EngineConfig, ExecutionTrace, Strategy, execute, label_transitions
from .geometry import Pose
from .logic import (
    Condition,
    Domain,
    Literal,
    LogicalState,
    PredicateSchema,
    apply_effects,
    entails,
    evaluate,
    goal_distance,
)
from .operators import (
    Chain,
    CompletenessResult,
    ImplicitConditionSet,
    Operator,
    VerificationReport,
    augment_with_implicit,
    check_completeness,
    compose_hierarchical,
    cumulative_effects,
    implicit_conditions,
    verify_chain,
)
from .planner import PlanResult, SearchLimits, plan, plan_and_prepare
from .worlds import AbstractStochasticWorld, AdversaryEvent, KitchenWorld, select_grasp

__version__ = "0.1.0"


def bundled_domain_path(name: str = "kitchen"):
    """Filesystem path of a domain file shipped with the package."""
    return resources.files(__package__) / "data" / f"{name}.domain"


def load_bundled_domain(name: str = "kitchen"):
    """Parse a bundled domain file; raises if it fails to validate."""
    result = parse_domain(bundled_domain_path(name).read_text(encoding="utf-8"))
    if not result.ok:
        raise RuntimeError(
            f"bundled domain '{name}' failed to parse: "
            + "; ".join(str(d) for d in result.errors)
        )
    return result.file
