"""Conditions, operators, and chain verification from first principles.

Builds a three-step block-stacking domain by hand, shows how conditions
evaluate against logical states, what the chaining check accepts and rejects,
and how completeness checking finds the states a chain cannot handle.
"""

from opchain import (
    Chain,
    Condition,
    Domain,
    Operator,
    PredicateSchema,
    check_completeness,
    verify_chain,
)

# A domain is a predicate vocabulary plus typed objects.  Every type-valid
# grounding gets one bit in the logical state.
domain = Domain(
    schemas=[
        PredicateSchema("clear", ("block",)),
        PredicateSchema("held", ("block",)),
        PredicateSchema("stacked", ("block", "block")),
    ],
    objects=[("a", "block"), ("b", "block")],
)
print(f"{domain.size} groundings:")
for i, g in enumerate(domain.groundings):
    print(f"  bit {i}: {g}")

# Conditions are conjunctions of ground literals; states are bit vectors.
state = domain.state(("clear", "a"), ("clear", "b"))
ready = domain.condition(("clear", "a"), ("not", "held", "a"))
print("\nstate:", domain.describe(state))
print("ready to pick a?", ready.evaluate(state))

# Effects apply as assignments; everything unmentioned is untouched.
pick_effects = domain.condition(("held", "a"), ("not", "clear", "a"))
after = pick_effects.apply(state)
print("after pick:", domain.describe(after))

# Operators bundle an entry condition (when it may be newly selected), a run
# condition (when it may continue), and expected effects.
pick = Operator(
    "pick_a",
    entry=domain.condition(("clear", "a"), ("not", "held", "a")),
    run=domain.condition(("not", "held", "a")),
    effects=pick_effects,
    policy_id="pick",
)
stack = Operator(
    "stack_a_on_b",
    entry=domain.condition(("held", "a"), ("clear", "b")),
    run=domain.condition(("held", "a")),
    effects=domain.condition(
        ("stacked", "a", "b"), ("not", "held", "a"), ("not", "clear", "b")
    ),
    policy_id="stack",
)
goal = domain.condition(("stacked", "a", "b"))

# The chaining check: each operator's effects (plus literals that persist)
# must establish the next entry condition, and entry must imply run.
chain = Chain((pick, stack), goal)
report = verify_chain(chain)
print("\nchain verifies?", report.ok)

# Break it on purpose: stack now demands something nobody establishes.
greedy_stack = Operator(
    "stack_a_on_b",
    entry=domain.condition(("held", "a"), ("clear", "b"), ("held", "b")),
    run=domain.condition(("held", "a")),
    effects=stack.effects,
    policy_id="stack",
)
broken = verify_chain(Chain((pick, greedy_stack), goal))
print("broken chain violations:")
for v in broken.violations:
    print("  ", v)

# Completeness asks: is some operator enterable from EVERY logical state?
# This chain is nowhere near complete; the witness is a state it cannot serve.
result = check_completeness(chain, domain)
print(
    f"\ncomplete? {result.complete}  "
    f"(checked {result.states_checked} states exhaustively)"
)
print("witness state with no enterable operator:", domain.describe(result.witness))
