"""Why general-purpose operators need implicit conditions, and how backward
propagation supplies them.

The bundled kitchen operators are deliberately generic: `approach` only asks
that the hand be empty.  Executed reactively as-is, nothing would force the
drawer to be opened before the pickup phase.  Propagating requirements
backward from the goal through the plan adds exactly the missing sequencing
literals: every pickup-phase operator acquires drawer_is_open, and
close_drawer acquires in_drawer.
"""

from opchain import (
    Chain,
    augment_with_implicit,
    implicit_conditions,
    load_bundled_domain,
    verify_chain,
)

file = load_bundled_domain("kitchen")
domain = file.to_logic_domain()
plan = file.plan_operators("put_away_spam", domain)
goal = file.goal_condition("spam_put_away", domain)

print("goal:", goal.describe(domain))
print("\nauthored entry conditions (note: nothing mentions the drawer before")
print("place, and nothing sequences the pickup phase):")
for op in plan:
    print(f"  {op.name:<13} {op.entry.describe(domain)}")

implicit = implicit_conditions(plan, goal)
print("\nbackward-propagated implicit conditions per position:")
for op, extra in zip(plan, implicit.per_operator):
    print(f"  {op.name:<13} {extra.describe(domain)}")

# Union the implicit sets into entry and run conditions: the chain becomes an
# executable sequence whose pairwise chaining condition holds.
chain = augment_with_implicit(Chain(plan, goal), implicit)
print("\naugmented entry conditions:")
for op in chain.operators:
    print(f"  {op.name:<13} {op.entry.describe(domain)}")

print("\nchain verifies after augmentation?", verify_chain(chain).ok)

# The "general" mode keeps only requirements some earlier operator produces;
# here both modes agree because every propagated literal is plan-internal.
general = implicit_conditions(plan, goal, mode="general")
same = all(
    set(a) == set(b)
    for a, b in zip(implicit.per_operator, general.per_operator)
)
print("strict and general modes agree on this plan?", same)
