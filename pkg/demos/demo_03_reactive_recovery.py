"""Reactive execution under adversarial interference.

Runs the kitchen put-away task three times:

1. with the bundled adversary (the drawer is slammed partly shut 50 ticks
   after it first opens) under the reactive strategy, which falls back to
   open_drawer and still finishes;
2. the same trial under linear execution, which dies on the spot;
3. with a nastier adversary that strikes while the can is already in hand,
   where only a put-down reaction (highest-priority suffix operator) saves
   the run.
"""

from dataclasses import replace

from opchain import (
    AdversaryEvent,
    Chain,
    EngineConfig,
    Strategy,
    execute,
    load_bundled_domain,
    plan_and_prepare,
)

file = load_bundled_domain("kitchen")
domain = file.to_logic_domain()
operators = list(file.build_operators(domain).values())
goal = file.goal_condition("spam_put_away", domain)


def fresh_world(adversary=None):
    cfg = file.world if adversary is None else replace(file.world, adversary=adversary)
    return file.make_kitchen_world(domain, seed=7, config_override=cfg)


def timeline(trace):
    out = []
    for rec in trace.records:
        if rec.transition != "none":
            marker = "!" if rec.transition == "uncontrolled" else " "
            out.append(f"  tick {rec.tick:>4} {marker} -> {rec.operator}")
    return "\n".join(out)


world = fresh_world()
chain, _ = plan_and_prepare(world.logical_state(), goal, operators)
print("plan:", " -> ".join(o.name for o in chain.operators))

trace = execute(chain, world, Strategy.REACTIVE, EngineConfig(tick_budget=5000))
print(f"\n[reactive + drawer adversary] outcome={trace.outcome} "
      f"ticks={trace.ticks} uncontrolled={trace.uncontrolled}")
print(timeline(trace))

linear = execute(
    chain, fresh_world(), Strategy.LINEAR, EngineConfig(tick_budget=5000)
)
print(f"\n[linear, same trial] outcome={linear.outcome} "
      f"reason={linear.failure_reason} ticks={linear.ticks}")

# Strike while the can is attached: the chain alone has no enterable operator
# for "holding the can, drawer shut" (see the completeness witness in demo 1).
mid_carry = (
    AdversaryEvent(
        "close_drawer",
        target="indigo_drawer",
        amount=0.8,
        after_predicate=("is_attached_to", ("gripper", "spam")),
        delay=20,
    ),
)
stuck = execute(
    chain,
    fresh_world(mid_carry),
    Strategy.REACTIVE,
    EngineConfig(tick_budget=3000, stuck_limit=25),
)
print(f"\n[mid-carry adversary, no reaction] outcome={stuck.outcome} "
      f"reason={stuck.failure_reason}")
print("  stuck at:", domain.describe(stuck.stuck_witness))

# A reaction is a highest-priority operator downstream of the goal.  Guarding
# the generic release operator with "drawer shut" makes it fire exactly in
# the stuck situation: put the can down, reopen, redo the pickup.
release = file.build_operators(domain)["release"]
reaction = release.with_guard(
    domain.condition(("not", "drawer_is_open", "indigo_drawer"))
)
recovered = execute(
    Chain(chain.operators, chain.goal, reactions=(reaction,)),
    fresh_world(mid_carry),
    Strategy.REACTIVE,
    EngineConfig(tick_budget=5000),
)
print(f"\n[mid-carry adversary + put-down reaction] outcome={recovered.outcome} "
      f"ticks={recovered.ticks} uncontrolled={recovered.uncontrolled}")
print(timeline(recovered))
