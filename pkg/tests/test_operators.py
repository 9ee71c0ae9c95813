import numpy as np
import pytest

from opchain.errors import AugmentationError, CapacityError
from opchain.logic import Condition, Literal, LogicalState
from opchain.operators import (
    Chain,
    Operator,
    augment_with_implicit,
    check_completeness,
    compose_hierarchical,
    cumulative_effects,
    implicit_conditions,
    verify_chain,
)
from opchain.planner import plan_and_prepare

from oracles import fold_effects_naive, propositional_domain, random_solvable_instance


def lit(i, pos=True):
    return Literal(i, pos)


def cond(*lits):
    return Condition(lits)


def op(name, entry=(), run=None, effects=(), **kw):
    entry_c = cond(*entry)
    run_c = entry_c if run is None else cond(*run)
    return Operator(name, entry_c, run_c, cond(*effects), **kw)


# ---------------------------------------------------------------------------
# verify_chain
# ---------------------------------------------------------------------------


def test_verify_exact_match_passes():
    o1 = op("a", entry=[lit(0)], effects=[lit(1)])
    o2 = op("b", entry=[lit(1)], effects=[lit(2)])
    chain = Chain((o1, o2), goal=cond(lit(2)))
    assert verify_chain(chain).ok


def test_verify_reports_unestablished_literal():
    o1 = op("a", entry=[lit(0)], effects=[lit(1)])
    o2 = op("b", entry=[lit(1), lit(3)], effects=[lit(2)])
    report = verify_chain(Chain((o1, o2), goal=cond(lit(2))))
    assert not report.ok
    v = report.violations[0]
    assert v.position == 1 and v.operator == "a"
    assert v.kind == "unestablished" and v.literal == lit(3)


def test_verify_reports_clobbered_literal():
    o1 = op("a", entry=[lit(0), lit(3)], effects=[lit(1), lit(3, False)])
    o2 = op("b", entry=[lit(1), lit(3)], effects=[lit(2)])
    report = verify_chain(Chain((o1, o2), goal=cond(lit(2))))
    kinds = {v.kind for v in report.violations}
    assert "clobbered" in kinds


def test_verify_carried_literal_passes():
    # entry literal of b persists from a's own conditions (frame-aware rule)
    o1 = op("a", entry=[lit(0), lit(5)], effects=[lit(1)])
    o2 = op("b", entry=[lit(1), lit(5)], effects=[lit(2)])
    assert verify_chain(Chain((o1, o2), goal=cond(lit(2)))).ok


def test_verify_entry_must_imply_run():
    bad = Operator("a", entry=cond(lit(0)), run=cond(lit(1)), effects=cond(lit(2)))
    report = verify_chain(Chain((bad,), goal=cond(lit(2))))
    assert any(v.kind == "entry_implies_run" for v in report.violations)


def test_verify_checks_reactions_entry_implies_run():
    main = op("a", entry=[lit(0)], effects=[lit(1)])
    reaction = Operator(
        "evade", entry=cond(lit(2)), run=cond(lit(3)), effects=cond(lit(0))
    )
    report = verify_chain(Chain((main,), goal=cond(lit(1)), reactions=(reaction,)))
    assert any(
        v.kind == "entry_implies_run" and v.operator == "evade"
        for v in report.violations
    )


def test_verify_planner_output_on_kitchen(kitchen_file, kitchen_domain, put_away_goal):
    ops = list(kitchen_file.build_operators(kitchen_domain).values())
    world = kitchen_file.make_kitchen_world(kitchen_domain, seed=0)
    chain, _ = plan_and_prepare(world.logical_state(), put_away_goal, ops)
    assert verify_chain(chain).ok


# ---------------------------------------------------------------------------
# completeness
# ---------------------------------------------------------------------------


def test_empty_entry_condition_makes_chain_complete():
    anyop = op("always", entry=[], effects=[lit(0)])
    dom = propositional_domain(4)
    result = check_completeness(Chain((anyop,), goal=cond(lit(0))), dom)
    assert result.complete and result.witness is None


def test_single_positive_entry_incomplete_with_witness():
    dom = propositional_domain(1)
    only = op("a", entry=[lit(0)], effects=[lit(0)])
    result = check_completeness(Chain((only,), goal=cond(lit(0))), dom)
    assert not result.complete
    assert result.witness == LogicalState(1, 0)


def test_completeness_capacity_error():
    dom = propositional_domain(21)
    chain = Chain((op("a", entry=[], effects=[lit(0)]),), goal=cond(lit(0)))
    with pytest.raises(CapacityError):
        check_completeness(chain, dom)


def test_completeness_sampled_mode():
    dom = propositional_domain(24)
    chain = Chain((op("a", entry=[lit(0)], effects=[lit(1)]),), goal=cond(lit(1)))
    result = check_completeness(chain, dom, samples=200, seed=3)
    assert not result.complete and not result.exhaustive
    assert not chain.operators[0].entry.evaluate(result.witness)


def test_kitchen_chain_incomplete_with_witness(
    kitchen_file, kitchen_domain, put_away_goal
):
    # once implicit conditions sequence the chain, there is no fallback for
    # "holding the can while the drawer is shut"
    ops = kitchen_file.plan_operators("put_away_spam", kitchen_domain)
    implicit = implicit_conditions(ops, put_away_goal)
    chain = augment_with_implicit(Chain(ops, put_away_goal), implicit)
    result = check_completeness(chain, kitchen_domain)
    assert kitchen_domain.size == 12
    assert result.exhaustive and result.states_checked == 2**12
    assert not result.complete
    witness = result.witness
    assert all(not o.entry.evaluate(witness) for o in chain.operators)
    stuck = kitchen_domain.state(("is_attached_to", "gripper", "spam"))
    assert all(not o.entry.evaluate(stuck) for o in chain.operators)


# ---------------------------------------------------------------------------
# hierarchical composition
# ---------------------------------------------------------------------------


def test_compose_singleton_keeps_effects():
    o1 = op("a", entry=[lit(0)], effects=[lit(1), lit(2, False)])
    macro = compose_hierarchical([o1], "macro")
    assert macro.effects == o1.effects
    assert macro.entry.is_empty and macro.run.is_empty
    assert macro.policy_id is None


def test_compose_later_effects_override():
    o1 = op("a", effects=[lit(0)])
    o2 = op("b", effects=[lit(0, False), lit(1)])
    macro = compose_hierarchical([o1, o2], "m")
    assert macro.effects == cond(lit(0, False), lit(1))


def test_compose_empty_plan_rejected():
    with pytest.raises(ValueError):
        compose_hierarchical([], "m")


def test_compose_matches_effect_fold_on_random_plans():
    rng = np.random.default_rng(7)
    for _ in range(50):
        inst = random_solvable_instance(rng)
        macro = compose_hierarchical(inst.witness_plan, "m")
        expected = fold_effects_naive(inst.witness_plan)
        assert macro.effects == Condition(
            Literal(i, v) for i, v in expected.items()
        )
        # folding must agree with actually applying effects state by state
        for value in (0, (1 << inst.domain.size) - 1):
            state = LogicalState(inst.domain.size, value)
            stepped = state
            for o in inst.witness_plan:
                stepped = o.effects.apply(stepped)
            assert macro.effects.apply(state) == stepped


def test_pickup_macro_from_kitchen(kitchen_file, kitchen_domain):
    ops = kitchen_file.plan_operators("pickup", kitchen_domain)
    macro = compose_hierarchical(ops, "pickup")
    d = kitchen_domain
    expected = {
        d.literal("in_approach_region", "gripper", "spam"),
        d.literal("at_home", "gripper", positive=False),
        d.literal("lifted", "gripper", positive=False),
        d.literal("around_obj", "gripper", "spam"),
        d.literal("above_drawer", "gripper", "indigo_drawer", positive=False),
        d.literal("is_attached_to", "gripper", "spam"),
    }
    assert set(macro.effects) == expected
    guarded = macro.with_guard(d.condition(("drawer_is_open", "indigo_drawer")))
    assert d.literal("drawer_is_open", "indigo_drawer") in set(guarded.entry)
    assert d.literal("drawer_is_open", "indigo_drawer") in set(guarded.run)


# ---------------------------------------------------------------------------
# implicit conditions
# ---------------------------------------------------------------------------


def test_implicit_empty_when_goal_is_all_effects():
    o1 = op("a", entry=[lit(0)], effects=[lit(1), lit(2)])
    implicit = implicit_conditions([o1], cond(lit(1), lit(2)))
    assert implicit.per_operator == (Condition(),)
    assert not implicit.warnings


def test_implicit_drawer_example(kitchen_file, kitchen_domain, put_away_goal):
    # pickup-phase operators must acquire the open-drawer requirement
    ops = kitchen_file.plan_operators("put_away_spam", kitchen_domain)
    implicit = implicit_conditions(ops, put_away_goal)
    drawer_open = kitchen_domain.literal("drawer_is_open", "indigo_drawer")
    by_name = {o.name: li for o, li in zip(ops, implicit.per_operator)}
    for name in ("approach", "cage", "grasp", "lift", "transport", "place"):
        assert drawer_open in set(by_name[name]), name
    assert drawer_open not in set(by_name["open_drawer"])
    assert drawer_open not in set(by_name["close_drawer"])
    assert kitchen_domain.literal("in_drawer", "spam", "indigo_drawer") in set(
        by_name["close_drawer"]
    )
    assert not implicit.warnings


def test_implicit_propagation_monotone():
    rng = np.random.default_rng(11)
    for _ in range(100):
        inst = random_solvable_instance(rng)
        implicit = implicit_conditions(inst.witness_plan, inst.goal)
        if implicit.warnings:
            continue
        for i in range(len(inst.witness_plan) - 1):
            eff = inst.witness_plan[i].effects
            carried = {
                l
                for l in implicit.per_operator[i + 1]
                if not eff.mentions(l) and not eff.contradicts(l)
            }
            assert carried <= set(implicit.per_operator[i])


def test_implicit_clobbered_literal_warns_and_drops():
    o1 = op("a", entry=[], effects=[lit(0, False)])  # destroys the goal literal
    o2 = op("b", entry=[], effects=[lit(1)])
    implicit = implicit_conditions([o1, o2], cond(lit(0), lit(1)))
    assert len(implicit.warnings) == 1
    w = implicit.warnings[0]
    assert w.position == 1 and w.literal == lit(0)
    assert lit(0) not in set(implicit.per_operator[0])


def test_implicit_general_mode_drops_unproduced():
    o1 = op("a", entry=[], effects=[lit(1)])
    o2 = op("b", entry=[lit(0), lit(1)], effects=[lit(2)])
    goal = cond(lit(2))
    strict = implicit_conditions([o1, o2], goal, mode="strict")
    general = implicit_conditions([o1, o2], goal, mode="general")
    # lit(0) is required by b but produced by nobody: strict keeps, general drops
    assert lit(0) in set(strict.per_operator[0])
    assert lit(0) not in set(general.per_operator[0])


def test_implicit_general_mode_keeps_literals_produced_earlier():
    o1 = op("a", entry=[], effects=[lit(0)])
    o2 = op("b", entry=[], effects=[lit(1)])
    o3 = op("c", entry=[lit(0), lit(1)], effects=[lit(2)])
    goal = cond(lit(2))
    strict = implicit_conditions([o1, o2, o3], goal, mode="strict")
    general = implicit_conditions([o1, o2, o3], goal, mode="general")
    # lit(0) is produced by a, needed by c, untouched by b: position b keeps it
    assert lit(0) in set(strict.per_operator[1])
    assert lit(0) in set(general.per_operator[1])


def test_augment_empty_set_is_identity():
    o1 = op("a", entry=[lit(0)], effects=[lit(1)])
    chain = Chain((o1,), goal=cond(lit(1)))
    out = augment_with_implicit(
        chain, implicit_conditions([o1], cond(lit(1)))
    )
    assert out.operators == chain.operators


def test_augment_is_idempotent():
    rng = np.random.default_rng(3)
    for _ in range(30):
        inst = random_solvable_instance(rng)
        implicit = implicit_conditions(inst.witness_plan, inst.goal)
        chain = Chain(inst.witness_plan, inst.goal)
        once = augment_with_implicit(chain, implicit)
        twice = augment_with_implicit(once, implicit)
        assert once.operators == twice.operators


def test_augment_contradiction_raises_with_operator_name():
    o1 = op("a", entry=[lit(0, False)], effects=[lit(1)])
    bad = type(
        "FakeSet",
        (),
        {"per_operator": (cond(lit(0)),), "warnings": (), "__len__": lambda s: 1},
    )()
    with pytest.raises(AugmentationError) as exc:
        augment_with_implicit(Chain((o1,), goal=cond(lit(1))), bad)
    assert "'a'" in str(exc.value)


def test_augmented_plan_execution_reaches_goal_exhaustively():
    # from ANY state satisfying the augmented first entry, running effects in
    # order satisfies every augmented entry and ends in the goal
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(60):
        inst = random_solvable_instance(rng, max_groundings=7)
        implicit = implicit_conditions(inst.witness_plan, inst.goal)
        if implicit.warnings:
            continue
        chain = augment_with_implicit(
            Chain(inst.witness_plan, inst.goal), implicit
        )
        g = inst.domain.size
        first = chain.operators[0].entry
        for value in range(1 << g):
            state = LogicalState(g, value)
            if not first.evaluate(state):
                continue
            for o in chain.operators:
                assert o.entry.evaluate(state)
                state = o.effects.apply(state)
            assert inst.goal.evaluate(state)
            checked += 1
    assert checked > 0


def test_cumulative_effects_exported():
    o1 = op("a", effects=[lit(0)])
    assert cumulative_effects([o1]) == cond(lit(0))
