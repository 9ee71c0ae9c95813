import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opchain.errors import ContradictionError, DomainMismatchError
from opchain.logic import (
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

from oracles import propositional_domain


@pytest.fixture(scope="module")
def dom():
    return Domain(
        [
            PredicateSchema("drawer_open", ("drawer",)),
            PredicateSchema("holding", ("arm", "thing")),
        ],
        [("d1", "drawer"), ("arm", "arm"), ("cup", "thing"), ("box", "thing")],
    )


def test_grounding_enumeration_is_typed_and_sorted(dom):
    names = [str(g) for g in dom.groundings]
    assert names == [
        "drawer_open(d1)",
        "holding(arm, box)",
        "holding(arm, cup)",
    ]
    assert dom.size == 3


def test_grounding_index_is_stable_across_construction_order():
    schemas = [PredicateSchema("b", ("t",)), PredicateSchema("a", ("t",))]
    objs = [("y", "t"), ("x", "t")]
    d1 = Domain(schemas, objs)
    d2 = Domain(list(reversed(schemas)), list(reversed(objs)))
    assert [str(g) for g in d1.groundings] == [str(g) for g in d2.groundings]


def test_duplicate_names_rejected():
    with pytest.raises(ValueError):
        Domain([PredicateSchema("a"), PredicateSchema("a")], [])
    with pytest.raises(ValueError):
        Domain([PredicateSchema("a")], [("x", "t"), ("x", "u")])


def test_evaluate_empty_condition_always_true(dom):
    empty = Condition()
    assert evaluate(empty, dom.state())
    assert evaluate(empty, dom.state(("drawer_open", "d1")))


def test_evaluate_positive_bit(dom):
    cond = dom.condition(("drawer_open", "d1"))
    assert evaluate(cond, dom.state(("drawer_open", "d1")))
    assert not evaluate(cond, dom.state())


def test_evaluate_negative_literal_violated(dom):
    cond = dom.condition(("drawer_open", "d1"), ("not", "holding", "arm", "cup"))
    both = dom.state(("drawer_open", "d1"), ("holding", "arm", "cup"))
    assert not evaluate(cond, both)
    assert evaluate(cond, dom.state(("drawer_open", "d1")))


def test_condition_rejects_both_polarities(dom):
    with pytest.raises(ContradictionError):
        dom.condition(("drawer_open", "d1"), ("not", "drawer_open", "d1"))


def test_domain_mismatch_raises(dom):
    cond = dom.condition(("holding", "arm", "cup"))
    small = LogicalState(1, 0)
    with pytest.raises(DomainMismatchError):
        evaluate(cond, small)


def test_entails_examples(dom):
    x = dom.literal("drawer_open", "d1")
    y = dom.literal("holding", "arm", "cup")
    a = Condition([x, y])
    b = Condition([x])
    assert entails(a, b)
    assert entails(a, a)
    assert not entails(b, Condition([x, y.negated()]))


def test_apply_effects_examples(dom):
    s = dom.state()
    assert apply_effects(Condition(), s) == s
    eff = dom.condition(("drawer_open", "d1"))
    s2 = apply_effects(eff, s)
    assert s2.get(dom.index_of("drawer_open", "d1"))
    assert s2.value & ~(1 << dom.index_of("drawer_open", "d1")) == 0


def test_goal_distance_examples(dom):
    goal = dom.condition(("drawer_open", "d1"), ("holding", "arm", "cup"))
    sat = dom.state(("drawer_open", "d1"), ("holding", "arm", "cup"))
    assert goal_distance(sat, goal) == 0
    one_met = dom.state(("drawer_open", "d1"))
    assert goal_distance(one_met, goal) == 1


def test_apply_effects_idempotent_exhaustive():
    # every consistent effect condition over a 6-grounding domain (each
    # grounding set, cleared, or untouched), applied to every state
    from itertools import product

    dom = propositional_domain(6)
    for spec in product((None, True, False), repeat=6):
        eff = Condition(
            Literal(i, pol) for i, pol in enumerate(spec) if pol is not None
        )
        for s in dom.all_states():
            once = apply_effects(eff, s)
            assert apply_effects(eff, once) == once


def test_frame_property_exhaustive():
    dom = propositional_domain(6)
    eff = Condition([Literal(1, True), Literal(4, False)])
    touched = (1 << 1) | (1 << 4)
    for s in dom.all_states():
        out = apply_effects(eff, s)
        assert (out.value & ~touched) == (s.value & ~touched)


def test_goal_distance_monotone_exhaustive():
    # setting a goal literal's bit to its target polarity never raises distance
    dom = propositional_domain(6)
    goal = Condition([Literal(0, True), Literal(2, True), Literal(4, False)])
    for s in dom.all_states():
        base = goal_distance(s, goal)
        for lit in goal:
            fixed = s.with_bit(lit.index, lit.positive)
            assert goal_distance(fixed, goal) <= base


def test_distance_zero_iff_evaluate():
    dom = propositional_domain(6)
    goal = Condition([Literal(1, True), Literal(3, False), Literal(5, True)])
    for s in dom.all_states():
        assert (goal_distance(s, goal) == 0) == evaluate(goal, s)


_literals = st.lists(
    st.tuples(st.integers(0, 7), st.booleans()), min_size=0, max_size=5
).map(lambda pairs: {i: pol for i, pol in pairs})


def _cond(assignment: dict) -> Condition:
    return Condition(Literal(i, pol) for i, pol in assignment.items())


@given(_literals, _literals)
@settings(max_examples=200)
def test_entails_is_subset_semantics(a, b):
    ca, cb = _cond(a), _cond(b)
    expected = all(a.get(i) == pol for i, pol in b.items())
    assert entails(ca, cb) == expected


@given(_literals, _literals, _literals)
@settings(max_examples=200)
def test_entails_transitive(a, b, c):
    # build nested supersets so each entailment holds by construction
    cb_map = {**b, **c}
    ca_map = {**a, **cb_map}
    ca, cb, cc = _cond(ca_map), _cond(cb_map), _cond(c)
    assert entails(ca, cb)
    assert entails(cb, cc)
    assert entails(ca, cc)


@given(_literals, _literals, st.integers(0, 255))
@settings(max_examples=200)
def test_entailment_preserves_evaluation(a, b, value):
    # if a entails b, any state satisfying a satisfies b
    ca, cb = _cond({**a, **b}), _cond(b)
    state = LogicalState(8, value)
    if evaluate(ca, state):
        assert evaluate(cb, state)


def test_state_hex_round_trip():
    s = LogicalState(12, 0xA5F)
    assert s.to_hex() == "a5f"
    assert LogicalState.from_hex(12, s.to_hex()) == s
    assert LogicalState(5, 3).to_hex() == "03"  # ceil(5/4) = 2 digits
