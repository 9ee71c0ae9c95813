import numpy as np
import pytest

import opchain
from opchain.domain_io import (
    DomainFile,
    parse_domain,
    read_trace,
    serialize_domain,
    trace_to_lines,
)
from opchain.errors import TraceFormatError
from opchain.executor import EngineConfig, Strategy, execute
from opchain.worlds.abstract import AbstractStochasticWorld


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def test_empty_input_gives_empty_file_no_diagnostics():
    result = parse_domain("")
    assert result.ok
    assert result.file == DomainFile()
    assert result.diagnostics == ()


def test_comments_and_blank_lines_ignored():
    result = parse_domain("# a comment\n\n   \n# another\n")
    assert result.ok and result.file == DomainFile()


def test_minimal_domain():
    text = """
version 1
domain tiny
predicate on(slot)
object a : slot
operator put {
  policy shove(a)
  pre (not (on a))
  run (not (on a))
  eff (on a)
}
goal done (on a)
plan go put
"""
    result = parse_domain(text)
    assert result.ok, [str(d) for d in result.diagnostics]
    f = result.file
    assert f.name == "tiny"
    assert f.operators[0].policy == ("shove", ("a",))
    dom = f.to_logic_domain()
    assert dom.size == 1
    ops = f.build_operators(dom)
    assert ops["put"].entry.evaluate(dom.state())
    assert f.goal_condition("done", dom).evaluate(dom.state(("on", "a")))


def test_zero_arity_predicate_forms():
    result = parse_domain("predicate raining\npredicate sunny()\n")
    assert result.ok
    assert result.file.predicates[0].param_types == ()
    assert result.file.predicates[1].param_types == ()


def test_undeclared_predicate_is_error_with_position():
    text = "operator o {\n  pre (ghost x)\n  run\n  eff\n}\n"
    result = parse_domain(text)
    assert not result.ok
    messages = [d.message for d in result.errors]
    assert any("undeclared predicate 'ghost'" in m for m in messages)


def test_arity_and_type_mismatches_reported():
    text = """
predicate on(slot)
object a : slot
object b : other
operator o {
  pre (on a b)
  run
  eff (on b)
}
"""
    result = parse_domain(text)
    assert not result.ok
    msgs = " | ".join(d.message for d in result.errors)
    assert "expects 1 arguments" in msgs
    assert "has type 'other'" in msgs


def test_contradictory_condition_reported():
    text = """
predicate on(slot)
object a : slot
operator o {
  pre (on a) (not (on a))
  run
  eff (on a)
}
"""
    result = parse_domain(text)
    assert not result.ok
    assert any("contradictory" in d.message for d in result.errors)


def test_duplicate_names_reported():
    text = "predicate p\npredicate p\nobject a : t\nobject a : t\n"
    result = parse_domain(text)
    msgs = " | ".join(d.message for d in result.errors)
    assert "duplicate predicate" in msgs and "duplicate object" in msgs


def test_unclosed_block_reported():
    result = parse_domain("operator o {\n  pre\n")
    assert not result.ok
    assert any("unclosed" in d.message for d in result.errors)


def test_unmatched_brace_reported():
    result = parse_domain("}\n")
    assert not result.ok
    assert any("unmatched" in d.message for d in result.errors)


def test_multiple_errors_collected_not_just_first():
    text = "predicate p(\nobject : t\nplan x missing_op\n"
    result = parse_domain(text)
    assert len(result.errors) >= 3


def test_error_position_points_at_offending_token():
    text = "object a :\n"
    result = parse_domain(text)
    assert not result.ok
    d = result.errors[0]
    assert d.line == 1
    assert d.column == len(text.rstrip()) + 1  # the missing type at line end
    assert d.excerpt == "object a :"


def test_unexpected_character_recovery():
    result = parse_domain("domain k@tchen\n")
    assert any("unexpected character" in d.message for d in result.diagnostics)
    cols = [d.column for d in result.diagnostics if "unexpected character" in d.message]
    assert cols == [9]


def test_diagnostics_positions_inside_text(kitchen_text):
    # damage the fixture at a known spot and check positions stay in range
    lines = kitchen_text.splitlines()
    lines[20] = lines[20] + " ???"
    result = parse_domain("\n".join(lines))
    for d in result.diagnostics:
        assert 1 <= d.line <= len(lines)
        assert 1 <= d.column <= len(lines[d.line - 1]) + 2


# ---------------------------------------------------------------------------
# serialization round-trips
# ---------------------------------------------------------------------------


def test_kitchen_round_trip_structural_equality(kitchen_file):
    text = serialize_domain(kitchen_file)
    again = parse_domain(text)
    assert again.ok, [str(d) for d in again.diagnostics]
    assert again.file == kitchen_file


def test_serialization_is_deterministic_and_idempotent(kitchen_file):
    t1 = serialize_domain(kitchen_file)
    t2 = serialize_domain(kitchen_file)
    assert t1 == t2
    reparsed = parse_domain(t1).file
    assert serialize_domain(reparsed) == t1


def test_round_trip_preserves_operator_order(kitchen_file):
    names = [o.name for o in kitchen_file.operators]
    again = parse_domain(serialize_domain(kitchen_file)).file
    assert [o.name for o in again.operators] == names


def test_round_trip_without_world_section():
    text = "version 1\ndomain d\npredicate p\noperator o {\n  policy none\n  pre\n  run\n  eff (p)\n}\n"
    f = parse_domain(text).file
    assert f is not None
    assert parse_domain(serialize_domain(f)).file == f


# ---------------------------------------------------------------------------
# trace records
# ---------------------------------------------------------------------------


def _sample_trace(seed=3, n=4, p=0.7):
    world = AbstractStochasticWorld(n, p=p, q=0.05, seed=seed)
    chain = world.make_chain()
    trace = execute(chain, world, Strategy.REACTIVE, EngineConfig(tick_budget=4000))
    return trace, world.domain.size


def test_trace_round_trip_exact():
    trace, width = _sample_trace()
    lines = trace_to_lines(trace, width)
    again = read_trace("\n".join(lines))
    assert again == trace


def test_zero_tick_trace_is_header_plus_footer():
    world = AbstractStochasticWorld(2, p=1.0, seed=0)
    world.inject(("set_stage", 2))
    chain = world.make_chain()
    trace = execute(chain, world, Strategy.REACTIVE)
    lines = trace_to_lines(trace, world.domain.size)
    assert len(lines) == 2  # header + summary only
    assert read_trace("\n".join(lines)) == trace


def test_hex_width_is_quarter_of_groundings():
    trace, width = _sample_trace(n=5)  # G = 6 -> ceil(6/4) = 2 hex digits
    lines = trace_to_lines(trace, width)
    import json

    for line in lines[1:-1]:
        rec = json.loads(line)
        assert len(rec["state"]) == (width + 3) // 4


def test_malformed_trace_lines_raise_with_line_numbers():
    trace, width = _sample_trace()
    lines = trace_to_lines(trace, width)

    with pytest.raises(TraceFormatError) as e1:
        read_trace("not json at all")
    assert e1.value.line_no == 1

    broken = list(lines)
    broken[1] = '{"tick": 1}'  # missing fields
    with pytest.raises(TraceFormatError) as e2:
        read_trace("\n".join(broken))
    assert e2.value.line_no == 2

    with pytest.raises(TraceFormatError):
        read_trace("\n".join(lines[:-1]))  # summary footer missing

    with pytest.raises(TraceFormatError):
        read_trace("")


def test_trace_write_read_file_round_trip(tmp_path):
    trace, width = _sample_trace(seed=9)
    path = tmp_path / "run.trace"
    opchain.write_trace(trace, width, path)
    assert read_trace(path.read_text()) == trace


# ---------------------------------------------------------------------------
# mutation fuzzing (small here; the acceptance suite runs 1000 mutants)
# ---------------------------------------------------------------------------


def mutate(rng: np.random.Generator, text: str) -> str:
    kind = rng.integers(0, 5)
    if not text:
        return "x"
    pos = int(rng.integers(0, len(text)))
    ch = chr(int(rng.integers(32, 127)))
    if kind == 0:  # delete a character
        return text[:pos] + text[pos + 1 :]
    if kind == 1:  # insert a character
        return text[:pos] + ch + text[:0] + text[pos:]
    if kind == 2:  # replace a character
        return text[:pos] + ch + text[pos + 1 :]
    if kind == 3:  # duplicate a line
        lines = text.splitlines()
        i = int(rng.integers(0, len(lines)))
        return "\n".join(lines[: i + 1] + [lines[i]] + lines[i + 1 :])
    lines = text.splitlines()  # drop a line
    i = int(rng.integers(0, len(lines)))
    return "\n".join(lines[:i] + lines[i + 1 :])


def assert_parse_total(text: str):
    result = parse_domain(text)  # must not raise
    source_lines = text.splitlines()
    for d in result.diagnostics:
        assert 1 <= d.line <= max(1, len(source_lines))
        line_text = source_lines[d.line - 1] if d.line <= len(source_lines) else ""
        assert 1 <= d.column <= len(line_text) + 2
        assert d.excerpt == line_text
    return result


def test_fuzz_mutants_never_crash(kitchen_text):
    rng = np.random.default_rng(2024)
    for _ in range(150):
        mutant = kitchen_text
        for _ in range(int(rng.integers(1, 4))):
            mutant = mutate(rng, mutant)
        assert_parse_total(mutant)
