import mpmath
import numpy as np
import pytest

from opchain.analysis import (
    BENCH_POSE_NOISE,
    ConvergenceParams,
    benchmark_lines,
    default_tick_budget,
    expected_transitions_bound,
    format_benchmark,
    format_summary,
    montecarlo_convergence,
    pk_bound,
    run_benchmark,
    summary_lines,
)
from opchain.executor import Strategy


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def test_params_validation():
    with pytest.raises(ValueError):
        ConvergenceParams(0, 0.5)
    with pytest.raises(ValueError):
        ConvergenceParams(3, 0.0)
    with pytest.raises(ValueError):
        ConvergenceParams(3, 1.5)


def test_pk_bound_p_one_is_always_one():
    params = ConvergenceParams(7, 1.0)
    for k in (0, 1, 5, 100):
        assert pk_bound(params, k) == 1.0


def test_pk_bound_first_value_is_p_to_the_n():
    params = ConvergenceParams(5, 0.9)
    assert pk_bound(params, 0) == pytest.approx(0.9**5)
    assert pk_bound(params, 0) == pytest.approx(0.59049)


def test_pk_bound_monotone_to_one():
    params = ConvergenceParams(4, 0.8)
    values = [pk_bound(params, k) for k in range(60)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, abs=1e-4)


def test_reported_inflation_values():
    # the three worked examples: 8.47, 1.67, 2.44 to the printed precision
    assert expected_transitions_bound(ConvergenceParams(5, 0.9)) == pytest.approx(
        8.47, abs=0.005
    )
    assert ConvergenceParams(10, 0.95).inflation == pytest.approx(1.67, abs=0.005)
    assert ConvergenceParams(4, 0.8).inflation == pytest.approx(2.44, abs=0.005)


def test_bounds_match_arbitrary_precision_to_12_digits():
    mpmath.mp.dps = 50
    grid = [(n, p) for n in (1, 2, 4, 5, 10, 16) for p in (0.6, 0.8, 0.9, 0.95, 1.0)]
    for n, p in grid:
        params = ConvergenceParams(n, p)
        mp_p = mpmath.mpf(repr(p))
        mp_gamma = 1 - mp_p**n
        for k in (0, 1, 3, 10):
            ours = pk_bound(params, k)
            ref = float(1 - mp_gamma ** (k + 1))
            if ref != 0:
                assert abs(ours - ref) / abs(ref) < 1e-12
        ours_b = expected_transitions_bound(params)
        ref_b = float(n / mp_p**n)
        assert abs(ours_b - ref_b) / ref_b < 1e-12


# ---------------------------------------------------------------------------
# Monte Carlo harness
# ---------------------------------------------------------------------------


def test_p_one_every_trial_takes_exactly_n_transitions():
    params = ConvergenceParams(5, 1.0)
    s = montecarlo_convergence(params, trials=50, seed=1)
    assert set(s.transitions) == {5}
    assert set(s.uncontrolled) == {0}
    ks, values = s.pk_curve()
    assert values[0] == 1.0
    assert s.all_ok


def test_harness_bounds_hold_small_run():
    params = ConvergenceParams(4, 0.8)
    s = montecarlo_convergence(params, trials=2000, seed=7)
    assert s.successes == 2000
    assert s.mean_transitions <= expected_transitions_bound(params)
    assert s.all_ok


def test_pk_curve_nondecreasing():
    s = montecarlo_convergence(ConvergenceParams(5, 0.85), trials=1500, seed=3)
    _, values = s.pk_curve()
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_no_trial_exceeds_default_budget():
    params = ConvergenceParams(5, 0.8)
    s = montecarlo_convergence(params, trials=3000, seed=11)
    assert s.successes == s.trials
    assert max(s.ticks) <= default_tick_budget(params)


def test_milder_regression_converges_faster_on_average():
    params = ConvergenceParams(6, 0.75)
    worst = montecarlo_convergence(params, trials=3000, seed=5)
    mild = montecarlo_convergence(
        params, trials=3000, seed=5, regression="back_one"
    )
    assert mild.mean_transitions <= worst.mean_transitions
    assert worst.all_ok  # bound is attained under worst-case regression


def test_ambient_perturbations_still_converge():
    params = ConvergenceParams(4, 0.9)
    s = montecarlo_convergence(params, trials=1000, seed=9, q=0.05)
    assert s.successes == s.trials


def test_parallel_equals_serial():
    params = ConvergenceParams(5, 0.9)
    serial = montecarlo_convergence(params, trials=400, seed=21, jobs=1)
    parallel = montecarlo_convergence(params, trials=400, seed=21, jobs=4)
    assert serial.transitions == parallel.transitions
    assert serial.uncontrolled == parallel.uncontrolled
    assert summary_lines(serial) == summary_lines(parallel)


def test_summary_lines_have_no_wall_clock_and_are_stable():
    params = ConvergenceParams(3, 0.9)
    a = montecarlo_convergence(params, trials=200, seed=2)
    b = montecarlo_convergence(params, trials=200, seed=2)
    la, lb = summary_lines(a), summary_lines(b)
    assert la == lb
    assert not any("wall" in line for line in la)
    assert format_summary(a) == format_summary(b)


# ---------------------------------------------------------------------------
# kitchen benchmark (small trial counts; acceptance runs the full size)
# ---------------------------------------------------------------------------


def test_benchmark_rows_and_report_shape(kitchen_file):
    rep = run_benchmark(kitchen_file, trials=6, seed=3, interference=True)
    assert {r.strategy for r in rep.rows} == {
        "reactive",
        "linear",
        "linear-replan",
    }
    linear = rep.row(Strategy.LINEAR)
    assert linear.success_rate == 0.0
    assert linear.mean_ticks is None
    reactive = rep.row(Strategy.REACTIVE)
    replan = rep.row(Strategy.LINEAR_REPLAN)
    assert reactive.success_rate == 1.0 and replan.success_rate == 1.0
    assert all(r >= 1 for r in replan.replans)
    assert reactive.mean_ticks <= replan.mean_ticks
    assert rep.pose_noise == BENCH_POSE_NOISE


def test_benchmark_no_interference_no_noise_identical_ticks(kitchen_file):
    rep = run_benchmark(
        kitchen_file, trials=4, seed=8, interference=False, pose_noise=0.0
    )
    base = rep.rows[0].ticks
    for row in rep.rows[1:]:
        assert row.ticks == base
    assert all(all(s for s in row.succeeded) for row in rep.rows)


def test_benchmark_parallel_equals_serial(kitchen_file):
    a = run_benchmark(kitchen_file, trials=6, seed=4, jobs=1)
    b = run_benchmark(kitchen_file, trials=6, seed=4, jobs=3)
    assert benchmark_lines(a) == benchmark_lines(b)
    for ra, rb in zip(a.rows, b.rows):
        assert ra == rb


def test_benchmark_formatting_runs(kitchen_file):
    rep = run_benchmark(kitchen_file, trials=3, seed=5, interference=False)
    text = format_benchmark(rep)
    assert "strategy" in text and "reactive" in text
    lines = benchmark_lines(rep)
    assert lines[0].startswith('{"format":"opchain-bench"')
