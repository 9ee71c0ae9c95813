"""Convergence guarantees, checked by simulation.

A chain of N operators that each complete with probability p reaches its goal
with probability 1; the chance of arriving within k uncontrolled transitions
is at least 1 - (1 - p^N)^(k+1) and the expected transition count is at most
N / p^N.  This script evaluates the closed forms, runs the worst-case
abstract world (every failure throws execution back to the start), and shows
the empirical curves dominating the bounds.  With matplotlib available, the
curves are also saved as a PNG.
"""

import numpy as np

from opchain.analysis import (
    ConvergenceParams,
    expected_transitions_bound,
    montecarlo_convergence,
    pk_bound,
)

GRID = [(5, 0.9), (10, 0.95), (4, 0.8)]
TRIALS = 10_000

summaries = {}
print(f"{'N':>3} {'p':>5} {'inflation':>10} {'E[T] bound':>11} "
      f"{'empirical':>10} {'verdict':>8}")
for n, p in GRID:
    params = ConvergenceParams(n, p)
    s = montecarlo_convergence(params, trials=TRIALS, seed=99)
    summaries[(n, p)] = s
    bound = expected_transitions_bound(params)
    ok = s.mean_transitions <= bound and s.all_ok
    print(
        f"{n:>3} {p:>5} {params.inflation:>10.4f} {bound:>11.4f} "
        f"{s.mean_transitions:>10.4f} {'ok' if ok else 'VIOLATED':>8}"
    )

print("\nsuccess-within-k curves (empirical vs bound), N=5 p=0.9:")
s = summaries[(5, 0.9)]
ks, values = s.pk_curve()
for k, v in zip(ks[:8], values[:8]):
    b = pk_bound(s.params, int(k))
    bar = "#" * int(40 * v)
    print(f"  k={k:>2}  P^={v:.4f}  bound={b:.4f}  {bar}")

# A milder regression mode (one stage back instead of to the start) converges
# faster; the worst case is what the bound is written against.
mild = montecarlo_convergence(
    ConvergenceParams(5, 0.9), trials=TRIALS, seed=99, regression="back_one"
)
print(
    f"\nmean transitions, worst-case regression: {s.mean_transitions:.3f}; "
    f"one-stage regression: {mild.mean_transitions:.3f}"
)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("\nmatplotlib not installed; skipping the plot")
else:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (n, p), summary in summaries.items():
        ks, values = summary.pk_curve()
        line = ax.plot(ks, values, marker="o", ms=3, label=f"empirical N={n} p={p}")
        bounds = [pk_bound(summary.params, int(k)) for k in ks]
        ax.plot(ks, bounds, ls="--", color=line[0].get_color(), alpha=0.6)
    ax.set_xlabel("uncontrolled transitions k")
    ax.set_ylabel("P(goal reached within k)")
    ax.set_title("Empirical success curves (solid) vs lower bounds (dashed)")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    out = "demos/pk_curves.png"
    fig.savefig(out, dpi=120)
    print(f"\nwrote {out}")
