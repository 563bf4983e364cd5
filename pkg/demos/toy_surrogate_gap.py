"""
Smoothed vs exact metrics on the 1D toy
=======================================

Sigmoid-smoothed precision and recall drift away from the exact ones when
the temperature is low. Run from the repo root: python demos/toy_surrogate_gap.py
"""

from exactdmo.dataio import gen_toy1d
from exactdmo.toy import T_GRID, exact_curves, smooth_curves, toy_diagnostics

data = gen_toy1d(500, 0)
x = data.features[:, 0]
print(data.n, "samples,", data.n_pos, "positive")

# exact curves over the threshold grid
exact = exact_curves(x, data)

# a few rows side by side, exact vs T=1
soft = smooth_curves(x, data, 1.0)
for j in range(0, T_GRID.size, 25):
    print("t=%+.2f  exact p=%.3f r=%.3f   T=1 p=%.3f r=%.3f" % (
        T_GRID[j], exact["precision"][j], exact["recall"][j],
        soft["precision"][j], soft["recall"][j]))

# worst-case gaps per temperature
diag = toy_diagnostics(data, temps=(1.0, 2.0, 10.0, 100.0))
for T in diag.temps:
    print("T=%-5g precision gap %.3f  recall gap %.3f  F1 lost %.4f" % (
        T, diag.precision_gap[T], diag.recall_gap[T], diag.f1_shortfall[T]))

# the sigmoid slope half a unit from the threshold is tiny at T=10
from exactdmo.baselines import sigmoid_indicator_grad
print("slope at |x - t| = 0.5, T=10:", sigmoid_indicator_grad(0.5, 0.0, 10.0))
