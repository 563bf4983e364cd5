"""
Fix precision, optimize recall on overlapping data
==================================================

Trains a small MLP with the exact penalty method on the 1D toy and compares
it with the best threshold any classifier on those scores could pick.
"""

import warnings

import numpy as np

from exactdmo import SolverConfig, TaskSpec, run_exact_penalty
from exactdmo.dataio import gen_toy1d
from exactdmo.oracle import oracle_best_threshold

data = gen_toy1d(500, 1)
task = TaskSpec.fpor(0.8)

cfg = SolverConfig(lambda0=100.0, gamma0=1e5, lr_theta=1e-2,
                   inner_max_iters=3000, inner_patience=100, seed=1)

with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    res = run_exact_penalty(data, task, cfg, arch="mlp:8",
                            callback=lambda row: print(
                                "k=%2d lambda=%9.1f  p=%.3f r=%.3f" % (
                                    row["k"], row["lambda"], row["precision"], row["recall"])))

# rounded prediction at the learned threshold
b = res.train_before
print("\nselected k=%d  t=%.4f  precision %.3f recall %.3f" % (
    res.best_k, res.lifted.t, b.precision, b.recall))

# the best any threshold could do on the same scores
scores = res.scores(data)
t_star, r_star, ok = oracle_best_threshold(scores, data, task)
print("oracle threshold %.4f  recall %.3f  feasible %s" % (t_star, r_star, ok))

# lifted s should match the rounded prediction
print("s agrees with 1{f > t} on", res.s_consistency, "of samples")
print("scores in [0.25, 0.75]:", np.mean(np.abs(scores - 0.5) <= 0.25))
