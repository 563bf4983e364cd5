"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line
(also collected into the terminal summary) and asserts at the stated tolerance
and runtime limit."""
import time
import warnings
from functools import lru_cache

import numpy as np
import pytest

from exactdmo.baselines import train_baseline
from exactdmo.dataio import gen_gauss2d, gen_toy1d, make_rng
from exactdmo.metrics import TaskSpec, metrics_at_threshold, threshold_adjust
from exactdmo.oracle import oracle_best_threshold
from exactdmo.solver import SolverConfig, run_exact_penalty
from exactdmo.toy import toy_diagnostics
from exactdmo.verify import (check_h_subgradient, check_level_sets, check_measure_bound,
                             check_oracle, check_penalty_gradient)

from conftest import ACCEPTANCE_LINES, make_data

SEEDS = (0, 1, 2)
ARCH = "mlp:8"
# end-to-end settings shared by criteria 7-10
E2E = dict(lambda0=100.0, gamma0=1e5, lr_theta=1e-2, inner_max_iters=3000, inner_patience=100)


def record(num, title, ok, detail, seconds, limit):
    in_time = seconds < limit
    line = (f"{'PASS' if ok and in_time else 'FAIL'} criterion {num:>2} {title}: {detail} "
            f"[{seconds:.1f}s / {limit:g}s]")
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line
    assert in_time, line


def from_check(num, title, check, limit):
    record(num, title, check.passed, f"{check.value:.3g} vs limit {check.limit:.3g}",
           check.seconds, limit)


@lru_cache(maxsize=None)
def ero_toy(seed, gamma_on=True):
    cfg = SolverConfig(seed=seed, **{**E2E, **({} if gamma_on else {"gamma0": 0.0})})
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = run_exact_penalty(gen_toy1d(500, seed), TaskSpec.fpor(0.8), cfg, arch=ARCH)
    return res, time.perf_counter() - start


@lru_cache(maxsize=None)
def ss_ep_toy(seed):
    cfg = SolverConfig(seed=seed, temperature=2.0, **E2E)
    start = time.perf_counter()
    res = train_baseline(gen_toy1d(500, seed), "SS_EP", TaskSpec.fpor(0.8), cfg, arch=ARCH)
    return res, time.perf_counter() - start


def test_c01_level_sets():
    from_check(1, "H/G level sets on 101x101 x 9 grid", check_level_sets(101), 1.0)


def test_c02_h_subgradient():
    from_check(2, "H subgradient vs central differences", check_h_subgradient(10_000), 1.0)


def test_c03_penalty_gradient():
    from_check(3, "penalty gradient, 50 instances, mlp(8)",
               check_penalty_gradient(50, arch="mlp:8"), 30.0)


def test_c04_oracle_suite():
    from_check(4, "fixed-theta oracle suite, 200 instances", check_oracle(200), 120.0)


def test_c05_measure_bound():
    from_check(5, "measure of nonzero dH/da over 101 thresholds", check_measure_bound(101), 5.0)


def test_c06_toy_surrogate_gap():
    start = time.perf_counter()
    diag = toy_diagnostics(temps=(1.0, 2.0, 10.0))
    sec = time.perf_counter() - start
    gaps = [diag.precision_gap[T] for T in (1.0, 2.0, 10.0)]
    short = [diag.f1_shortfall[T] for T in (1.0, 2.0, 10.0)]
    ok = (gaps[0] > 0.05 and gaps[1] > 0.05 and short[0] >= 0.02
          and all(b <= a for a, b in zip(gaps, gaps[1:]))
          and all(b <= a for a, b in zip(short, short[1:])))
    detail = ("precision gap " + ", ".join(f"{g:.3f}" for g in gaps)
              + "; F1 shortfall " + ", ".join(f"{s:.4f}" for s in short))
    record(6, "toy surrogate gaps (T=1,2,10)", ok, detail, sec, 10.0)


@pytest.mark.slow
def test_c07_separable_gauss2d():
    start = time.perf_counter()
    bad, worst = [], 1.0
    for seed in SEEDS:
        d = gen_gauss2d(1000, 8.0, 0.1, seed)
        for task in (TaskSpec.fpor(0.8), TaskSpec.frop(0.8)):
            r = run_exact_penalty(d, task, SolverConfig(seed=seed, **E2E), arch=ARCH)
            rep = r.train_before
            obj = rep.objective(task)
            worst = min(worst, obj)
            if not (rep.feasible and abs(obj - 1.0) <= 0.01):
                bad.append(f"{task.kind}/seed{seed}")
    sec = time.perf_counter() - start
    record(7, "ERO on separable gauss2d, FPOR+FROP", not bad,
           f"min objective {worst:.4f}, failures {bad or 'none'}", sec, 300.0)


@pytest.mark.slow
def test_c08_overlapping_toy_fpor():
    sec, rows, ok = 0.0, [], True
    for seed in SEEDS:
        res, s = ero_toy(seed)
        sec += s
        d = gen_toy1d(500, seed)
        task = TaskSpec.fpor(0.8)
        rep = res.train_before
        _, best, feas = oracle_best_threshold(res.scores(d), d, task)
        good = feas and rep.precision >= 0.8 - 1e-9 and rep.recall >= best - 0.05
        ok &= good
        rows.append(f"seed{seed} p={rep.precision:.3f} r={rep.recall:.3f} oracle r={best:.3f}")
    record(8, "ERO on toy1d FPOR 0.8 vs oracle threshold", ok, "; ".join(rows), sec, 300.0)


@pytest.mark.slow
def test_c09_ero_vs_smoothing():
    sec, rows, ok = 0.0, [], True
    for seed in SEEDS:
        ero, s1 = ero_toy(seed)
        ss, s2 = ss_ep_toy(seed)
        sec += s1 + s2
        a, b = ero.train_after, ss.train_after
        good = a.feasible and (not b.feasible or a.recall >= b.recall)
        ok &= good
        rows.append(f"seed{seed} ERO {a.recall:.3f} SS_EP {b.recall:.3f}"
                    + ("" if b.feasible else " (SS_EP infeasible)"))
    record(9, "ERO recall >= SS_EP(T=2) recall at feasibility", ok, "; ".join(rows), sec, 600.0)


@pytest.mark.slow
def test_c10_regularizer_effect():
    sec, rows, ok = 0.0, [], True

    def mid(res, d):
        return float(np.mean(np.abs(res.scores(d) - 0.5) <= 0.25))

    for seed in SEEDS:
        d = gen_toy1d(500, seed)
        on, s1 = ero_toy(seed, True)
        off, s2 = ero_toy(seed, False)
        sec += s1 + s2
        m_on, m_off = mid(on, d), mid(off, d)
        ok &= m_off > 0 and 2 * m_on <= m_off
        rows.append(f"seed{seed} on={m_on:.3f} off={m_off:.3f}")
    record(10, "mid-range score fraction, gamma on vs off", ok, "; ".join(rows), sec, 300.0)


def _grid_best(scores, labels, task, grid):
    """Best grid threshold by brute force over counts, ties to the smaller t."""
    pos = np.sort(scores[labels == 1])
    neg = np.sort(scores[labels == 0])
    tp = pos.size - np.searchsorted(pos, grid, side="right")
    fp = neg.size - np.searchsorted(neg, grid, side="right")
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(tp + fp > 0, tp / np.maximum(tp + fp, 1), 0.0)
    rec = tp / pos.size
    if task.kind == "OFBS":
        b2 = task.beta ** 2
        den = b2 * prec + rec
        obj = np.where(den > 0, (1 + b2) * prec * rec / np.where(den > 0, den, 1.0), 0.0)
        feas = np.ones(grid.size, dtype=bool)
        viol = np.zeros(grid.size)
    else:
        obj, con = (rec, prec) if task.kind == "FPOR" else (prec, rec)
        viol = np.maximum(task.alpha - con, 0.0)
        feas = viol <= 1e-9
    if feas.any():
        cand = np.where(feas, obj, -np.inf)
        return grid[int(np.argmax(cand))]
    return grid[int(np.argmin(viol))]


def test_c11_threshold_adjust_exact():
    start = time.perf_counter()
    rng = make_rng(11)
    grid = np.linspace(0.0, 1.0, 10_001)
    bad = 0
    for _ in range(100):
        n = int(rng.integers(5, 200))
        labels = rng.integers(0, 2, n)
        labels[:2] = (1, 0)
        scores = (rng.integers(0, 1000, n) + 0.25) / 1000.0
        kind = ("FPOR", "FROP", "OFBS")[int(rng.integers(3))]
        task = (TaskSpec.ofbs(float(rng.choice([0.5, 1.0, 2.0]))) if kind == "OFBS"
                else TaskSpec(kind, alpha=float(rng.uniform(0.3, 0.95))))
        d = make_data(labels)
        _, rep = threshold_adjust(scores, d, task)
        g = metrics_at_threshold(scores, d, float(_grid_best(scores, labels, task, grid)), task)
        same = (rep.feasible == g.feasible and rep.objective(task) == g.objective(task)
                and (rep.feasible or rep.violation(task) == g.violation(task)))
        bad += not same
    sec = time.perf_counter() - start
    record(11, "threshold_adjust vs 10,001-point grid, 100 instances", bad == 0,
           f"{bad} disagreements", sec, 10.0)
