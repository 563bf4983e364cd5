"""Brute-force references for small instances.

Everything here enumerates: thresholds, lifted vectors on a grid, or a
dense (a, s) lattice. Nothing is meant to be fast; it is meant to be obviously
correct and independent of the optimized code paths it certifies.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .dataio import Dataset
from .metrics import FEAS_SLACK, TaskSpec, metrics_at_threshold
from .model import ModelParams, forward_scores
from .reform import h_value

SINGULAR_EPS = 1e-6


class SingularPointError(ValueError):
    """Some score coincides with the threshold (within ``SINGULAR_EPS``)."""


def g_value(a, s, t):
    """The discontinuous reference G_t(a, s) = s - 1{a > t}."""
    return np.subtract(s, np.greater(a, t).astype(float))


@dataclass
class OracleReport:
    check: str
    passed: bool
    n_checked: int = 0
    counterexample: dict | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=float)


# --- fixed-score threshold enumeration -------------------------------------------------

def _direct_metrics(scores, labels, t):
    tp = fp = fn = 0
    for f, y in zip(scores, labels):
        if f > t:
            tp += y == 1
            fp += y == 0
        else:
            fn += y == 1
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    return prec, rec


def _fbeta(p, r, beta):
    b2 = beta * beta
    return (1 + b2) * p * r / (b2 * p + r) if b2 * p + r > 0 else 0.0


def oracle_best_threshold(scores, data: Dataset, task: TaskSpec):
    """Exhaustive search over one threshold per prediction pattern.

    Returns ``(t, objective, feasible)``. Ties keep the smaller threshold; with
    no feasible threshold the least-violating one is returned.
    """
    scores = [float(v) for v in scores]
    labels = [int(v) for v in data.labels]
    u = sorted(set(scores))
    cands = [0.0 if u[0] > 0 else u[0] - 1.0]
    cands += [(u[i] + u[i + 1]) / 2.0 for i in range(len(u) - 1)]
    cands.append(1.0 if u[-1] <= 1 else u[-1])

    best = None
    for t in cands:
        p, r = _direct_metrics(scores, labels, t)
        if task.kind == "OFBS":
            obj, viol = _fbeta(p, r, task.beta), 0.0
        else:
            obj, con = (r, p) if task.kind == "FPOR" else (p, r)
            viol = max(0.0, task.alpha - con)
        feasible = viol <= FEAS_SLACK
        key = (feasible, obj if feasible else -viol)
        if best is None or key > best[0]:
            best = (key, t, obj, feasible)
    _, t, obj, feasible = best
    return t, obj, feasible


# --- lifted enumeration ----------------------------------------------------------------

def _row_metrics(S, labels, task: TaskSpec):
    """Objective and constraint value of every row of S, ratio form, zero-denominator -> 0."""
    pos = labels == 1
    sp = S[:, pos].sum(axis=1)
    sa = S.sum(axis=1)
    n_pos = int(pos.sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(sa > 0, sp / np.where(sa > 0, sa, 1.0), 0.0)
        rec = sp / n_pos if n_pos else np.zeros_like(sp)
    if task.kind == "FPOR":
        return rec, prec
    if task.kind == "FROP":
        return prec, rec
    b2 = task.beta ** 2
    den = b2 * n_pos + sa
    fb = np.where(den > 0, (1 + b2) * sp / np.where(den > 0, den, 1.0), 0.0)
    return fb, np.ones_like(fb)


def _metric_ok(con, task: TaskSpec):
    if not task.constrained:
        return np.ones(con.shape, dtype=bool)
    return con >= task.alpha - FEAS_SLACK


@lru_cache(maxsize=32)
def _lattice(values: tuple, n: int) -> np.ndarray:
    out = np.array(list(itertools.product(values, repeat=n)), dtype=float).reshape(-1, n)
    out.setflags(write=False)
    return out


def _sign_ok(S, scores, labels, t, use_h: bool):
    """Rows of S satisfying the per-sample sign constraints (<= 0 on P, >= 0 on N)."""
    if use_h:
        v = h_value(scores[None, :], S, t)
    else:
        v = g_value(scores[None, :], S, t)
    sign = np.where(labels == 1, 1.0, -1.0)
    return np.all(sign * v <= 0.0, axis=1)


def _check_nonsingular(scores, t):
    margin = float(np.min(np.abs(scores - t)))
    if not margin > SINGULAR_EPS:
        raise SingularPointError(f"singular pair: min |f - t| = {margin:.3g}")


def oracle_feasibility_equivalence(params: ModelParams, t: float, data: Dataset,
                                   task: TaskSpec, grid=(0.0, 0.5, 1.0),
                                   n_max: int = 12) -> OracleReport:
    """Feasibility of (theta, t) in the original problem versus its lifted relaxation.

    (i) original-feasible implies the rounded lifted point satisfies every
    relaxed constraint; (ii) any grid s satisfying every relaxed constraint
    implies original feasibility.
    """
    if data.n > n_max:
        raise ValueError(f"instance too large for enumeration: N={data.n} > {n_max}")
    scores = forward_scores(params, data.features)
    _check_nonsingular(scores, t)
    labels = np.asarray(data.labels)
    rep = metrics_at_threshold(scores, data, t, task)
    orig_ok = rep.feasible

    rounded = (scores > t).astype(float)[None, :]
    _, con_r = _row_metrics(rounded, labels, task)
    round_ok = bool(_sign_ok(rounded, scores, labels, t, True)[0] and _metric_ok(con_r, task)[0])
    if orig_ok and not round_ok:
        return OracleReport("feasibility", False, 1,
                            {"direction": "i", "t": t, "scores": scores.tolist(),
                             "s": rounded[0].tolist()})

    S = _lattice(tuple(float(v) for v in grid), data.n)
    _, con = _row_metrics(S, labels, task)
    lifted_ok = _sign_ok(S, scores, labels, t, True) & _metric_ok(con, task)
    n_checked = 1 + S.shape[0]
    if lifted_ok.any() and not orig_ok:
        j = int(np.flatnonzero(lifted_ok)[0])
        return OracleReport("feasibility", False, n_checked,
                            {"direction": "ii", "t": t, "scores": scores.tolist(),
                             "s": S[j].tolist()})
    return OracleReport("feasibility", True, n_checked,
                        details={"original_feasible": orig_ok,
                                 "n_lifted_feasible": int(lifted_ok.sum())})


def _lifted_optimum(S, scores, labels, task, thresholds, use_h):
    obj, con = _row_metrics(S, labels, task)
    ok_metric = _metric_ok(con, task)
    best = None
    for t in thresholds:
        ok = ok_metric & _sign_ok(S, scores, labels, t, use_h)
        if ok.any():
            v = float(obj[ok].max())
            best = v if best is None else max(best, v)
    return best


def _direct_optimum(scores, data, task, thresholds):
    best = None
    for t in thresholds:
        rep = metrics_at_threshold(scores, data, t, task)
        if rep.feasible:
            v = rep.objective(task)
            best = v if best is None else max(best, v)
    return best


def _same(a, b, tol):
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= tol


def oracle_global_equivalence_fixed_theta(params: ModelParams, data: Dataset, task: TaskSpec,
                                          t_grid, n_max: int = 12) -> OracleReport:
    """Compare lifted and original optima at fixed theta.

    The lifted side maximizes phi_obj over s in {0,1}^N and t in ``t_grid``
    subject to the per-sample sign constraints and the metric constraint; this
    is done both with the indicator reference G_t and with H_t. The original
    side maximizes the exact metric over the same thresholds. A second
    comparison runs over one non-singular threshold per prediction pattern and
    checks the lifted optimum against :func:`oracle_best_threshold`.
    """
    if n_max > 12:
        raise ValueError("n_max must be <= 12")
    if data.n > n_max:
        raise ValueError(f"instance too large for enumeration: N={data.n} > {n_max}")
    scores = forward_scores(params, data.features)
    t_grid = [float(t) for t in t_grid]
    for t in t_grid:
        _check_nonsingular(scores, t)
    labels = np.asarray(data.labels)
    S = _lattice((0.0, 1.0), data.n)
    tol = 1e-12

    lifted_g = _lifted_optimum(S, scores, labels, task, t_grid, use_h=False)
    lifted_h = _lifted_optimum(S, scores, labels, task, t_grid, use_h=True)
    direct = _direct_optimum(scores, data, task, t_grid)

    u = np.unique(scores)
    cands = np.concatenate([[u[0] - 0.5], (u[:-1] + u[1:]) / 2.0, [u[-1] + 0.5]])
    cands = [float(t) for t in cands if np.min(np.abs(scores - t)) > SINGULAR_EPS]
    lifted_all = _lifted_optimum(S, scores, labels, task, cands, use_h=True)
    _, best_obj, best_feas = oracle_best_threshold(scores, data, task)
    best = best_obj if best_feas else None

    details = {"lifted_G": lifted_g, "lifted_H": lifted_h, "direct": direct,
               "lifted_all_thresholds": lifted_all, "oracle_best": best}
    ok = (_same(lifted_g, direct, tol) and _same(lifted_h, direct, tol)
          and _same(lifted_all, best, tol))
    cex = None if ok else {"scores": scores.tolist(), "labels": labels.tolist(), **details}
    return OracleReport("global", ok, S.shape[0] * (2 * len(t_grid) + len(cands)), cex, details)


# --- (a, s) lattice checks -------------------------------------------------------------

def level_set_check(n: int = 101, thresholds=None, eps: float = 1e-6) -> OracleReport:
    """Zero sets, sublevel and superlevel sets of H_t and G_t agree off a = t on [0,1]^2."""
    if thresholds is None:
        thresholds = np.round(np.arange(1, 10) / 10.0, 12)
    grid = np.linspace(0.0, 1.0, n)
    A, Sg = np.meshgrid(grid, grid, indexing="ij")
    bad, checked = 0, 0
    first = None
    for t in thresholds:
        keep = np.abs(A - t) > eps
        h = h_value(A, Sg, t)[keep]
        g = g_value(A, Sg, t)[keep]
        mism = ((h == 0) != (g == 0)) | ((h <= 0) != (g <= 0)) | ((h >= 0) != (g >= 0))
        checked += int(keep.sum())
        if mism.any():
            bad += int(mism.sum())
            if first is None:
                j = int(np.flatnonzero(mism)[0])
                first = {"t": float(t), "a": float(A[keep][j]), "s": float(Sg[keep][j]),
                         "H": float(h[j]), "G": float(g[j])}
    return OracleReport("level_sets", bad == 0, checked, first, {"mismatches": bad})
