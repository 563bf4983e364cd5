"""Exact versus sigmoid-smoothed metric curves on the 1D toy problem.

The classifier is ``1{x > t}`` on the raw feature, and the smoothed version
replaces each indicator with ``sigmoid(T (x - t))``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import sigmoid_indicator, sigmoid_indicator_grad
from .dataio import Dataset, gen_toy1d
from .metrics import TaskSpec, metrics_at_threshold
from .oracle import oracle_best_threshold

DEFAULT_TEMPS = (1.0, 2.0, 10.0)
T_GRID = np.linspace(-2.0, 2.0, 201)
TOY_N = 500
TOY_SEED = 0


def _ratio(num, den):
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def exact_curves(x, data: Dataset, t_grid=T_GRID) -> dict[str, np.ndarray]:
    task = TaskSpec.ofbs(1.0)
    reps = [metrics_at_threshold(x, data, float(t), task) for t in t_grid]
    return {"precision": np.array([r.precision for r in reps]),
            "recall": np.array([r.recall for r in reps]),
            "f1": np.array([r.f_beta for r in reps]),
            "predicts_any": np.array([not r.degenerate for r in reps])}


def smooth_curves(x, data: Dataset, T: float, t_grid=T_GRID) -> dict[str, np.ndarray]:
    sig = sigmoid_indicator(np.asarray(x)[None, :], np.asarray(t_grid)[:, None], T)
    sp = sig[:, data.pos_idx].sum(axis=1)
    sa = sig.sum(axis=1)
    prec = _ratio(sp, sa)
    rec = sp / data.n_pos
    return {"precision": prec, "recall": rec, "f1": _ratio(2 * prec * rec, prec + rec)}


@dataclass
class ToyDiagnostics:
    temps: tuple[float, ...]
    precision_gap: dict[float, float]
    recall_gap: dict[float, float]
    f1_shortfall: dict[float, float]
    best_f1: float


def toy_diagnostics(data: Dataset | None = None, temps=DEFAULT_TEMPS,
                    t_grid=T_GRID) -> ToyDiagnostics:
    """Sup-gaps between smoothed and exact curves, and the exact-F1 cost of
    choosing t by maximizing the smoothed F1 instead of the exact one.

    Thresholds above every sample, where exact precision is undefined, are
    left out of the precision gap.
    """
    data = data if data is not None else gen_toy1d(TOY_N, TOY_SEED)
    x = data.features[:, 0]
    exact = exact_curves(x, data, t_grid)
    _, best_f1, _ = oracle_best_threshold(x, data, TaskSpec.ofbs(1.0))
    pgap, rgap, short = {}, {}, {}
    for T in temps:
        sm = smooth_curves(x, data, T, t_grid)
        live = exact["predicts_any"]
        pgap[T] = float(np.max(np.abs(sm["precision"] - exact["precision"])[live]))
        rgap[T] = float(np.max(np.abs(sm["recall"] - exact["recall"])))
        short[T] = float(best_f1 - exact["f1"][int(np.argmax(sm["f1"]))])
    return ToyDiagnostics(tuple(temps), pgap, rgap, short, float(best_f1))


def write_toy_csvs(out_dir, temps=DEFAULT_TEMPS, data: Dataset | None = None,
                   t_grid=T_GRID) -> list[Path]:
    """One CSV per metric (t, exact, T=...) plus one for the sigmoid derivative vs x - t."""
    temps = [float(T) for T in temps]
    if not temps:
        raise ValueError("at least one temperature is required")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = data if data is not None else gen_toy1d(TOY_N, TOY_SEED)
    x = data.features[:, 0]
    exact = exact_curves(x, data, t_grid)
    smooth = {T: smooth_curves(x, data, T, t_grid) for T in temps}
    paths = []
    for metric in ("precision", "recall", "f1"):
        path = out / f"toy_{metric}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "exact", *(f"T={T:g}" for T in temps)])
            for j, t in enumerate(t_grid):
                w.writerow([repr(float(t)), repr(float(exact[metric][j])),
                            *(repr(float(smooth[T][metric][j])) for T in temps)])
        paths.append(path)
    path = out / "toy_sigmoid_derivative.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_minus_t", *(f"T={T:g}" for T in temps)])
        for u in t_grid:
            w.writerow([repr(float(u)),
                        *(repr(float(sigmoid_indicator_grad(u, 0.0, T))) for T in temps)])
    paths.append(path)
    return paths
