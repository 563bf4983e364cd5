"""Exact indicator-based precision, recall and F-beta, plus threshold adjustment."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dataio import Dataset

FEAS_SLACK = 1e-9

# Precision when nothing is predicted positive (tp + fp = 0).
ZERO_PREDICTION_PRECISION = 0.0

KINDS = ("FPOR", "FROP", "OFBS")


@dataclass(frozen=True)
class TaskSpec:
    """Which problem to solve: FPOR/FROP with target ``alpha``, or OFBS with ``beta``."""

    kind: str
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}")
        if kind == "OFBS":
            if self.alpha is not None:
                raise ValueError("OFBS takes beta, not alpha")
            beta = 1.0 if self.beta is None else float(self.beta)
            if beta <= 0:
                raise ValueError("beta must be positive")
            object.__setattr__(self, "beta", beta)
        else:
            if self.beta is not None:
                raise ValueError(f"{kind} takes alpha, not beta")
            if self.alpha is None or not 0.0 <= self.alpha <= 1.0:
                raise ValueError("alpha must lie in [0, 1]")
            object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def fpor(cls, alpha: float) -> "TaskSpec":
        return cls("FPOR", alpha=alpha)

    @classmethod
    def frop(cls, alpha: float) -> "TaskSpec":
        return cls("FROP", alpha=alpha)

    @classmethod
    def ofbs(cls, beta: float = 1.0) -> "TaskSpec":
        return cls("OFBS", beta=beta)

    @property
    def constrained(self) -> bool:
        return self.kind != "OFBS"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f_beta: float
    tp: int
    fp: int
    fn: int
    tn: int
    threshold: float
    feasible: bool
    degenerate: bool = False

    JSON_FIELDS = ("precision", "recall", "f_beta", "tp", "fp", "fn", "tn",
                   "threshold", "feasible")

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in self.JSON_FIELDS}

    def objective(self, task: TaskSpec) -> float:
        return {"FPOR": self.recall, "FROP": self.precision, "OFBS": self.f_beta}[task.kind]

    def constraint(self, task: TaskSpec) -> float | None:
        return {"FPOR": self.precision, "FROP": self.recall, "OFBS": None}[task.kind]

    def violation(self, task: TaskSpec) -> float:
        if not task.constrained:
            return 0.0
        return max(0.0, task.alpha - self.constraint(task))


def fbeta_from_pr(p: float, r: float, beta: float = 1.0) -> float:
    b2 = beta * beta
    den = b2 * p + r
    if den == 0:
        return 0.0
    return (1.0 + b2) * p * r / den


def _counts(scores, labels, t):
    pred = scores > t
    pos = labels == 1
    tp = int(np.count_nonzero(pred & pos))
    fp = int(np.count_nonzero(pred & ~pos))
    fn = int(np.count_nonzero(~pred & pos))
    tn = int(np.count_nonzero(~pred & ~pos))
    return tp, fp, fn, tn


def _is_feasible(precision, recall, task):
    if task.kind == "FPOR":
        return precision >= task.alpha - FEAS_SLACK
    if task.kind == "FROP":
        return recall >= task.alpha - FEAS_SLACK
    return True


def metrics_at_threshold(scores, data: Dataset, t: float, task: TaskSpec,
                         beta: float | None = None) -> MetricsReport:
    """Metrics of the classifier ``1{score > t}`` (strict inequality)."""
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (data.n,):
        raise ValueError(f"expected {data.n} scores, got shape {scores.shape}")
    if beta is None:
        beta = task.beta if task.kind == "OFBS" else 1.0
    tp, fp, fn, tn = _counts(scores, data.labels, t)
    degenerate = tp + fp == 0
    precision = ZERO_PREDICTION_PRECISION if degenerate else tp / (tp + fp)
    recall = tp / (tp + fn) if tp + fn else 0.0
    return MetricsReport(
        precision=precision,
        recall=recall,
        f_beta=fbeta_from_pr(precision, recall, beta),
        tp=tp, fp=fp, fn=fn, tn=tn,
        threshold=float(t),
        feasible=bool(_is_feasible(precision, recall, task)),
        degenerate=degenerate,
    )


def candidate_thresholds(scores) -> np.ndarray:
    """Thresholds reaching every distinct prediction pattern of ``1{score > t}``.

    Midpoints of consecutive unique scores, one threshold below all scores
    (0 when scores are positive) and one at or above all scores (1 when scores
    are at most 1). Sorted ascending.
    """
    u = np.unique(np.asarray(scores, dtype=float))
    lo = 0.0 if u[0] > 0 else u[0] - 1.0
    hi = 1.0 if u[-1] <= 1 else u[-1]
    return np.concatenate([[lo], (u[:-1] + u[1:]) / 2.0, [hi]])


def threshold_adjust(scores, data: Dataset, task: TaskSpec) -> tuple[float, MetricsReport]:
    """Pick the training-set threshold that is feasible with the best objective.

    Ties go to the smaller threshold. For FPOR/FROP with no feasible candidate,
    the least-violating one is returned (its report has ``feasible=False``).
    """
    scores = np.asarray(scores, dtype=float)
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    cands = candidate_thresholds(scores)
    pos_sorted = np.sort(scores[data.pos_idx])
    neg_sorted = np.sort(scores[data.neg_idx])
    tp = data.n_pos - np.searchsorted(pos_sorted, cands, side="right")
    fp = data.n_neg - np.searchsorted(neg_sorted, cands, side="right")
    npred = tp + fp
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(npred > 0, tp / np.maximum(npred, 1), ZERO_PREDICTION_PRECISION)
    rec = tp / data.n_pos if data.n_pos else np.zeros_like(prec)

    if task.kind == "OFBS":
        b2 = task.beta ** 2
        den = b2 * prec + rec
        fb = np.where(den > 0, (1 + b2) * prec * rec / np.where(den > 0, den, 1.0), 0.0)
        best = int(np.argmax(fb))
    else:
        obj, con = (rec, prec) if task.kind == "FPOR" else (prec, rec)
        feas = con >= task.alpha - FEAS_SLACK
        if feas.any():
            masked = np.where(feas, obj, -np.inf)
            best = int(np.argmax(masked))
        else:
            best = int(np.argmin(task.alpha - con))
    t = float(cands[best])
    return t, metrics_at_threshold(scores, data, t, task)
