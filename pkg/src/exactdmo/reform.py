"""Lifted reformulation of the indicator constraints.

The indicator relation ``s = 1{a > t}`` is encoded by the continuous
piecewise-linear function

    H_t(a, s) = s + [s + a - 1 - t]_+ - [s + a - t]_+

whose zero set coincides with that of ``s - 1{a > t}`` off the line a = t, and
whose sign matches the sign of ``s - 1{a > t}`` for s in [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import Dataset
from .metrics import TaskSpec


@dataclass
class LiftedState:
    """Auxiliary scores ``s`` in [0, 1]^N and decision threshold ``t`` in [0, 1]."""

    s: np.ndarray
    t: float = 0.5

    def project(self) -> "LiftedState":
        return LiftedState(np.clip(self.s, 0.0, 1.0), float(np.clip(self.t, 0.0, 1.0)))

    def copy(self) -> "LiftedState":
        return LiftedState(np.array(self.s, dtype=float), float(self.t))


def h_value(a, s, t):
    """H_t(a, s); broadcasts over array arguments."""
    z = np.add(s, a) - t
    return s + np.maximum(z - 1.0, 0.0) - np.maximum(z, 0.0)


def h_subgradient(a, s, t):
    """One element ``(dH/da, dH/ds, dH/dt)`` of the Clarke subdifferential of H_t.

    On both kink lines (s + a = t and s + a = 1 + t) the element (0, 1) is
    returned. dH/dt = -dH/da because H depends on a and t only through a - t.
    """
    z = np.add(s, a) - t
    upper = (z >= 1.0).astype(float)
    lower = (z > 0.0).astype(float)
    da = upper - lower
    ds = 1.0 + da
    return da, ds, -da


def _label_sign(data: Dataset) -> np.ndarray:
    return np.where(data.labels == 1, 1.0, -1.0)


def eta_residuals(scores, lifted: LiftedState, data: Dataset) -> np.ndarray:
    """Per-sample residuals; feasibility of the relaxed lifted problem is ``eta <= 0``.

    ``eta_i = H_t(f_i, s_i)`` for positives and ``-H_t(f_i, s_i)`` for negatives.
    """
    scores = np.asarray(scores, dtype=float)
    s = np.asarray(lifted.s, dtype=float)
    if scores.shape != (data.n,) or s.shape != (data.n,):
        raise ValueError("scores, s and dataset must have matching length")
    return _label_sign(data) * h_value(scores, s, lifted.t)


def _sums(s, data):
    s = np.asarray(s, dtype=float)
    return float(np.sum(s[data.pos_idx])), float(np.sum(s))


def phi_recall(s, data: Dataset) -> float:
    sp, _ = _sums(s, data)
    return sp / data.n_pos


def phi_precision(s, data: Dataset) -> float:
    """Sum over positives / sum over all; 0 when the denominator vanishes."""
    sp, sa = _sums(s, data)
    return sp / sa if sa > 0 else 0.0


def phi_fbeta(s, data: Dataset, beta: float = 1.0) -> float:
    sp, sa = _sums(s, data)
    b2 = beta * beta
    den = b2 * data.n_pos + sa
    return (1.0 + b2) * sp / den if den > 0 else 0.0


def phi_objective(s, data: Dataset, task: TaskSpec) -> float:
    if task.kind == "FPOR":
        return phi_recall(s, data)
    if task.kind == "FROP":
        return phi_precision(s, data)
    return phi_fbeta(s, data, task.beta)


def phi_objective_grad(s, data: Dataset, task: TaskSpec) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    is_pos = (data.labels == 1).astype(float)
    sp, sa = _sums(s, data)
    if task.kind == "FPOR":
        return is_pos / data.n_pos
    if task.kind == "FROP":
        if sa <= 0:
            return np.zeros_like(s)
        return (is_pos * sa - sp) / sa ** 2
    b2 = task.beta ** 2
    den = b2 * data.n_pos + sa
    return (1.0 + b2) * (is_pos * den - sp) / den ** 2


def phi_constraint(s, data: Dataset, task: TaskSpec) -> float:
    """Linearized metric constraint; feasible iff the value is <= 0.

    FPOR: alpha * sum_N s - (1 - alpha) * sum_P s.  FROP: alpha * N+ - sum_P s.
    OFBS has no metric constraint and returns 0.
    """
    sp, sa = _sums(s, data)
    if task.kind == "FPOR":
        return task.alpha * (sa - sp) - (1.0 - task.alpha) * sp
    if task.kind == "FROP":
        return task.alpha * data.n_pos - sp
    return 0.0


def phi_constraint_grad(s, data: Dataset, task: TaskSpec) -> np.ndarray:
    is_pos = data.labels == 1
    if task.kind == "FPOR":
        return np.where(is_pos, -(1.0 - task.alpha), task.alpha)
    if task.kind == "FROP":
        return np.where(is_pos, -1.0, 0.0)
    return np.zeros(data.n)


def phi_metric(s, data: Dataset, task: TaskSpec) -> float | None:
    """The constrained metric itself (precision for FPOR, recall for FROP) as a function of s."""
    if task.kind == "FPOR":
        return phi_precision(s, data)
    if task.kind == "FROP":
        return phi_recall(s, data)
    return None


def round_lifted(scores, t: float) -> np.ndarray:
    return (np.asarray(scores, dtype=float) > t).astype(float)
