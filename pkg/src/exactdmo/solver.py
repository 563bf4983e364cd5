"""Exact l1 penalty method on the lifted reformulation.

Minimizes, for an increasing penalty sequence lambda_k = lambda0 * rho**k,

    F = -phi_obj(s) - gamma * psi(theta, s)
        + lambda * ([phi_con(s)]_+ + sum_i [eta_i(theta, s, t)]_+)

over (theta, s in [0,1]^N, t in [0,1]) with full-batch projected ADAM.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, NamedTuple

import numpy as np

from .dataio import Dataset, make_rng, spawn_seeds
from .metrics import (FEAS_SLACK, ZERO_PREDICTION_PRECISION, MetricsReport, TaskSpec,
                      metrics_at_threshold, threshold_adjust)
from .model import ModelParams, forward_scores, init_params, scores_and_vjp
from .reform import (LiftedState, eta_residuals, h_subgradient, h_value, phi_constraint,
                     phi_constraint_grad, phi_objective, phi_objective_grad, round_lifted)

log = logging.getLogger(__name__)

SCORE_CLAMP = 1e-7


class SolverDivergence(RuntimeError):
    """The penalty value became non-finite."""


@dataclass
class SolverConfig:
    lambda0: float = 100.0
    rho: float = 1.3
    K: int = 50
    gamma0: float = 0.5
    inner_max_iters: int = 30000
    inner_patience: int = 10
    lr_theta: float = 1e-4
    lr_s: float = 0.1
    lr_t: float = 0.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    nonsingular_eps: float = 1e-6
    # used by the baselines only
    temperature: float = 10.0
    cosine: bool = False

    def __post_init__(self):
        if not self.rho > 1:
            raise ValueError("rho must exceed 1")
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if min(self.lr_theta, self.lr_s, self.lr_t) < 0:
            raise ValueError("learning rates must be nonnegative")
        if self.gamma0 < 0:
            raise ValueError("gamma0 must be nonnegative")
        if self.inner_max_iters < 1 or self.inner_patience < 1:
            raise ValueError("inner_max_iters and inner_patience must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")

    def lam(self, k: int) -> float:
        return self.lambda0 * self.rho ** k

    def gamma(self, k: int) -> float:
        return self.gamma0 * self.rho ** k

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "SolverConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown solver config keys: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def from_json_file(cls, path) -> "SolverConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TrainResult:
    method: str
    task: TaskSpec
    config: SolverConfig
    params: ModelParams
    lifted: LiftedState
    train_before: MetricsReport
    train_after: MetricsReport
    trace: list[dict] = field(default_factory=list)
    best_k: int = -1
    min_margin: float = float("nan")
    s_consistency: float = float("nan")
    warnings: list[str] = field(default_factory=list)

    @property
    def adjusted_threshold(self) -> float:
        return self.train_after.threshold

    def scores(self, data: Dataset) -> np.ndarray:
        return forward_scores(self.params, data.features)

    def evaluate(self, data: Dataset) -> tuple[MetricsReport, MetricsReport]:
        """Metrics on ``data`` at the trained threshold and at the train-adjusted one."""
        f = self.scores(data)
        return (metrics_at_threshold(f, data, self.lifted.t, self.task),
                metrics_at_threshold(f, data, self.adjusted_threshold, self.task))

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "task": self.task.to_dict(),
            "config": self.config.to_dict(),
            "conventions": {
                "prediction_rule": "score > t",
                "zero_prediction_precision": ZERO_PREDICTION_PRECISION,
                "feasibility_slack": FEAS_SLACK,
                "kink_subgradient": "omega=1 on both kink lines",
            },
            "best_k": self.best_k,
            "min_margin": self.min_margin,
            "s_consistency": self.s_consistency,
            "warnings": list(self.warnings),
            "train": {"before_ta": self.train_before.to_dict(),
                      "after_ta": self.train_after.to_dict()},
            "params": self.params.to_dict(),
            "lifted": {"t": self.lifted.t, "s": np.asarray(self.lifted.s).tolist()},
            "trace": self.trace,
        }


TRACE_COLUMNS = ("k", "lambda", "gamma", "penalty", "phi_obj", "phi_con",
                 "max_eta_violation", "precision", "recall", "f_beta")


def class_weights(data: Dataset) -> np.ndarray:
    """Inverse class frequency: 1/N+ on positives, 1/N- on negatives."""
    w = np.empty(data.n)
    w[data.pos_idx] = 1.0 / data.n_pos if data.n_pos else 0.0
    w[data.neg_idx] = 1.0 / data.n_neg if data.n_neg else 0.0
    return w


def regularizer_value_and_grad(scores, s, data: Dataset):
    """psi = (1/N) sum_i w_i (s_i log f_i + (1 - s_i) log(1 - f_i)), scores clamped.

    Returns ``(psi, dpsi/dscores, dpsi/ds)``; the score gradient is that of the
    clamped expression, so it vanishes where clamping is active.
    """
    f_raw = np.asarray(scores, dtype=float)
    s = np.asarray(s, dtype=float)
    f = np.clip(f_raw, SCORE_CLAMP, 1.0 - SCORE_CLAMP)
    w = class_weights(data) / data.n
    lf, l1f = np.log(f), np.log1p(-f)
    value = float(np.sum(w * (s * lf + (1.0 - s) * l1f)))
    inside = (f_raw > SCORE_CLAMP) & (f_raw < 1.0 - SCORE_CLAMP)
    d_scores = w * (s / f - (1.0 - s) / (1.0 - f)) * inside
    d_s = w * (lf - l1f)
    return value, d_scores, d_s


class PenaltyEval(NamedTuple):
    value: float
    grad_theta: np.ndarray
    grad_s: np.ndarray
    grad_t: float
    phi_obj: float
    phi_con: float
    max_eta: float
    psi: float


def penalty_value_and_grad(params: ModelParams, lifted: LiftedState, data: Dataset,
                           task: TaskSpec, lam: float, gamma: float) -> PenaltyEval:
    scores, vjp = scores_and_vjp(params, data.features)
    s, t = np.asarray(lifted.s, dtype=float), float(lifted.t)
    sign = np.where(data.labels == 1, 1.0, -1.0)

    obj = phi_objective(s, data, task)
    con = phi_constraint(s, data, task)
    eta = sign * h_value(scores, s, t)
    psi, dpsi_f, dpsi_s = regularizer_value_and_grad(scores, s, data)

    pos_eta = eta > 0
    value = -obj - gamma * psi + lam * (max(con, 0.0) + float(np.sum(eta[pos_eta])))

    da, ds, dt = h_subgradient(scores, s, t)
    active = sign * pos_eta
    g_scores = lam * active * da - gamma * dpsi_f
    g_s = (-phi_objective_grad(s, data, task) - gamma * dpsi_s + lam * active * ds)
    if con > 0:
        g_s = g_s + lam * phi_constraint_grad(s, data, task)
    g_t = lam * float(np.sum(active * dt))
    return PenaltyEval(value, vjp(g_scores), g_s, g_t, obj, con,
                       float(eta.max(initial=-np.inf)), psi)


class Adam:
    """Full-batch ADAM with a per-coordinate learning rate vector."""

    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = np.asarray(lr, dtype=float)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = np.zeros_like(self.lr)
        self.v = np.zeros_like(self.lr)
        self.k = 0

    def step(self, z, grad, scale=1.0):
        self.k += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        mhat = self.m / (1 - self.beta1 ** self.k)
        vhat = self.v / (1 - self.beta2 ** self.k)
        return z - scale * self.lr * mhat / (np.sqrt(vhat) + self.eps)


def adam_minimize(fun: Callable[[np.ndarray], tuple[float, np.ndarray]], z0, lr,
                  cfg: SolverConfig, lower=None, upper=None, history=None):
    """Projected ADAM with best-iterate tracking and a patience stopping rule.

    Stops after ``cfg.inner_max_iters`` evaluations, or once the best value has
    not improved for ``cfg.inner_patience`` consecutive evaluations. Returns
    ``(best_z, best_value, n_evals)``.
    """
    opt = Adam(lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    z = np.array(z0, dtype=float)
    best_z, best_val, stall, it = z.copy(), math.inf, 0, 0
    for it in range(1, cfg.inner_max_iters + 1):
        val, grad = fun(z)
        if not math.isfinite(val) or not np.all(np.isfinite(grad)):
            raise SolverDivergence(f"non-finite penalty value at inner iteration {it}")
        if val < best_val:
            best_z, best_val, stall = z.copy(), val, 0
        else:
            stall += 1
        if history is not None:
            history.append(best_val)
        if stall >= cfg.inner_patience or it == cfg.inner_max_iters:
            break
        scale = 0.5 * (1 + math.cos(math.pi * it / cfg.inner_max_iters)) if cfg.cosine else 1.0
        z = opt.step(z, grad, scale)
        if lower is not None:
            z = np.clip(z, lower, upper)
    return best_z, best_val, it


def _pack(params: ModelParams, lifted: LiftedState) -> np.ndarray:
    return np.concatenate([params.flat(), np.asarray(lifted.s, dtype=float), [lifted.t]])


def solve_subproblem(params: ModelParams, lifted: LiftedState, data: Dataset, task: TaskSpec,
                     lam: float, gamma: float, cfg: SolverConfig, history=None):
    """Approximately minimize F(., lam) from the given start; returns (params, lifted, n_evals)."""
    p = params.size
    n = data.n

    def fun(z):
        ev = penalty_value_and_grad(params.with_flat(z[:p]), LiftedState(z[p:p + n], z[-1]),
                                    data, task, lam, gamma)
        return ev.value, np.concatenate([ev.grad_theta, ev.grad_s, [ev.grad_t]])

    lr = np.concatenate([np.full(p, cfg.lr_theta), np.full(n, cfg.lr_s), [cfg.lr_t]])
    lower = np.concatenate([np.full(p, -np.inf), np.zeros(n + 1)])
    upper = np.concatenate([np.full(p, np.inf), np.ones(n + 1)])
    z, _, n_evals = adam_minimize(fun, _pack(params, lifted), lr, cfg, lower, upper, history)
    return params.with_flat(z[:p]), LiftedState(z[p:p + n], float(z[-1])), n_evals


def selection_key(report: MetricsReport, task: TaskSpec) -> tuple:
    """Rank iterates: feasible first, then objective; infeasible ones by violation."""
    if report.feasible:
        return (1, report.objective(task))
    return (0, -report.violation(task))


def run_exact_penalty(data: Dataset, task: TaskSpec, cfg: SolverConfig | None = None,
                      arch="linear", callback=None) -> TrainResult:
    cfg = cfg or SolverConfig()
    if data.n_pos == 0 or data.n_neg == 0:
        raise ValueError("dataset must contain both classes")
    theta_seed, s_seed = spawn_seeds(cfg.seed, 2)
    params = init_params(arch, data.d, theta_seed)
    lifted = LiftedState(make_rng(s_seed).uniform(0.0, 1.0, data.n), 0.5)

    trace, best = [], None
    for k in range(cfg.K):
        lam, gamma = cfg.lam(k), cfg.gamma(k)
        params, lifted, n_evals = solve_subproblem(params, lifted, data, task, lam, gamma, cfg)
        ev = penalty_value_and_grad(params, lifted, data, task, lam, gamma)
        scores = forward_scores(params, data.features)
        rep = metrics_at_threshold(scores, data, lifted.t, task)
        row = {"k": k, "lambda": lam, "gamma": gamma, "penalty": ev.value,
               "phi_obj": ev.phi_obj, "phi_con": ev.phi_con,
               "max_eta_violation": max(ev.max_eta, 0.0), "precision": rep.precision,
               "recall": rep.recall, "f_beta": rep.f_beta, "inner_iters": n_evals,
               "feasible": rep.feasible}
        trace.append(row)
        log.debug("outer %d: %s", k, row)
        if callback is not None:
            callback(row)
        key = selection_key(rep, task)
        if best is None or key >= best[0]:
            best = (key, k, params.copy(), lifted.copy(), rep)

    _, best_k, params, lifted, before = best
    return finish_result("ERO", task, cfg, params, lifted, data, before, trace, best_k)


def finish_result(method, task, cfg, params, lifted, data, before, trace, best_k) -> TrainResult:
    scores = forward_scores(params, data.features)
    _, after = threshold_adjust(scores, data, task)
    margin = float(np.min(np.abs(scores - lifted.t)))
    notes = []
    if not margin > cfg.nonsingular_eps:
        msg = f"selected point is singular: min |f - t| = {margin:.3g} <= {cfg.nonsingular_eps:g}"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    s_cons = float(np.mean(np.round(lifted.s) == round_lifted(scores, lifted.t)))
    return TrainResult(method, task, cfg, params, lifted, before, after, trace, best_k,
                       margin, s_cons, notes)


def eta_violation(params: ModelParams, lifted: LiftedState, data: Dataset) -> float:
    """max_i [eta_i]_+ at the given point."""
    eta = eta_residuals(forward_scores(params, data.features), lifted, data)
    return float(max(eta.max(), 0.0))
