"""Comparison methods: weighted cross-entropy, and the sigmoid-smoothed penalty method.

``SS_EP`` runs the same outer loop as the exact penalty solver, but the
indicators ``1{f_i > t}`` inside the metrics are replaced by
``sigmoid(T * (f_i - t))`` and there are no lifted variables.
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from .dataio import Dataset, spawn_seeds
from .metrics import TaskSpec, metrics_at_threshold
from .model import forward_scores, init_params, scores_and_vjp
from .reform import (LiftedState, phi_constraint, phi_constraint_grad, phi_objective,
                     phi_objective_grad)
from .solver import (SolverConfig, TrainResult, adam_minimize,
                     finish_result, regularizer_value_and_grad, selection_key)

METHODS = ("WCE", "SS_EP")


def sigmoid_indicator(x, t, T):
    """Smooth stand-in for 1{x > t}: 1 / (1 + exp(-T (x - t)))."""
    if not np.all(np.asarray(T) > 0):
        raise ValueError("temperature must be positive")
    return expit(np.multiply(T, np.subtract(x, t)))


def sigmoid_indicator_grad(x, t, T):
    """d/dx of sigmoid_indicator; the derivative in t is its negative."""
    sig = sigmoid_indicator(x, t, T)
    return T * sig * (1.0 - sig)


def wce_loss_and_grad(scores, data: Dataset):
    """Class-weighted cross-entropy; equals minus the logit regularizer at s = labels."""
    value, d_scores, _ = regularizer_value_and_grad(scores, data.labels.astype(float), data)
    return -value, -d_scores


def _wce_fun(params, data):
    p = params.size

    def fun(z):
        scores, vjp = scores_and_vjp(params.with_flat(z[:p]), data.features)
        value, d_scores = wce_loss_and_grad(scores, data)
        return value, vjp(d_scores)

    return fun


def train_wce(data: Dataset, task: TaskSpec, cfg: SolverConfig, arch="linear") -> TrainResult:
    theta_seed, _ = spawn_seeds(cfg.seed, 2)
    params = init_params(arch, data.d, theta_seed)
    z, value, n_evals = adam_minimize(_wce_fun(params, data), params.flat(),
                                      np.full(params.size, cfg.lr_theta), cfg)
    params = params.with_flat(z)
    lifted = LiftedState(np.clip(forward_scores(params, data.features), 0.0, 1.0), 0.5)
    before = metrics_at_threshold(forward_scores(params, data.features), data, 0.5, task)
    trace = [{"k": 0, "loss": value, "inner_iters": n_evals, "precision": before.precision,
              "recall": before.recall, "f_beta": before.f_beta, "feasible": before.feasible}]
    return finish_result("WCE", task, cfg, params, lifted, data, before, trace, 0)


def smoothed_penalty_value_and_grad(params, t, data: Dataset, task: TaskSpec, lam, T):
    """F = -phi_obj(sigma) + lam [phi_con(sigma)]_+ with sigma_i = sigmoid(T (f_i - t)).

    Returns ``(value, grad_theta, grad_t, phi_obj, phi_con)``.
    """
    scores, vjp = scores_and_vjp(params, data.features)
    sig = sigmoid_indicator(scores, t, T)
    obj = phi_objective(sig, data, task)
    con = phi_constraint(sig, data, task)
    g_sig = -phi_objective_grad(sig, data, task)
    if con > 0:
        g_sig = g_sig + lam * phi_constraint_grad(sig, data, task)
    g_scores = g_sig * T * sig * (1.0 - sig)
    value = -obj + lam * max(con, 0.0)
    return value, vjp(g_scores), -float(np.sum(g_scores)), obj, con


def train_ss_ep(data: Dataset, task: TaskSpec, cfg: SolverConfig, arch="linear",
                callback=None) -> TrainResult:
    theta_seed, _ = spawn_seeds(cfg.seed, 2)
    params = init_params(arch, data.d, theta_seed)
    p = params.size
    t = 0.5
    lr = np.concatenate([np.full(p, cfg.lr_theta), [cfg.lr_t]])
    lower = np.concatenate([np.full(p, -np.inf), [0.0]])
    upper = np.concatenate([np.full(p, np.inf), [1.0]])

    trace, best = [], None
    for k in range(cfg.K):
        lam = cfg.lam(k)

        def fun(z):
            value, g_theta, g_t, _, _ = smoothed_penalty_value_and_grad(
                params.with_flat(z[:p]), z[-1], data, task, lam, cfg.temperature)
            return value, np.concatenate([g_theta, [g_t]])

        z, _, n_evals = adam_minimize(fun, np.concatenate([params.flat(), [t]]), lr, cfg,
                                      lower, upper)
        params, t = params.with_flat(z[:p]), float(z[-1])
        value, _, _, obj, con = smoothed_penalty_value_and_grad(params, t, data, task, lam,
                                                                cfg.temperature)
        rep = metrics_at_threshold(forward_scores(params, data.features), data, t, task)
        row = {"k": k, "lambda": lam, "gamma": 0.0, "penalty": value, "phi_obj": obj,
               "phi_con": con, "max_eta_violation": 0.0, "precision": rep.precision,
               "recall": rep.recall, "f_beta": rep.f_beta, "inner_iters": n_evals,
               "feasible": rep.feasible}
        trace.append(row)
        if callback is not None:
            callback(row)
        key = selection_key(rep, task)
        if best is None or key >= best[0]:
            best = (key, k, params.copy(), t, rep)

    _, best_k, params, t, before = best
    scores = forward_scores(params, data.features)
    lifted = LiftedState(sigmoid_indicator(scores, t, cfg.temperature), t)
    return finish_result("SS_EP", task, cfg, params, lifted, data, before, trace, best_k)


def train_baseline(data: Dataset, method: str, task: TaskSpec, cfg: SolverConfig | None = None,
                   arch="linear", callback=None) -> TrainResult:
    cfg = cfg or SolverConfig()
    method = method.upper().replace("-", "_")
    if method == "WCE":
        return train_wce(data, task, cfg, arch)
    if method == "SS_EP":
        return train_ss_ep(data, task, cfg, arch, callback)
    raise ValueError(f"unknown baseline {method!r}; expected one of {METHODS}")
