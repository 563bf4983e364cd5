"""Property suites run by ``exactdmo verify`` and by the acceptance tests."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .dataio import Dataset, make_rng
from .metrics import TaskSpec
from .model import backward_scores, forward_scores, init_params
from .oracle import (SINGULAR_EPS, level_set_check, oracle_feasibility_equivalence,
                     oracle_global_equivalence_fixed_theta)
from .reform import (LiftedState, h_subgradient, h_value, phi_constraint, phi_objective,
                     round_lifted)
from .solver import penalty_value_and_grad

SUITES = ("lemma", "gradients", "oracle")


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    seconds: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3g} (limit {self.limit:.3g}, {self.seconds:.2f}s) {self.detail}".rstrip()


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


# --- lemma suite ---------------------------------------------------------------------

def check_level_sets(n: int = 101) -> CheckResult:
    rep, sec = _timed(lambda: level_set_check(n))
    return CheckResult("level sets of H_t vs G_t", rep.passed, rep.details["mismatches"], 0, sec,
                       f"{rep.n_checked} grid points")


def nonzero_da_fraction(t: float, n_samples: int = 200_000, seed: int = 0) -> float:
    """Monte-Carlo measure of {(a, s) in [0,1]^2 : dH/da != 0}."""
    rng = make_rng(seed)
    a, s = rng.random(n_samples), rng.random(n_samples)
    da, _, _ = h_subgradient(a, s, t)
    return float(np.mean(da != 0))


def check_measure_bound(n_t: int = 101, n_samples: int = 200_000, seed: int = 0) -> CheckResult:
    def run():
        return min(nonzero_da_fraction(t, n_samples, seed) for t in np.linspace(0, 1, n_t))

    worst, sec = _timed(run)
    return CheckResult("measure of nonzero dH/da", worst >= 0.49, worst, 0.49, sec,
                       f"min over {n_t} thresholds")


def check_monotone_heads(n_trials: int = 500, seed: int = 1) -> CheckResult:
    rng = make_rng(seed)
    bad = 0

    def run():
        nonlocal bad
        for _ in range(n_trials):
            n = int(rng.integers(2, 12))
            y = rng.integers(0, 2, n)
            y[0], y[1] = 1, 0
            data = Dataset.from_arrays(np.zeros((n, 1)), y)
            s = rng.random(n)
            i = int(rng.integers(n))
            s2 = s.copy()
            s2[i] = min(1.0, s[i] + rng.random())
            for task in (TaskSpec.fpor(0.5), TaskSpec.frop(0.5), TaskSpec.ofbs(rng.uniform(0.2, 3))):
                d = phi_objective(s2, data, task) - phi_objective(s, data, task)
                sign = 1 if y[i] == 1 else -1
                bad += sign * d < -1e-12
        return bad

    _, sec = _timed(run)
    return CheckResult("monotonicity of metric heads", bad == 0, bad, 0, sec)


def check_rounding_dominance(n_trials: int = 500, seed: int = 2) -> CheckResult:
    """Relaxed-feasible (s, t) never beats its rounding in objective or constraint."""
    rng = make_rng(seed)
    bad = 0

    def run():
        nonlocal bad
        for _ in range(n_trials):
            n = int(rng.integers(2, 12))
            y = rng.integers(0, 2, n)
            y[0], y[1] = 1, 0
            data = Dataset.from_arrays(np.zeros((n, 1)), y)
            f = rng.random(n)
            t = float(rng.random())
            r = round_lifted(f, t)
            # sample s inside the relaxed region: s <= r on P, s >= r on N
            u = rng.random(n)
            s = np.where(y == 1, r * u, r + (1 - r) * u)
            for task in (TaskSpec.fpor(0.5), TaskSpec.frop(0.5), TaskSpec.ofbs(1.0)):
                bad += phi_objective(r, data, task) < phi_objective(s, data, task) - 1e-12
                bad += phi_constraint(r, data, task) > phi_constraint(s, data, task) + 1e-12
        return bad

    _, sec = _timed(run)
    return CheckResult("rounding dominance", bad == 0, bad, 0, sec)


# --- gradient suite ------------------------------------------------------------------

def check_h_subgradient(n_points: int = 10_000, step: float = 1e-6, seed: int = 3) -> CheckResult:
    def run():
        rng = make_rng(seed)
        a, s, t = rng.random(n_points * 3), rng.random(n_points * 3), rng.random(n_points * 3)
        z = a + s - t
        keep = (np.abs(z) > 1e-3) & (np.abs(z - 1) > 1e-3)
        a, s, t = a[keep][:n_points], s[keep][:n_points], t[keep][:n_points]
        da, ds, dt = h_subgradient(a, s, t)
        fd_a = (h_value(a + step, s, t) - h_value(a - step, s, t)) / (2 * step)
        fd_s = (h_value(a, s + step, t) - h_value(a, s - step, t)) / (2 * step)
        fd_t = (h_value(a, s, t + step) - h_value(a, s, t - step)) / (2 * step)
        return max(np.abs(da - fd_a).max(), np.abs(ds - fd_s).max(), np.abs(dt - fd_t).max())

    err, sec = _timed(run)
    return CheckResult("H subgradient vs finite differences", err <= 1e-6, err, 1e-6, sec,
                       f"{n_points} points")


def _random_penalty_instance(rng, arch="mlp:8"):
    """Random instance whose point is > 1e-3 away from every kink of the penalty."""
    while True:
        n = int(rng.integers(4, 21))
        d = int(rng.integers(1, 5))
        X = rng.standard_normal((n, d))
        y = rng.integers(0, 2, n)
        y[0], y[1] = 1, 0
        data = Dataset.from_arrays(X, y)
        params = init_params(arch, d, int(rng.integers(2**31)))
        kind = ("FPOR", "FROP", "OFBS")[int(rng.integers(3))]
        task = TaskSpec(kind, beta=float(rng.uniform(0.5, 2))) if kind == "OFBS" else \
            TaskSpec(kind, alpha=float(rng.uniform(0.2, 0.9)))
        lifted = LiftedState(rng.uniform(0.02, 0.98, n), float(rng.uniform(0.2, 0.8)))
        f = forward_scores(params, X)
        z = f + lifted.s - lifted.t
        eta = np.where(y == 1, 1.0, -1.0) * h_value(f, lifted.s, lifted.t)
        con = phi_constraint(lifted.s, data, task)
        if (np.min(np.abs(z)) > 1e-3 and np.min(np.abs(z - 1)) > 1e-3
                and np.min(np.abs(eta)) > 1e-3 and (not task.constrained or abs(con) > 1e-3)):
            lam = float(rng.uniform(1, 100))
            gamma = float(rng.uniform(0, 5))
            return params, lifted, data, task, lam, gamma


def penalty_fd_error(params, lifted, data, task, lam, gamma, step=1e-5) -> float:
    """Norm-wise relative error of the analytic penalty gradient against central differences."""
    ev = penalty_value_and_grad(params, lifted, data, task, lam, gamma)
    theta = params.flat()
    p, n = theta.size, data.n
    z0 = np.concatenate([theta, lifted.s, [lifted.t]])
    g = np.concatenate([ev.grad_theta, ev.grad_s, [ev.grad_t]])

    def value(z):
        return penalty_value_and_grad(params.with_flat(z[:p]), LiftedState(z[p:p + n], z[-1]),
                                      data, task, lam, gamma).value

    fd = np.empty_like(z0)
    for j in range(z0.size):
        e = np.zeros_like(z0)
        e[j] = step
        fd[j] = (value(z0 + e) - value(z0 - e)) / (2 * step)
    return float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12))


def check_penalty_gradient(n_instances: int = 50, seed: int = 4, arch="mlp:8") -> CheckResult:
    def run():
        rng = make_rng(seed)
        return max(penalty_fd_error(*_random_penalty_instance(rng, arch))
                   for _ in range(n_instances))

    err, sec = _timed(run)
    return CheckResult("penalty gradient vs finite differences", err <= 1e-4, err, 1e-4, sec,
                       f"{n_instances} instances, {arch}")


def check_backprop(n_instances: int = 30, seed: int = 5, step: float = 1e-6) -> CheckResult:
    def run():
        rng = make_rng(seed)
        worst = 0.0
        for _ in range(n_instances):
            n, d = int(rng.integers(1, 21)), int(rng.integers(1, 6))
            arch = ("linear", "mlp:8", "mlp:4,3")[int(rng.integers(3))]
            params = init_params(arch, d, int(rng.integers(2**31)))
            X = rng.standard_normal((n, d))
            up = rng.standard_normal(n)
            g = backward_scores(params, X, up)
            theta = params.flat()
            fd = np.empty_like(theta)
            for j in range(theta.size):
                e = np.zeros_like(theta)
                e[j] = step
                fp = forward_scores(params.with_flat(theta + e), X) @ up
                fm = forward_scores(params.with_flat(theta - e), X) @ up
                fd[j] = (fp - fm) / (2 * step)
            worst = max(worst, np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12))
        return worst

    err, sec = _timed(run)
    return CheckResult("model backprop vs finite differences", err <= 1e-5, err, 1e-5, sec)


# --- oracle suite --------------------------------------------------------------------

T_GRID = np.linspace(0.025, 0.975, 21)


def random_oracle_instance(rng, n_max: int = 10):
    """A small fixed-theta instance whose scores avoid every grid threshold."""
    while True:
        n = int(rng.integers(3, n_max + 1))
        X = rng.standard_normal((n, 2))
        y = rng.integers(0, 2, n)
        y[int(rng.integers(n))] = 1
        params = init_params("linear", 2, int(rng.integers(2**31)))
        params = params.with_flat(params.flat() * rng.uniform(0.5, 4.0))
        f = forward_scores(params, X)
        if np.min(np.abs(f[:, None] - T_GRID[None, :])) <= SINGULAR_EPS:
            continue
        kind = ("FPOR", "FROP", "OFBS")[int(rng.integers(3))]
        if kind == "OFBS":
            task = TaskSpec.ofbs(float(rng.choice([0.5, 1.0, 2.0])))
        else:
            task = TaskSpec(kind, alpha=float(rng.choice([0.0, 0.25, 0.5, 0.6, 0.8, 1.0])))
        data = Dataset.from_arrays(X, y, allow_single_class=True)
        return params, data, task


def check_oracle(n_instances: int = 200, seed: int = 6) -> CheckResult:
    failures = []

    def run():
        rng = make_rng(seed)
        for i in range(n_instances):
            params, data, task = random_oracle_instance(rng)
            rep = oracle_global_equivalence_fixed_theta(params, data, task, T_GRID)
            if not rep.passed:
                failures.append((i, rep.to_json()))
            for t in T_GRID:
                rep = oracle_feasibility_equivalence(params, float(t), data, task)
                if not rep.passed:
                    failures.append((i, rep.to_json()))
        return len(failures)

    n_bad, sec = _timed(run)
    detail = f"{n_instances} instances x {len(T_GRID)} thresholds"
    if failures:
        detail += f"; first: {failures[0][1]}"
    return CheckResult("fixed-theta oracle equivalences", n_bad == 0, n_bad, 0, sec, detail)


def run_suite(name: str) -> list[CheckResult]:
    if name == "lemma":
        return [check_level_sets(), check_measure_bound(), check_monotone_heads(),
                check_rounding_dominance()]
    if name == "gradients":
        return [check_h_subgradient(), check_penalty_gradient(), check_backprop()]
    if name == "oracle":
        return [check_oracle()]
    if name == "all":
        return [r for s in SUITES for r in run_suite(s)]
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITES + ('all',)}")
