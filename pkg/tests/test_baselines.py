import math

import numpy as np
import pytest

from exactdmo.baselines import (sigmoid_indicator, sigmoid_indicator_grad, train_baseline,
                                wce_loss_and_grad)
from exactdmo.dataio import gen_gauss2d, gen_toy1d
from exactdmo.metrics import TaskSpec
from exactdmo.solver import SolverConfig, regularizer_value_and_grad
from exactdmo.toy import exact_curves, smooth_curves

from conftest import make_data


def test_sigmoid_midpoint_and_value():
    for T in (0.1, 1.0, 37.0):
        assert sigmoid_indicator(0.3, 0.3, T) == 0.5
    assert sigmoid_indicator(0.5, 0.0, 10.0) == pytest.approx(0.9933071, abs=1e-7)
    assert sigmoid_indicator(0.5, 0.0, 10.0) == pytest.approx(1 / (1 + math.exp(-5)), rel=1e-15)


def test_sigmoid_hard_limit():
    assert abs(sigmoid_indicator(0.6, 0.5, 1e4) - 1.0) <= 1e-8
    assert abs(sigmoid_indicator(0.4, 0.5, 1e4)) <= 1e-8


def test_sigmoid_small_gradient_away_from_threshold():
    g = sigmoid_indicator_grad(0.5, 0.0, 10.0)
    assert g == pytest.approx(0.0665, abs=1e-4) and g <= 0.07
    assert sigmoid_indicator_grad(-0.5, 0.0, 10.0) == pytest.approx(g, rel=1e-12)


@pytest.mark.parametrize("T", [0.0, -1.0])
def test_sigmoid_rejects_nonpositive_temperature(T):
    with pytest.raises(ValueError):
        sigmoid_indicator(0.1, 0.0, T)


def test_wce_examples():
    d = make_data([1, 0])
    v, g = wce_loss_and_grad(np.array([0.9, 0.1]), d)
    assert v == pytest.approx(-math.log(0.9), abs=1e-12)
    assert v == pytest.approx(0.10536, abs=1e-5)
    psi, _, _ = regularizer_value_and_grad(np.array([0.9, 0.1]), np.array([1.0, 0.0]), d)
    assert v == -psi
    v0, _ = wce_loss_and_grad(np.array([1 - 1e-12, 1e-12]), d)
    assert v0 < 1e-6


def test_wce_gradient_fd():
    d = make_data([1, 0, 0, 1, 0])
    f = np.array([0.3, 0.6, 0.2, 0.8, 0.45])
    _, g = wce_loss_and_grad(f, d)
    h = 1e-6
    for i in range(5):
        e = np.zeros(5)
        e[i] = h
        fd = (wce_loss_and_grad(f + e, d)[0] - wce_loss_and_grad(f - e, d)[0]) / (2 * h)
        assert g[i] == pytest.approx(fd, rel=1e-6)


def test_wce_separable_f1_after_ta():
    d = gen_gauss2d(600, 8.0, 0.1, 0)
    cfg = SolverConfig(lr_theta=0.05, inner_max_iters=2000, inner_patience=100)
    r = train_baseline(d, "WCE", TaskSpec.ofbs(), cfg)
    assert r.method == "WCE"
    assert r.train_after.f_beta == 1.0


def test_ss_ep_deterministic_and_reports_exact_metrics():
    d = gen_toy1d(150, 1)
    cfg = SolverConfig(K=4, inner_max_iters=300, inner_patience=30, lr_theta=1e-2, lr_t=1e-2,
                       temperature=2.0, seed=3)
    a = train_baseline(d, "ss-ep", TaskSpec.fpor(0.8), cfg)
    b = train_baseline(d, "SS_EP", TaskSpec.fpor(0.8), cfg)
    assert a.method == "SS_EP" and a.trace == b.trace
    np.testing.assert_array_equal(a.params.flat(), b.params.flat())
    before, after = a.evaluate(d)
    assert before.to_dict() == a.train_before.to_dict()
    assert after.to_dict() == a.train_after.to_dict()


def test_unknown_baseline():
    with pytest.raises(ValueError, match="unknown baseline"):
        train_baseline(gen_toy1d(50, 0), "SVM", TaskSpec.ofbs())


def test_surrogate_gap_shrinks_with_temperature():
    d = gen_toy1d(500, 0)
    x = d.features[:, 0]
    ex = exact_curves(x, d)
    live = ex["predicts_any"]
    gaps = []
    for T in (1.0, 2.0, 10.0, 100.0):
        sm = smooth_curves(x, d, T)
        gaps.append(max(np.max(np.abs(sm["precision"] - ex["precision"])[live]),
                        np.max(np.abs(sm["recall"] - ex["recall"]))))
    assert all(b <= a for a, b in zip(gaps, gaps[1:])), gaps


def test_low_temperature_feasible_point_misreports_precision():
    d = gen_toy1d(500, 0)
    x = d.features[:, 0]
    ex = exact_curves(x, d)
    for T in (1.0, 2.0):
        sm = smooth_curves(x, d, T)
        worst = 0.0
        for alpha in (0.3, 0.4, 0.5, 0.6, 0.7):
            ok = np.flatnonzero(sm["precision"] >= alpha)
            if ok.size:
                j = ok[0]
                worst = max(worst, abs(sm["precision"][j] - ex["precision"][j]))
        assert worst >= 0.05, T
