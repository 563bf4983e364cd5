import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exactdmo.metrics import TaskSpec
from exactdmo.reform import (LiftedState, eta_residuals, h_subgradient, h_value, phi_constraint,
                             phi_fbeta, phi_objective, phi_objective_grad, phi_precision,
                             phi_recall, round_lifted)
from exactdmo.verify import (check_h_subgradient, check_level_sets, check_measure_bound,
                             check_monotone_heads, check_rounding_dominance)

from conftest import make_data


@pytest.mark.parametrize("a,s,t,expected", [
    (0.5, 1.0, 0.3, 0.0), (0.1, 0.0, 0.3, 0.0), (0.5, 0.5, 0.3, -0.2), (0.1, 0.5, 0.3, 0.2)])
def test_h_value_examples(a, s, t, expected):
    assert h_value(a, s, t) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("a,s,t,expected", [
    (0.5, 0.5, 0.3, (-1, 0, 1)), (0.1, 0.1, 0.3, (0, 1, 0)), (0.9, 0.9, 0.3, (0, 1, 0))])
def test_h_subgradient_examples(a, s, t, expected):
    assert tuple(float(v) for v in h_subgradient(a, s, t)) == expected


def test_h_subgradient_on_kinks():
    # omega = 1 on both kink lines: (0, 1)
    for a, s, t in [(0.25, 0.25, 0.5), (0.75, 0.75, 0.5)]:
        da, ds, dt = h_subgradient(a, s, t)
        assert (float(da), float(ds), float(dt)) == (0.0, 1.0, 0.0)


def test_eta_examples():
    d = make_data([1, 0])
    np.testing.assert_array_equal(
        eta_residuals([0.9, 0.1], LiftedState(np.array([1.0, 0.0]), 0.5), d), [0, 0])
    d1 = make_data([1])
    assert eta_residuals([0.1], LiftedState(np.array([1.0]), 0.5), d1)[0] == pytest.approx(0.4)
    d0 = make_data([0])
    assert eta_residuals([0.9], LiftedState(np.array([1.0]), 0.5), d0)[0] == 0.0
    with pytest.raises(ValueError):
        eta_residuals([0.1, 0.2], LiftedState(np.array([1.0]), 0.5), d1)


def test_phi_examples():
    d = make_data([1, 1, 0])
    s = np.array([1.0, 0.5, 0.5])
    assert phi_recall(s, d) == 0.75 and phi_precision(s, d) == 0.75
    assert phi_fbeta(s, d) == 0.75
    y = d.labels.astype(float)
    assert phi_recall(y, d) == phi_precision(y, d) == phi_fbeta(y, d, 2.0) == 1.0
    z = np.zeros(3)
    assert phi_recall(z, d) == phi_precision(z, d) == phi_fbeta(z, d) == 0.0


def test_phi_constraint_examples():
    d = make_data([1, 1, 0])
    s = np.array([1.0, 0.5, 0.5])
    assert phi_constraint(s, d, TaskSpec.fpor(0.8)) == pytest.approx(0.1)
    assert phi_constraint(np.array([1.0, 1.0, 0.3]), d, TaskSpec.frop(0.8)) == pytest.approx(-0.4)
    assert phi_constraint(s, d, TaskSpec.ofbs()) == 0.0
    assert phi_constraint(s, d, TaskSpec.fpor(0.0)) == pytest.approx(-1.5)


def test_round_lifted():
    np.testing.assert_array_equal(round_lifted([0.9, 0.4], 0.5), [1, 0])
    assert round_lifted([0.5], 0.5)[0] == 0
    r = round_lifted([0.9, 0.1, 0.7], 0.5)
    np.testing.assert_array_equal(round_lifted(r, 0.5), r)


def test_projection():
    st_ = LiftedState(np.array([-0.2, 0.5, 1.3]), 1.7).project()
    np.testing.assert_array_equal(st_.s, [0, 0.5, 1])
    assert st_.t == 1.0


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**31),
       kind=st.sampled_from(["FPOR", "FROP", "OFBS"]))
def test_objective_grad_matches_differences(n, seed, kind):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    y[0], y[1] = 1, 0
    d = make_data(y)
    task = TaskSpec.ofbs(1.5) if kind == "OFBS" else TaskSpec(kind, alpha=0.5)
    s = rng.uniform(0.05, 0.95, n)
    g = phi_objective_grad(s, d, task)
    h = 1e-6
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fd = (phi_objective(s + e, d, task) - phi_objective(s - e, d, task)) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=1e-7)


dyadic = st.integers(0, 1024).map(lambda k: k / 1024)


# dyadic inputs keep every sum in H exact, so signs are not blurred by rounding
@settings(max_examples=300, deadline=None)
@given(a=dyadic, s=dyadic, t=dyadic)
def test_sign_matches_indicator(a, s, t):
    if a == t:
        return
    h = h_value(a, s, t)
    ind = 1.0 if a > t else 0.0
    assert (h <= 0) == (s <= ind)
    assert (h >= 0) == (s >= ind)


def test_lemma_suite():
    for check in (check_level_sets(), check_measure_bound(n_samples=50_000),
                  check_monotone_heads(), check_rounding_dominance(), check_h_subgradient()):
        assert check.passed, check.line()
