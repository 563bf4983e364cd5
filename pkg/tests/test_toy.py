import csv

import numpy as np
import pytest

from exactdmo.dataio import gen_toy1d
from exactdmo.metrics import TaskSpec
from exactdmo.oracle import oracle_best_threshold
from exactdmo.toy import T_GRID, exact_curves, toy_diagnostics, write_toy_csvs


def read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_csv_layout(tmp_path):
    paths = write_toy_csvs(tmp_path, (1, 2, 10))
    assert [p.name for p in paths] == ["toy_precision.csv", "toy_recall.csv", "toy_f1.csv",
                                       "toy_sigmoid_derivative.csv"]
    head, body = read(paths[0])
    assert head == ["t", "exact", "T=1", "T=2", "T=10"]
    assert body.shape == (201, 5)
    np.testing.assert_allclose(body[:, 0], T_GRID)
    head, body = read(paths[3])
    assert head == ["x_minus_t", "T=1", "T=2", "T=10"]
    assert body[100, 3] == pytest.approx(2.5)  # T/4 at x = t


def test_exact_f1_column_matches_oracle(tmp_path):
    paths = write_toy_csvs(tmp_path)
    _, f1 = read(paths[2])
    d = gen_toy1d(500, 0)
    x = d.features[:, 0]
    t_star, best, _ = oracle_best_threshold(x, d, TaskSpec.ofbs())
    j = int(np.argmax(f1[:, 1]))
    # the 0.02-spaced grid can only miss the optimum by the samples between grid points
    assert f1[j, 1] <= best
    assert best - f1[j, 1] < 0.01
    assert abs(f1[j, 0] - t_star) <= 0.04


def test_empty_temps_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_toy_csvs(tmp_path, [])


def test_diagnostics_pattern():
    diag = toy_diagnostics(temps=(1.0, 2.0, 10.0))
    assert diag.precision_gap[1.0] > 0.05 and diag.precision_gap[2.0] > 0.05
    assert diag.f1_shortfall[1.0] >= 0.02
    gaps = [diag.precision_gap[T] for T in (1.0, 2.0, 10.0)]
    assert gaps == sorted(gaps, reverse=True)


def test_exact_curves_degenerate_flag():
    d = gen_toy1d(100, 3)
    x = d.features[:, 0]
    ex = exact_curves(x, d, [x.max() + 1.0, x.min() - 1.0])
    assert list(ex["predicts_any"]) == [False, True]
    assert ex["recall"][1] == 1.0
