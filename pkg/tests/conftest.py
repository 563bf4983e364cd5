import numpy as np
import pytest

from exactdmo.dataio import Dataset


def make_data(labels, features=None):
    labels = np.asarray(labels)
    if features is None:
        features = np.zeros((labels.size, 1))
    return Dataset.from_arrays(features, labels, allow_single_class=True)


@pytest.fixture
def data4():
    """Four rows, two positives first."""
    return make_data([1, 1, 0, 0])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
