from pathlib import Path

import numpy as np
import pytest

from sfr.core import Dataset
from sfr.data_io import CsvSchema, load_csv

DATA = Path(__file__).parent / "data"

_acceptance_lines: list[str] = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    _acceptance_lines.append(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def boston():
    return load_csv(DATA / "boston.csv", CsvSchema("crim", ("lstat",)))


@pytest.fixture(scope="session")
def labor():
    return load_csv(DATA / "labor.csv", CsvSchema("earnings", ("treatment",)))


@pytest.fixture
def six_point():
    """Five points on y = x and one gross outlier, fitted without intercept."""
    x = np.array([0.0, 1, 2, 3, 4, 2])
    y = np.array([0.0, 1, 2, 3, 4, 10])
    return Dataset(y, x[:, None], ("x",), add_intercept=False)


def random_dataset(rng, n=40, p=2, intercept=True, noise=1.0):
    X = rng.standard_normal((n, p))
    y = X @ np.arange(1, p + 1) + 0.5 + noise * rng.standard_normal(n)
    return Dataset(y, X, add_intercept=intercept)
