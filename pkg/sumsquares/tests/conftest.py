from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import sumsquares

TESTS_PATH = Path(__file__).parent
DATA_PATH = TESTS_PATH / "test_data_files"


def random_dataset(rng, a, b, counts=None, n_range=(1, 6)):
    """Random normal response over an a x b layout, rows in random order"""
    if counts is None:
        counts = rng.integers(n_range[0], n_range[1] + 1, size=(a, b))
    cells = [(i, j) for i in range(a) for j in range(b) for _ in range(counts[i, j])]
    order = rng.permutation(len(cells))
    df = pd.DataFrame(
        {
            "y": rng.standard_normal(len(cells)),
            "A": [f"a{cells[k][0] + 1}" for k in order],
            "B": [f"b{cells[k][1] + 1}" for k in order],
        }
    )
    return df


# Datasets for testing
@pytest.fixture
def fixture_data():
    """2x2, n = (1, 2, 2, 1), cell means (2, 2, 5, 7)"""
    return sumsquares.load.load_csv(DATA_PATH / "fixture.csv", "y", ["A", "B"])


@pytest.fixture
def unequal_data():
    """2x2, n = (1, 2, 2, 2), cell means (2, 2, 5, 8)"""
    return sumsquares.load.load_csv(DATA_PATH / "unequal.csv", "y", ["A", "B"])


@pytest.fixture
def balanced_data():
    """2x2 with one observation per cell, y = (1, 2, 3, 4)"""
    return sumsquares.load.load_csv(DATA_PATH / "balanced.csv", "y", ["A", "B"])


@pytest.fixture
def empty_cell_data():
    """3x2 with cell (a3, b2) empty"""
    return sumsquares.load.load_csv(DATA_PATH / "empty_cell.csv", "y", ["A", "B"])


@pytest.fixture
def saturated():
    return sumsquares.formula.parse_formula("y ~ A*B")


@pytest.fixture
def fixture_design(fixture_data, saturated):
    return sumsquares.design.build_design(fixture_data, saturated)


@pytest.fixture
def rng():
    return np.random.default_rng(2021)
