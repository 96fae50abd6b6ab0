"""
Design
======

Build dummy-variable design matrices and cell incidence matrices from a dataset

  .. autosummary::
     :toctree: modules/design

     DesignMatrix
     IncidenceMatrix
     build_design
     build_incidence

"""

from dataclasses import dataclass
from itertools import product
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from ..internal.utilities import _hstack
from .formula import Term, TermList
from .load import DataError, Dataset
from .projector import DEFAULT_TOL, gram_schmidt


def _cell_codes(data: Dataset, factor_names: Sequence[str]) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Lexicographic cell index of each observation over the full cross of the named factors"""
    for name in factor_names:
        if name not in data.factor_names:
            raise DataError(f"unknown factor '{name}'")
    shape = tuple(data.n_levels(name) for name in factor_names)
    if len(factor_names) == 0:
        return np.zeros(data.n_obs, dtype=int), shape
    codes = tuple(data.codes(name) for name in factor_names)
    return np.ravel_multi_index(codes, shape), shape


def _indicator(index: np.ndarray, n_columns: int) -> np.ndarray:
    result = np.zeros((len(index), n_columns))
    result[np.arange(len(index)), index] = 1.0
    return result


def _cell_labels(data: Dataset, factor_names: Sequence[str]) -> List[str]:
    if len(factor_names) == 0:
        return ["(1)"]
    levels = [[f"{name}[{level}]" for level in data.levels(name)] for name in factor_names]
    return [":".join(combo) for combo in product(*levels)]


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """
    Full dummy coding of a model over a dataset: one block of columns per term.

    Each block of a factorial term has one 0/1 column per combination of its factors' levels
    (lexicographic, first factor slowest) and every row of a block sums to 1.
    The intercept block is a single column of ones.

    Attributes
    ----------
    model: TermList
    blocks: tuple of (Term, np.ndarray)
    column_labels: tuple of list of str
        Labels for the columns of each block, e.g. "A[a1]:B[b2]"
    cell_index: np.ndarray
        Per-observation index into the lexicographic cross-classification of all model factors
    """

    model: TermList
    blocks: Tuple[Tuple[Term, np.ndarray], ...]
    column_labels: Tuple[List[str], ...]
    cell_index: np.ndarray

    @property
    def n_obs(self) -> int:
        return len(self.cell_index)

    @property
    def terms(self) -> List[Term]:
        return [t for t, _ in self.blocks]

    @property
    def X(self) -> np.ndarray:
        return _hstack([b for _, b in self.blocks], self.n_obs)

    def block(self, term: Union[str, Term]) -> np.ndarray:
        term = self.model.get(term)
        for t, b in self.blocks:
            if t == term:
                return b

    def columns(self, terms: Iterable[Term]) -> np.ndarray:
        """Concatenated blocks of several terms (n x 0 when there are none)"""
        return _hstack([self.block(t) for t in terms], self.n_obs)

    def rank(self, tol: float = DEFAULT_TOL) -> int:
        return gram_schmidt([self.X], tol=tol).rank


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """
    Cell incidence matrix K: one row per observation with a single 1 in the column of its cell.

    Columns cover every combination of the factors' levels in lexicographic order, including empty cells
    (which are all-zero columns).
    """

    K: np.ndarray
    counts: np.ndarray
    factor_names: Tuple[str, ...]
    shape: Tuple[int, ...]

    @property
    def n_cells(self) -> int:
        return self.K.shape[1]

    @property
    def filled(self) -> np.ndarray:
        return self.counts > 0

    @property
    def all_filled(self) -> bool:
        return bool(self.filled.all())


def build_design(data: Dataset, model: TermList) -> DesignMatrix:
    """
    Dummy-variable design matrix for a model

    Parameters
    ----------
    data: Dataset
    model: TermList
        Every factor named in the model must be a factor of the dataset

    Returns
    -------
    DesignMatrix
        Blocks in model order

    Examples
    --------
    >>> design = build_design(data, parse_formula("y ~ A*B"))
    >>> design.X.shape  # 2x2 layout, 6 observations
    (6, 9)
    """
    blocks = []
    labels = []
    for term in model:
        index, shape = _cell_codes(data, term.factors)
        blocks.append((term, _indicator(index, int(np.prod(shape)))))
        labels.append(_cell_labels(data, term.factors))
    cell_index, _ = _cell_codes(data, model.factors)
    return DesignMatrix(
        model=model,
        blocks=tuple(blocks),
        column_labels=tuple(labels),
        cell_index=cell_index,
    )


def build_incidence(data: Dataset, factor_names: Sequence[str]) -> IncidenceMatrix:
    """
    Incidence matrix over the full cross-classification of the named factors

    Examples
    --------
    >>> build_incidence(data, ["A", "B"]).counts  # 2x2 layout with n = (1, 2, 2, 1)
    array([1, 2, 2, 1])
    """
    factor_names = tuple(factor_names)
    index, shape = _cell_codes(data, factor_names)
    n_cells = int(np.prod(shape))
    K = _indicator(index, n_cells)
    counts = np.bincount(index, minlength=n_cells)
    return IncidenceMatrix(K=K, counts=counts, factor_names=factor_names, shape=shape)
