"""
Projector
=========

Orthonormal spanning sets, orthogonal projectors, and complements of one span within another

  .. autosummary::
     :toctree: modules/projector

     OrthoBasis
     Projector
     gram_schmidt
     complement_within
     projector_from
     projector_of
     prop1_projector

"""

from dataclasses import dataclass
from typing import Hashable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

# Relative tolerance for deciding that a column adds nothing to the span
DEFAULT_TOL = 1e-9


class NotPositiveDefiniteError(ValueError):
    """A matrix that must be symmetric positive-definite is not"""


def _as_columns(block) -> np.ndarray:
    block = np.asarray(block, dtype=float)
    if block.ndim == 1:
        block = block.reshape(-1, 1)
    if block.ndim != 2:
        raise ValueError(f"Blocks must be vectors or matrices, got {block.ndim} dimensions")
    return block


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """
    Result of Gram-Schmidt on an ordered list of blocks.

    Attributes
    ----------
    Q: np.ndarray
        n x r matrix with orthonormal columns spanning all of the input columns
    source: tuple
        For each column of Q, the label of the block that contributed it
    drop_log: tuple of (label, int)
        Input columns rejected as dependent on earlier columns: (block label, column index in that block)
    labels: tuple
        Block labels in input order
    """

    Q: np.ndarray
    source: Tuple[Hashable, ...]
    drop_log: Tuple[Tuple[Hashable, int], ...]
    labels: Tuple[Hashable, ...]

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def rank(self) -> int:
        return self.Q.shape[1]

    def columns_from(self, *labels: Hashable) -> np.ndarray:
        """The columns of Q contributed by the named blocks"""
        unknown = [label for label in labels if label not in self.labels]
        if len(unknown) > 0:
            raise ValueError(f"Unknown block label(s): {', '.join(map(str, unknown))}")
        keep = [idx for idx, s in enumerate(self.source) if s in labels]
        return self.Q[:, keep]

    def count_from(self, label: Hashable) -> int:
        return sum(1 for s in self.source if s == label)

    def projector(self) -> "Projector":
        return Projector(self.Q)


@dataclass(frozen=True, eq=False)
class Projector:
    """
    Orthogonal projector P = QQ' held through an orthonormal Q.  The dense n x n matrix is only built on request.
    """

    Q: np.ndarray

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def df(self) -> int:
        return self.Q.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return self.Q @ self.Q.T

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.Q @ (self.Q.T @ v)

    def quadratic_form(self, y: np.ndarray) -> float:
        """y'Py"""
        coefs = self.Q.T @ y
        return float(coefs @ coefs)

    def distance(self, other: "Projector") -> float:
        """Largest absolute entry of the difference of the two projection matrices"""
        return float(np.abs(self.matrix - other.matrix).max(initial=0.0))


def gram_schmidt(
    blocks: Sequence[np.ndarray],
    tol: float = DEFAULT_TOL,
    labels: Optional[Sequence[Hashable]] = None,
) -> OrthoBasis:
    """
    Orthonormal spanning set of the columns of several blocks, tracking which block contributed each column.

    Columns are processed left to right, block by block.  Each one is orthogonalized against the columns
    accepted so far by modified Gram-Schmidt (one accepted column at a time) followed by a second
    reorthogonalization pass, and accepted if what remains is larger than `tol` times its original norm.
    Columns that are negligible next to the largest input column are treated as zero.

    Parameters
    ----------
    blocks: list of np.ndarray
        Matrices (or vectors) with the same number of rows.  Blocks may have zero columns.
    tol: float
        Relative tolerance for rank decisions
    labels: list, optional
        One label per block, used in `OrthoBasis.source`.  Defaults to block positions (0, 1, ...).

    Returns
    -------
    OrthoBasis

    Examples
    --------
    >>> basis = gram_schmidt([np.ones(4), np.ones(4)])
    >>> basis.rank, basis.drop_log
    (1, ((1, 0),))
    """
    if len(blocks) == 0:
        raise ValueError("gram_schmidt needs at least one block")
    blocks = [_as_columns(b) for b in blocks]
    if labels is None:
        labels = tuple(range(len(blocks)))
    labels = tuple(labels)
    if len(labels) != len(blocks):
        raise ValueError(f"Got {len(labels)} labels for {len(blocks)} blocks")
    n = blocks[0].shape[0]
    bad_rows = [b.shape[0] for b in blocks if b.shape[0] != n]
    if len(bad_rows) > 0:
        raise ValueError(f"All blocks must have {n} rows, found {bad_rows[0]}")

    norms = [np.linalg.norm(b, axis=0) for b in blocks]
    scale = max((float(nb.max()) for nb in norms if len(nb) > 0), default=0.0)

    Q = np.zeros((n, min(n, sum(b.shape[1] for b in blocks))))
    r = 0
    source = []
    drop_log = []
    for label, block, block_norms in zip(labels, blocks, norms):
        for j in range(block.shape[1]):
            norm = block_norms[j]
            if r == n or norm == 0 or norm <= tol * scale:
                drop_log.append((label, j))
                continue
            w = block[:, j].copy()
            # Modified Gram-Schmidt, run twice
            for _ in range(2):
                for k in range(r):
                    w -= (Q[:, k] @ w) * Q[:, k]
            residual = np.linalg.norm(w)
            if residual > tol * norm:
                Q[:, r] = w / residual
                source.append(label)
                r += 1
            else:
                drop_log.append((label, j))
    return OrthoBasis(
        Q=Q[:, :r],
        source=tuple(source),
        drop_log=tuple(drop_log),
        labels=labels,
    )


def projector_from(basis: OrthoBasis) -> Projector:
    """Projector onto the span of a basis; its df is the number of basis columns"""
    return Projector(basis.Q)


def projector_of(*blocks: np.ndarray, tol: float = DEFAULT_TOL) -> Projector:
    """Projector onto the span of the concatenated blocks"""
    return projector_from(gram_schmidt(list(blocks), tol=tol))


def complement_within(A: np.ndarray, X: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Orthonormal basis N of sp(A)^perp within sp(X), assuming sp(A) is inside sp(X).

    N is the set of Gram-Schmidt columns contributed by X after A, so that P_A + P_N = P_X.
    N may have zero columns.
    """
    return gram_schmidt([A, X], tol=tol, labels=("A", "X")).columns_from("X")


def _symmetric_roots(D: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """D^(1/2) and D^(-1/2) for a symmetric positive-definite D"""
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise NotPositiveDefiniteError(f"D must be a square matrix, got shape {D.shape}")
    size = np.abs(D).max(initial=0.0)
    if np.abs(D - D.T).max(initial=0.0) > 1e-10 * max(size, 1.0):
        raise NotPositiveDefiniteError("D is not symmetric")
    values, vectors = scipy.linalg.eigh(D)
    if values.max(initial=0.0) <= 0 or values.min() <= 1e-12 * values.max():
        raise NotPositiveDefiniteError(
            f"D is not positive-definite (smallest eigenvalue {values.min():.3g})"
        )
    root = np.sqrt(values)
    return (vectors * root) @ vectors.T, (vectors / root) @ vectors.T


def prop1_projector(
    R: np.ndarray, M: np.ndarray, D: np.ndarray, tol: float = DEFAULT_TOL
) -> Tuple[Projector, Projector]:
    """
    Both sides of the identity P_{D^(1/2) R} = I - P_{D^(-1/2) M}, where sp(M) is the orthogonal complement of sp(R).

    Parameters
    ----------
    R: np.ndarray
        r x c matrix
    M: np.ndarray
        Matrix whose span is sp(R)^perp (not checked)
    D: np.ndarray
        r x r symmetric positive-definite matrix

    Returns
    -------
    left, right: Projector
        The projector onto sp(D^(1/2) R), and the projector onto sp(D^(-1/2) M)^perp

    Raises
    ------
    NotPositiveDefiniteError
        If D is not symmetric positive-definite
    """
    R = _as_columns(R)
    M = _as_columns(M)
    D_half, D_neg_half = _symmetric_roots(D)
    left = projector_of(D_half @ R, tol=tol)
    right = Projector(complement_within(D_neg_half @ M, np.eye(R.shape[0]), tol=tol))
    return left, right
