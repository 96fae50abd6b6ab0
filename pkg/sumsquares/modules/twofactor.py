"""
Two Factor
==========

Independent sums of squares for two-factor layouts, used to check the Type III engine: restricted-minus-full
model SSs for cell-mean hypotheses, weighted squares of means, and contrast-form SSs

  .. autosummary::
     :toctree: modules/twofactor

     TwoFactorLayout
     HypothesisMatrices
     h_matrices
     rmfm_ss
     rmfm_projector
     mwsm_ss
     mwsm_matrix
     mwsm_projector
     contrast_ss
     a_contrasts
     is_connected
     equivalence_report

"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import patsy.contrasts
import scipy.sparse
import scipy.sparse.csgraph

from ..internal.utilities import _echo, _fmt, _sig
from .design import DesignMatrix, IncidenceMatrix, build_design, build_incidence
from .formula import INTERCEPT, Term, TermList
from .load import Dataset
from .projector import DEFAULT_TOL, Projector, gram_schmidt, projector_of
from .sstypes import SSResult, ncp_delta, type1_table, type2_ss, type3_components, type3_ss

# Largest relative disagreement allowed between SS variants that should be equal
DEFAULT_VERIFY_TOL = 1e-8

CONTRAST_KINDS = ("centered", "helmert", "sum")


class LayoutError(ValueError):
    """A two-factor layout doesn't support the requested computation"""


@dataclass(frozen=True, eq=False)
class TwoFactorLayout:
    """
    Observations of a response classified by two factors A (a levels) and B (b levels).

    Cells are ordered lexicographically with A slowest, so cell (i, j) is column i*b + j of K.
    Empty cells are allowed: their cell means are NaN and their entries of D_ab are 0.

    Attributes
    ----------
    factor_names: tuple of str
        (A, B)
    incidence: IncidenceMatrix
        Incidence over the full a x b cross-classification
    y: np.ndarray
        Response vector
    """

    factor_names: Tuple[str, str]
    incidence: IncidenceMatrix
    y: np.ndarray

    @classmethod
    def from_dataset(
        cls, data: Dataset, factor_names: Optional[Sequence[str]] = None
    ) -> "TwoFactorLayout":
        if factor_names is None:
            factor_names = data.factor_names
        factor_names = tuple(factor_names)
        if len(factor_names) != 2:
            raise LayoutError(
                f"A two-factor layout needs exactly two factors, got {len(factor_names)}"
            )
        return cls(
            factor_names=factor_names,
            incidence=build_incidence(data, factor_names),
            y=data.y,
        )

    @property
    def a(self) -> int:
        return self.incidence.shape[0]

    @property
    def b(self) -> int:
        return self.incidence.shape[1]

    @property
    def K(self) -> np.ndarray:
        return self.incidence.K

    @property
    def counts(self) -> np.ndarray:
        """a x b matrix of cell counts n_ij"""
        return self.incidence.counts.reshape(self.a, self.b)

    @property
    def n_obs(self) -> int:
        return self.K.shape[0]

    @property
    def n_empty(self) -> int:
        return int((self.incidence.counts == 0).sum())

    @property
    def all_filled(self) -> bool:
        return self.incidence.all_filled

    @property
    def balanced(self) -> bool:
        counts = self.incidence.counts
        return bool(counts.min() > 0 and counts.min() == counts.max())

    def cell_means_of(self, y: np.ndarray) -> np.ndarray:
        """ab-vector of cell means D_ab K'y, NaN for empty cells"""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n_obs,):
            raise ValueError(f"y must have {self.n_obs} values, got shape {y.shape}")
        counts = self.incidence.counts
        sums = self.K.T @ y
        means = np.full(len(counts), np.nan)
        np.divide(sums, counts, out=means, where=counts > 0)
        return means

    @property
    def cell_means(self) -> np.ndarray:
        return self.cell_means_of(self.y)

    @property
    def D_ab(self) -> np.ndarray:
        """Diag(1/n_ij), with 0 for empty cells (the pseudo-inverse of K'K)"""
        counts = self.incidence.counts.astype(float)
        inverse = np.zeros(len(counts))
        np.divide(1.0, counts, out=inverse, where=counts > 0)
        return np.diag(inverse)

    def u_of(self, y: np.ndarray) -> np.ndarray:
        """a-vector (I_a x 1_b')ybar of row sums of cell means"""
        self._require_filled("u")
        return self.cell_means_of(y).reshape(self.a, self.b).sum(axis=1)

    @property
    def u(self) -> np.ndarray:
        return self.u_of(self.y)

    @property
    def D_a(self) -> np.ndarray:
        """Diag(sum_j 1/n_ij), the covariance matrix of u divided by sigma^2"""
        self._require_filled("D_a")
        return np.diag((1.0 / self.counts).sum(axis=1))

    def transpose(self) -> "TwoFactorLayout":
        """The same data with the roles of A and B swapped; cell (i, j) moves to (j, i)"""
        order = np.arange(self.a * self.b).reshape(self.a, self.b).T.ravel()
        incidence = IncidenceMatrix(
            K=self.K[:, order],
            counts=self.incidence.counts[order],
            factor_names=self.factor_names[::-1],
            shape=(self.b, self.a),
        )
        return TwoFactorLayout(
            factor_names=self.factor_names[::-1], incidence=incidence, y=self.y
        )

    def _require_filled(self, what: str):
        if not self.all_filled:
            raise LayoutError(
                f"{what} undefined: the layout has {self.n_empty:,} empty cell(s)"
            )


@dataclass(frozen=True, eq=False)
class HypothesisMatrices:
    """
    Symmetric idempotent ab x ab matrices for the grand mean (H00), A main effects (H10), B main effects (H01)
    and the interaction (H11).  They are pairwise orthogonal and sum to the identity.
    """

    U_a: np.ndarray
    S_a: np.ndarray
    U_b: np.ndarray
    S_b: np.ndarray
    H00: np.ndarray
    H10: np.ndarray
    H01: np.ndarray
    H11: np.ndarray


def _averaging(m: int) -> Tuple[np.ndarray, np.ndarray]:
    U = np.full((m, m), 1.0 / m)
    return U, np.eye(m) - U


def h_matrices(a: int, b: int) -> HypothesisMatrices:
    """
    Kronecker-product hypothesis matrices for an a x b layout.

    With U_m = (1/m)11' and S_m = I - U_m: H00 = U_a x U_b, H10 = S_a x U_b, H01 = U_a x S_b, H11 = S_a x S_b.
    H10 eta holds the deviations of the A marginal means of eta from the grand mean.

    Examples
    --------
    >>> h_matrices(2, 2).H10
    array([[ 0.25,  0.25, -0.25, -0.25],
           [ 0.25,  0.25, -0.25, -0.25],
           [-0.25, -0.25,  0.25,  0.25],
           [-0.25, -0.25,  0.25,  0.25]])
    """
    if a < 2 or b < 2:
        raise ValueError(f"Both factors need at least 2 levels, got a={a}, b={b}")
    U_a, S_a = _averaging(a)
    U_b, S_b = _averaging(b)
    return HypothesisMatrices(
        U_a=U_a,
        S_a=S_a,
        U_b=U_b,
        S_b=S_b,
        H00=np.kron(U_a, U_b),
        H10=np.kron(S_a, U_b),
        H01=np.kron(U_a, S_b),
        H11=np.kron(S_a, S_b),
    )


def _main_effect(layout: TwoFactorLayout) -> Term:
    return Term((layout.factor_names[0],))


def _check_hypothesis(H: np.ndarray, n_cells: int):
    H = np.asarray(H, dtype=float)
    if H.shape != (n_cells, n_cells):
        raise ValueError(f"H must be {n_cells} x {n_cells}, got shape {H.shape}")
    if np.abs(H - H.T).max() > 1e-8 or np.abs(H @ H - H).max() > 1e-8:
        raise ValueError("H must be symmetric and idempotent")
    return H


def rmfm_projector(
    layout: TwoFactorLayout, H: np.ndarray, tol: float = DEFAULT_TOL
) -> Projector:
    """Projector P_K - P_{K(I-H)}: the columns contributed by K after the restricted model K(I-H)"""
    H = _check_hypothesis(H, layout.a * layout.b)
    K = layout.K
    restricted = K @ (np.eye(H.shape[0]) - H)
    basis = gram_schmidt([restricted, K], tol=tol, labels=("restricted", "K"))
    return Projector(basis.columns_from("K"))


def rmfm_ss(
    y: np.ndarray,
    layout: TwoFactorLayout,
    H: np.ndarray,
    term: Optional[Term] = None,
    tol: float = DEFAULT_TOL,
) -> SSResult:
    """
    Extra error SS of the restricted cell-means model sp(K(I-H)) over the full model sp(K)

    Parameters
    ----------
    y: np.ndarray
    layout: TwoFactorLayout
    H: np.ndarray
        Symmetric idempotent ab x ab hypothesis matrix, usually H10, H01 or H11
    term: Term, optional
        Label for the result.  Defaults to the A main effect.
    tol: float
        Relative rank tolerance

    Returns
    -------
    SSResult
        df is rank(K) - rank(K(I-H)), which is less than tr(H) when cells are empty
    """
    y = np.asarray(y, dtype=float)
    P = rmfm_projector(layout, H, tol=tol)
    return SSResult(
        term=term if term is not None else _main_effect(layout),
        ss=P.quadratic_form(y),
        df=P.df,
        hypothesis=np.asarray(H, dtype=float),
    )


def mwsm_ss(y: np.ndarray, layout: TwoFactorLayout) -> SSResult:
    """
    Weighted squares of means SS for A: u'(D_a^-1 - D_a^-1 1 (1'D_a^-1 1)^-1 1'D_a^-1)u.

    Only defined when every cell is filled.

    Examples
    --------
    >>> mwsm_ss(data.y, layout).ss  # u = (4, 12), D_a = 1.5 I
    21.333333333333332
    """
    layout._require_filled("MWSM")
    u = layout.u_of(y)
    weights = 1.0 / np.diag(layout.D_a)
    centered = u - (weights @ u) / weights.sum()
    return SSResult(
        term=_main_effect(layout),
        ss=float(weights @ centered ** 2),
        df=layout.a - 1,
    )


def mwsm_matrix(layout: TwoFactorLayout) -> np.ndarray:
    """
    The weighted squares of means projector in its bracketed form
    K D_ab (I_a x 1_b) [D_a^-1 - D_a^-1 1 (1'D_a^-1 1)^-1 1'D_a^-1] (I_a x 1_b') D_ab K'
    """
    layout._require_filled("MWSM")
    weights = 1.0 / np.diag(layout.D_a)
    middle = np.diag(weights) - np.outer(weights, weights) / weights.sum()
    V = np.kron(np.eye(layout.a), np.ones((1, layout.b))) @ layout.D_ab @ layout.K.T
    return V.T @ middle @ V


def mwsm_projector(
    layout: TwoFactorLayout, tol: float = DEFAULT_TOL, verify_tol: float = DEFAULT_VERIFY_TOL
) -> Projector:
    """
    Projector P_{K D_ab (S_a x 1_b)}, checked against the bracketed form of `mwsm_matrix`

    Raises
    ------
    LayoutError
        If the layout has empty cells
    """
    layout._require_filled("MWSM")
    S_a = h_matrices(layout.a, layout.b).S_a
    P = projector_of(
        layout.K @ layout.D_ab @ np.kron(S_a, np.ones((layout.b, 1))), tol=tol
    )
    gap = float(np.abs(P.matrix - mwsm_matrix(layout)).max())
    if gap > verify_tol:
        _echo(
            f"WARNING: the two forms of the MWSM projector differ by {gap:.3g}",
            fg="yellow",
        )
    return P


def a_contrasts(a: int, b: int, kind: str = "centered") -> np.ndarray:
    """
    Contrast matrix W = C x 1_b for A main effects in an a x b layout

    Parameters
    ----------
    a, b: int
        Level counts
    kind: {'centered', 'helmert', 'sum'}
        'centered' uses C = S_a (a dependent columns).  'helmert' and 'sum' use the patsy codings
        without intercept (a - 1 independent columns).  All span sp(S_a x 1_b).
    """
    if kind == "centered":
        C = _averaging(a)[1]
    elif kind == "helmert":
        C = patsy.contrasts.Helmert().code_without_intercept(list(range(a))).matrix
    elif kind == "sum":
        C = patsy.contrasts.Sum().code_without_intercept(list(range(a))).matrix
    else:
        raise ValueError(f"kind must be one of {', '.join(CONTRAST_KINDS)}, got '{kind}'")
    return np.kron(C, np.ones((b, 1)))


def contrast_ss(
    y: np.ndarray,
    layout: TwoFactorLayout,
    W: np.ndarray,
    term: Optional[Term] = None,
    tol: float = DEFAULT_TOL,
) -> SSResult:
    """
    Contrast-form SS (W'ybar)'(W'D_ab W)^-(W'ybar).

    The generalized inverse is never formed: with Q an orthonormal basis of sp(D_ab^(1/2) W),
    the SS is ||Q' D_ab^(-1/2) ybar||^2.  W may have dependent columns.
    """
    layout._require_filled("Contrast SS")
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != layout.a * layout.b:
        raise ValueError(f"W must have {layout.a * layout.b} rows, got shape {W.shape}")
    counts = layout.incidence.counts.astype(float)
    Q = gram_schmidt([W / np.sqrt(counts)[:, None]], tol=tol).Q
    coefs = Q.T @ (np.sqrt(counts) * layout.cell_means_of(y))
    return SSResult(
        term=term if term is not None else _main_effect(layout),
        ss=float(coefs @ coefs),
        df=Q.shape[1],
        hypothesis=W,
    )


@dataclass(frozen=True, eq=False)
class FactorComparison:
    """
    Every SS for one main effect of a two-factor layout.  Undefined variants are None.

    Attributes
    ----------
    term: Term
    levels: int
    type3, type2, rmfm: SSResult
    mwsm, contrast: SSResult or None
        Only defined when every cell is filled
    type1: SSResult or None
        Only computed for balanced layouts
    null_ncp: float or None
        ||P3 K eta|| / ||eta|| for a random eta satisfying the main-effect hypothesis (all-filled layouts)
    discrepancy: float
        Largest pairwise relative difference among the SSs that should be equal
    """

    term: Term
    levels: int
    type3: SSResult
    type2: SSResult
    rmfm: SSResult
    mwsm: Optional[SSResult]
    contrast: Optional[SSResult]
    type1: Optional[SSResult]
    null_ncp: Optional[float]
    discrepancy: float

    def variants(self) -> List[Tuple[str, Optional[SSResult]]]:
        return [
            ("Type III", self.type3),
            ("RMFM", self.rmfm),
            ("MWSM", self.mwsm),
            ("Contrast", self.contrast),
            ("Type II", self.type2),
            ("Type I", self.type1),
        ]


def is_connected(counts: np.ndarray) -> bool:
    """
    Whether the filled cells of an a x b count matrix link every row level to every column level.

    Rows and columns are the two sides of a bipartite graph with an edge for each filled cell.
    Main effects are only fully estimable (a - 1 and b - 1 df after adjustment) when it is connected.

    Examples
    --------
    >>> is_connected(np.array([[1, 2], [0, 3]]))
    True
    >>> is_connected(np.array([[1, 0], [0, 3]]))
    False
    """
    filled = scipy.sparse.csr_matrix(np.asarray(counts) > 0)
    graph = scipy.sparse.bmat([[None, filled], [filled.T, None]])
    n_parts, _ = scipy.sparse.csgraph.connected_components(graph, directed=False)
    return n_parts == 1


def _discrepancy(values: List[float], floor: float) -> float:
    if len(values) < 2:
        return 0.0
    spread = max(values) - min(values)
    scale = max(max(abs(v) for v in values), floor)
    return spread / scale if scale > 0 else 0.0


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    """
    Comparison of the SS variants for both main effects of a two-factor dataset

    With every cell filled, Type III, RMFM, MWSM and the contrast-form SS must agree and have a - 1 df.
    With empty cells only Type III and RMFM are defined and they generally differ: Type III keeps
    the Type II df (a - 1 whenever the filled cells connect every level) while RMFM loses df: with a single
    empty cell it has a - 2.
    """

    factor_names: Tuple[str, str]
    counts: np.ndarray
    comparisons: Tuple[FactorComparison, FactorComparison]
    tol: float

    @property
    def n_empty(self) -> int:
        return int((self.counts == 0).sum())

    @property
    def all_filled(self) -> bool:
        return self.n_empty == 0

    @property
    def connected(self) -> bool:
        return is_connected(self.counts)

    @property
    def max_discrepancy(self) -> float:
        return max(c.discrepancy for c in self.comparisons)

    def failures(self) -> List[str]:
        """Reasons the report does not confirm the expected equalities (empty when it passes)"""
        problems = []
        for c in self.comparisons:
            name = c.term.label
            if c.type3.df != c.type2.df:
                problems.append(
                    f"{name}: Type III df {c.type3.df} differs from Type II df {c.type2.df}"
                )
            if c.discrepancy > self.tol:
                problems.append(
                    f"{name}: SS variants differ by {c.discrepancy:.3g} (tolerance {self.tol:.3g})"
                )
            if self.all_filled:
                dfs = {s.df for _, s in c.variants() if s is not None}
                if dfs != {c.levels - 1}:
                    problems.append(
                        f"{name}: expected df {c.levels - 1} for every SS, got {sorted(dfs)}"
                    )
                if c.null_ncp is not None and c.null_ncp > self.tol:
                    problems.append(
                        f"{name}: Type III non-centrality {c.null_ncp:.3g} under the main-effect hypothesis"
                    )
            else:
                if self.connected and c.type3.df != c.levels - 1:
                    problems.append(
                        f"{name}: expected Type III df {c.levels - 1} in a connected layout, got {c.type3.df}"
                    )
                if self.n_empty == 1 and c.rmfm.df != c.levels - 2:
                    problems.append(
                        f"{name}: expected RMFM df {c.levels - 2} with one empty cell, got {c.rmfm.df}"
                    )
                elif c.rmfm.df > c.type3.df:
                    problems.append(
                        f"{name}: RMFM df {c.rmfm.df} exceeds Type III df {c.type3.df}"
                    )
        return problems

    @property
    def passed(self) -> bool:
        return len(self.failures()) == 0

    def render_text(self) -> str:
        a_name, b_name = self.factor_names
        a, b = self.counts.shape
        lines = [
            f"Two-factor layout: {a_name} ({a} levels) x {b_name} ({b} levels), "
            f"{int(self.counts.sum()):,} observations, {self.n_empty:,} empty cell(s)"
        ]
        for c in self.comparisons:
            lines.append(f"{c.term.label} main effect")
            for name, result in c.variants():
                if result is not None:
                    lines.append(f"  {name:<9} ss={_fmt(result.ss)}  df={result.df}")
            if not self.all_filled:
                lines.append(f"  MWSM undefined ({self.n_empty:,} empty cell(s))")
                lines.append(
                    f"  Type III df {c.type3.df}, RMFM df {c.rmfm.df}, "
                    f"SS difference {_fmt(c.type3.ss - c.rmfm.ss)}"
                )
            else:
                lines.append(f"  max relative discrepancy {c.discrepancy:.3g}")
                if c.null_ncp is not None:
                    lines.append(f"  null non-centrality {c.null_ncp:.3g}")
        if self.passed:
            lines.append(f"Verdict: PASS (tolerance {self.tol:.3g})")
        else:
            lines.append("Verdict: FAIL")
            lines.extend(f"  {reason}" for reason in self.failures())
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        factors = []
        for c in self.comparisons:
            factors.append(
                {
                    "term": c.term.label,
                    "levels": c.levels,
                    "ss": {
                        name: (None if s is None else {"ss": _sig(s.ss), "df": int(s.df)})
                        for name, s in c.variants()
                    },
                    "discrepancy": _sig(c.discrepancy),
                    "null_ncp": _sig(c.null_ncp),
                }
            )
        return {
            "factors": list(self.factor_names),
            "counts": self.counts.astype(int).tolist(),
            "empty_cells": self.n_empty,
            "connected": self.connected,
            "factor_comparisons": factors,
            "max_discrepancy": _sig(self.max_discrepancy),
            "tol": self.tol,
            "passed": self.passed,
            "failures": self.failures(),
        }


def saturated_model(response: str, factor_names: Sequence[str]) -> TermList:
    """The model y ~ A*B for two named factors"""
    a_name, b_name = factor_names
    terms = (INTERCEPT, Term((a_name,)), Term((b_name,)), Term((a_name, b_name)))
    return TermList(terms, response)


def _compare(
    layout: TwoFactorLayout,
    design: DesignMatrix,
    type1_rows: Optional[Tuple[SSResult, ...]],
    y: np.ndarray,
    rng: np.random.Generator,
    tol: float,
) -> FactorComparison:
    """All SSs for the A effect of `layout` (the B effect when `layout` is transposed)"""
    term = _main_effect(layout)
    H = h_matrices(layout.a, layout.b)
    comp = type3_components(design, term, tol=tol)
    type3 = type3_ss(y, comp)
    type2 = type2_ss(design, term, y, tol=tol)
    rmfm = rmfm_ss(y, layout, H.H10, term=term, tol=tol)

    mwsm = contrast = None
    null_ncp = None
    if layout.all_filled:
        mwsm = mwsm_ss(y, layout)
        contrast = contrast_ss(y, layout, a_contrasts(layout.a, layout.b), term=term, tol=tol)
        eta = (np.eye(layout.a * layout.b) - H.H10) @ rng.standard_normal(layout.a * layout.b)
        delta = ncp_delta(comp, layout.K @ eta)
        null_ncp = float(np.linalg.norm(delta) / np.linalg.norm(eta))

    type1 = None
    if type1_rows is not None:
        type1 = next(r for r in type1_rows if r.term == term)

    agreeing = [s.ss for s in (type3, rmfm, mwsm, contrast, type1) if s is not None]
    if not layout.all_filled:
        agreeing = [type3.ss]
    discrepancy = _discrepancy(agreeing, floor=1e-12 * float(y @ y))
    return FactorComparison(
        term=term,
        levels=layout.a,
        type3=type3,
        type2=type2,
        rmfm=rmfm,
        mwsm=mwsm,
        contrast=contrast,
        type1=type1,
        null_ncp=null_ncp,
        discrepancy=discrepancy,
    )


def equivalence_report(
    data: Dataset,
    factor_names: Optional[Sequence[str]] = None,
    tol: float = DEFAULT_TOL,
    verify_tol: float = DEFAULT_VERIFY_TOL,
    seed: int = 0,
) -> EquivalenceReport:
    """
    Compute every SS variant for both main effects of a two-factor dataset and compare them

    Parameters
    ----------
    data: Dataset
    factor_names: list of str, optional
        The two factors (A, B).  Defaults to the dataset's factors.
    tol: float
        Relative rank tolerance
    verify_tol: float
        Largest relative discrepancy accepted between SSs that should agree
    seed: int
        Seed for the random mean vector used to check the Type III non-centrality under the null

    Returns
    -------
    EquivalenceReport
    """
    layout = TwoFactorLayout.from_dataset(data, factor_names)
    design = build_design(data, saturated_model(data.response_name, layout.factor_names))
    y = data.y
    rng = np.random.default_rng(seed)
    type1_rows = type1_table(design, y, tol=tol).rows if layout.balanced else None
    comparisons = (
        _compare(layout, design, type1_rows, y, rng, tol),
        _compare(layout.transpose(), design, type1_rows, y, rng, tol),
    )
    return EquivalenceReport(
        factor_names=layout.factor_names,
        counts=layout.counts,
        comparisons=comparisons,
        tol=verify_tol,
    )
