"""
SS Types
========

Type I, II and III sums of squares, F statistics, and ANOVA tables for models with factor effects

  .. autosummary::
     :toctree: modules/sstypes

     SSResult
     AnovaTable
     TypePartitionMatrices
     type3_components
     type3_ss
     type2_ss
     type1_table
     ncp_delta
     ncp
     f_statistic
     anova

"""

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import scipy.special

from ..internal.utilities import _echo, _fmt, _sig, print_wrap
from .design import DesignMatrix
from .formula import Term, partition_for_target
from .projector import DEFAULT_TOL, OrthoBasis, Projector, gram_schmidt

SS_TYPES = ("I", "II", "III")

# Negative sums of squares down to this (times max(1, y'y)) are rounding noise
NEGATIVE_SS_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class SSResult:
    """
    A numerator sum of squares for one term

    Attributes
    ----------
    term: Term
    ss: float
        Non-negative sum of squares
    df: int
    f: float or None
        F statistic, when both df and the error df are positive.  Infinite when the error SS is exactly zero
        and ss is positive; None when both are zero.
    p: float or None
        Upper tail probability of `f`
    hypothesis: np.ndarray or None
        Matrix whose columns define what the SS tests.  For Types II and III this is X_{1|0} = (I - P_X0) X1:
        the SS tests X_{1|0} beta_1 = 0.
    """

    term: Term
    ss: float
    df: int
    f: Optional[float] = None
    p: Optional[float] = None
    hypothesis: Optional[np.ndarray] = None

    @property
    def ms(self) -> Optional[float]:
        return self.ss / self.df if self.df > 0 else None

    def to_dict(self) -> dict:
        return {
            "term": self.term.label,
            "ss": _sig(self.ss),
            "df": int(self.df),
            "f": _sig(self.f),
            "p": _sig(self.p),
        }


@dataclass(frozen=True, eq=False)
class AnovaTable:
    """
    One SSResult per term plus the error line of the full model

    Attributes
    ----------
    rows: list of SSResult
        Type I tables include the intercept row; Types II and III do not
    sse: float
    dfe: int
        n_obs - rank(X)
    mse: float or None
        sse / dfe, the estimate of sigma^2, when dfe > 0
    type_label: str
        "I", "II" or "III"
    """

    rows: Tuple[SSResult, ...]
    sse: float
    dfe: int
    mse: Optional[float]
    type_label: str

    def row(self, term: Union[str, Term]) -> SSResult:
        if isinstance(term, str):
            term = Term.from_label(term)
        for r in self.rows:
            if r.term == term:
                return r
        raise ValueError(f"No row for term '{term.label}' in the Type {self.type_label} table")

    def to_dict(self) -> dict:
        return {
            "type": self.type_label,
            "terms": [r.to_dict() for r in self.rows],
            "sse": _sig(self.sse),
            "dfe": int(self.dfe),
            "mse": _sig(self.mse),
        }

    def to_frame(self) -> pd.DataFrame:
        """The table as a DataFrame indexed by term label, with an 'Error' row"""
        records = [
            {"df": r.df, "ss": r.ss, "ms": r.ms, "f": r.f, "p": r.p} for r in self.rows
        ]
        records.append({"df": self.dfe, "ss": self.sse, "ms": self.mse, "f": None, "p": None})
        index = pd.Index([r.term.label for r in self.rows] + ["Error"], name="term")
        return pd.DataFrame(records, index=index, columns=["df", "ss", "ms", "f", "p"])

    def render_text(self) -> str:
        """Fixed-width text rendering with 12 significant digits"""
        frame = self.to_frame().astype(object)
        for col in ["ss", "ms", "f", "p"]:
            frame[col] = frame[col].map(_fmt)
        frame["df"] = frame["df"].map(str)
        return f"Type {self.type_label} sums of squares\n" + frame.to_string() + "\n"


@dataclass(frozen=True, eq=False)
class TypePartitionMatrices:
    """
    The Type III construction for one target term.

    Attributes
    ----------
    target: Term
    not_containing, containing: list of Term
    X0, X1, X2: np.ndarray
        Design columns of the terms not containing the target, the target, and the terms containing it
    X: np.ndarray
        The full design
    N01: np.ndarray
        Orthonormal basis of sp(X0, X1)^perp within sp(X)
    X2star: np.ndarray
        X2 X2' N01
    Q3: np.ndarray
        Orthonormal basis of sp(X0, X2star)^perp within sp(X); its projector is P3
    restricted: np.ndarray
        Orthonormal basis of sp(X0, X2star), the restricted model that SS3 compares with sp(X)
    hypothesis: np.ndarray
        X_{1|0} = (I - P_X0) X1
    """

    target: Term
    not_containing: List[Term]
    containing: List[Term]
    X0: np.ndarray
    X1: np.ndarray
    X2: np.ndarray
    X: np.ndarray
    N01: np.ndarray
    X2star: np.ndarray
    Q3: np.ndarray
    restricted: np.ndarray
    hypothesis: np.ndarray

    @property
    def df(self) -> int:
        return self.Q3.shape[1]

    @property
    def P3(self) -> Projector:
        return Projector(self.Q3)


def _adjust(columns: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """(I - QQ') columns"""
    return columns - basis @ (basis.T @ columns)


def _clamp_ss(value: float, scale: float) -> float:
    if value >= 0:
        return value
    if value >= -NEGATIVE_SS_FLOOR * max(1.0, scale):
        return 0.0
    raise ValueError(f"Sum of squares is negative ({value:.6g}) beyond rounding error")


def type3_components(
    design: DesignMatrix, target: Union[str, Term], tol: float = DEFAULT_TOL
) -> TypePartitionMatrices:
    """
    Build the Type III subspace for a target term.

    Gram-Schmidt on (X0, X1, X) gives N01 as the columns contributed by X after (X0, X1).
    Then X2* = X2 X2' N01, and Gram-Schmidt on (X0, X2*, X) gives Q3 as the columns contributed by X
    after (X0, X2*).

    Parameters
    ----------
    design: DesignMatrix
    target: str or Term
        A term of the design's model, e.g. "A" or "A:B"
    tol: float
        Relative rank tolerance passed to Gram-Schmidt

    Returns
    -------
    TypePartitionMatrices
    """
    not_containing, target, containing = partition_for_target(design.model, target)
    X = design.X
    X0 = design.columns(not_containing)
    X1 = design.block(target)
    X2 = design.columns(containing)

    first = gram_schmidt([X0, X1, X], tol=tol, labels=("X0", "X1", "X"))
    N01 = first.columns_from("X")
    X2star = X2 @ (X2.T @ N01)

    second = gram_schmidt([X0, X2star, X], tol=tol, labels=("X0", "X2star", "X"))
    Q3 = second.columns_from("X")
    restricted = second.columns_from("X0", "X2star")

    hypothesis = _adjust(X1, first.columns_from("X0"))
    return TypePartitionMatrices(
        target=target,
        not_containing=not_containing,
        containing=containing,
        X0=X0,
        X1=X1,
        X2=X2,
        X=X,
        N01=N01,
        X2star=X2star,
        Q3=Q3,
        restricted=restricted,
        hypothesis=hypothesis,
    )


def type3_ss(y: np.ndarray, comp: TypePartitionMatrices) -> SSResult:
    """
    Type III sum of squares y'P3 y with df = tr(P3).

    The value is computed as ||Q3'y||^2 and checked against the difference in error SS between the restricted
    model sp(X0, X2*) and the full model sp(X).

    Examples
    --------
    >>> comp = type3_components(design, "A")
    >>> type3_ss(data.y, comp).ss  # 2x2 layout, n = (1, 2, 2, 1), cell means (2, 2, 5, 7)
    21.333333333333332
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (comp.X.shape[0],):
        raise ValueError(f"y must have {comp.X.shape[0]} values, got shape {y.shape}")
    coefs = comp.Q3.T @ y
    ss = float(coefs @ coefs)

    yy = float(y @ y)
    sse_full = float(np.sum(_adjust(y, np.hstack([comp.restricted, comp.Q3])) ** 2))
    sse_restricted = float(np.sum(_adjust(y, comp.restricted) ** 2))
    ss_rmfm = _clamp_ss(sse_restricted - sse_full, yy)
    if abs(ss - ss_rmfm) > 1e-8 * max(1.0, yy):
        _echo(
            f"WARNING: Type III SS for '{comp.target.label}' differs between its two forms: "
            f"{ss:.12g} vs {ss_rmfm:.12g}",
            fg="yellow",
        )
    return SSResult(term=comp.target, ss=ss, df=comp.df, hypothesis=comp.hypothesis)


def type2_ss(
    design: DesignMatrix, target: Union[str, Term], y: np.ndarray, tol: float = DEFAULT_TOL
) -> SSResult:
    """
    Type II sum of squares: y'(P_(X0, X1) - P_X0)y, the extra SS of the target after the terms that don't
    contain it, in the model without the terms that do.
    """
    not_containing, target, _ = partition_for_target(design.model, target)
    y = np.asarray(y, dtype=float)
    X0 = design.columns(not_containing)
    X1 = design.block(target)
    basis = gram_schmidt([X0, X1], tol=tol, labels=("X0", "X1"))
    coefs = basis.columns_from("X1").T @ y
    return SSResult(
        term=target,
        ss=float(coefs @ coefs),
        df=basis.count_from("X1"),
        hypothesis=_adjust(X1, basis.columns_from("X0")),
    )


def _full_basis(design: DesignMatrix, tol: float) -> OrthoBasis:
    return gram_schmidt(
        [b for _, b in design.blocks], tol=tol, labels=tuple(design.terms)
    )


def _error_line(basis: OrthoBasis, y: np.ndarray) -> Tuple[float, int, Optional[float]]:
    sse = float(np.sum(_adjust(y, basis.Q) ** 2))
    dfe = basis.n - basis.rank
    mse = sse / dfe if dfe > 0 else None
    return sse, dfe, mse


def type1_table(design: DesignMatrix, y: np.ndarray, tol: float = DEFAULT_TOL) -> AnovaTable:
    """
    Sequential (Type I) sums of squares in model order, including the intercept row.

    The row SSs and the error SS add up to y'y.
    """
    y = np.asarray(y, dtype=float)
    basis = _full_basis(design, tol)
    sse, dfe, mse = _error_line(basis, y)
    rows = []
    for term in design.terms:
        coefs = basis.columns_from(term).T @ y
        rows.append(SSResult(term=term, ss=float(coefs @ coefs), df=basis.count_from(term)))
    rows = [_with_f(r, sse, dfe) for r in rows]
    return AnovaTable(rows=tuple(rows), sse=sse, dfe=dfe, mse=mse, type_label="I")


def ncp_delta(comp: TypePartitionMatrices, mu: np.ndarray) -> np.ndarray:
    """
    delta3 = P3 mu for a mean vector mu in sp(X).  The SS has non-centrality ||delta3||^2 / sigma^2,
    which is zero exactly when the tested hypothesis holds.
    """
    mu = np.asarray(mu, dtype=float)
    return comp.Q3 @ (comp.Q3.T @ mu)


def ncp(comp: TypePartitionMatrices, mu: np.ndarray, sigma2: float = 1.0) -> float:
    """Non-centrality parameter ||P3 mu||^2 / sigma^2"""
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    delta = ncp_delta(comp, mu)
    return float(delta @ delta) / sigma2


def f_statistic(num: SSResult, sse: float, dfe: int) -> Tuple[float, float]:
    """
    F statistic (ss/df)/(sse/dfe) and its upper tail probability under F(df, dfe).

    The tail is the regularized incomplete beta function I_x(dfe/2, df/2) with x = dfe / (dfe + df f).
    When the error sum of squares is exactly zero but ss is positive, f is infinite and p is 0.

    Examples
    --------
    >>> f_statistic(SSResult(Term(("A",)), ss=4.0, df=1), sse=2.0, dfe=2)
    (4.0, 0.18350341907227397)
    """
    if num.df <= 0 or dfe <= 0:
        raise ValueError(
            f"An F statistic needs positive degrees of freedom (got {num.df} and {dfe})"
        )
    if sse < 0:
        raise ValueError("An F statistic needs a non-negative error sum of squares")
    if sse == 0:
        if num.ss <= 0:
            raise ValueError("The F statistic is undefined when both sums of squares are zero")
        # An exact fit with spare error df
        return float("inf"), 0.0
    f = (num.ss / num.df) / (sse / dfe)
    x = dfe / (dfe + num.df * f)
    p = float(scipy.special.betainc(dfe / 2.0, num.df / 2.0, x))
    return float(f), min(max(p, 0.0), 1.0)


def _with_f(result: SSResult, sse: float, dfe: int) -> SSResult:
    if result.df > 0 and dfe > 0 and (sse > 0 or (sse == 0 and result.ss > 0)):
        f, p = f_statistic(result, sse, dfe)
        return replace(result, f=f, p=p)
    return result


@print_wrap
def anova(
    design: DesignMatrix, y: np.ndarray, type_label: str = "III", tol: float = DEFAULT_TOL
) -> AnovaTable:
    """
    ANOVA table of one SS type for every term of a model

    Parameters
    ----------
    design: DesignMatrix
    y: np.ndarray
        Response vector
    type_label: {'I', 'II', 'III'}
        Type I tables are sequential and include the intercept.  Types II and III have one row per
        non-intercept term.
    tol: float
        Relative rank tolerance

    Returns
    -------
    AnovaTable
        F statistics and p-values are filled in where the term df and the error df are positive

    Examples
    --------
    >>> table = sumsquares.sstypes.anova(design, data.y, "III")
    >>> table.row("A").ss
    21.333333333333332
    """
    if type_label not in SS_TYPES:
        raise ValueError(f"type_label must be one of {', '.join(SS_TYPES)}, got '{type_label}'")
    y = np.asarray(y, dtype=float)
    if y.shape != (design.n_obs,):
        raise ValueError(f"y must have {design.n_obs} values, got shape {y.shape}")
    if type_label == "I":
        table = type1_table(design, y, tol=tol)
    else:
        basis = _full_basis(design, tol)
        sse, dfe, mse = _error_line(basis, y)
        rows = []
        for term in design.terms:
            if term.is_intercept:
                continue
            if type_label == "II":
                result = type2_ss(design, term, y, tol=tol)
            else:
                result = type3_ss(y, type3_components(design, term, tol=tol))
            rows.append(_with_f(result, sse, dfe))
        table = AnovaTable(rows=tuple(rows), sse=sse, dfe=dfe, mse=mse, type_label=type_label)
    _echo(
        f"Type {type_label}: {len(table.rows):,} terms, {table.dfe:,} error df",
        fg="green",
    )
    return table
