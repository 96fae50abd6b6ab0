"""
Simulate
========

Seeded random two-factor layouts, and a sweep that runs the equivalence checks on each of them

  .. autosummary::
     :toctree: modules/simulate

     SimulationSettings
     random_layout
     run_one
     simulate

"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..internal.utilities import _echo
from .load import Dataset
from .projector import DEFAULT_TOL
from .twofactor import DEFAULT_VERIFY_TOL, equivalence_report

DEFAULT_SEED = 42
# Bit generator behind numpy.random.default_rng; each run gets its own child of SeedSequence(seed)
PRNG = "PCG64"

MAX_DRAWS = 1000


@dataclass(frozen=True)
class SimulationSettings:
    """
    Parameters of a simulation sweep.  Ranges are inclusive.

    Attributes
    ----------
    runs: int
    a_range, b_range: (int, int)
        Level counts of the two factors
    n_range: (int, int)
        Observations per filled cell
    empty_prob: float
        Probability that a cell is left empty.  Every level always keeps at least one filled cell.
    n_empty: int, optional
        Exact number of empty cells, overriding `empty_prob`
    tol, verify_tol: float
        Rank tolerance and agreement tolerance passed to `equivalence_report`
    jobs: int
        Number of threads (1 runs sequentially, -1 uses every core)
    """

    runs: int = 200
    a_range: Tuple[int, int] = (2, 5)
    b_range: Tuple[int, int] = (2, 5)
    n_range: Tuple[int, int] = (1, 6)
    empty_prob: float = 0.0
    n_empty: Optional[int] = None
    tol: float = DEFAULT_TOL
    verify_tol: float = DEFAULT_VERIFY_TOL
    jobs: int = 1

    def __post_init__(self):
        if self.runs < 0:
            raise ValueError(f"runs must be non-negative, got {self.runs}")
        for name, low_limit in [("a_range", 2), ("b_range", 2), ("n_range", 1)]:
            low, high = getattr(self, name)
            if low < low_limit or high < low:
                raise ValueError(
                    f"{name} must satisfy {low_limit} <= low <= high, got ({low}, {high})"
                )
        if not 0.0 <= self.empty_prob < 1.0:
            raise ValueError(f"empty_prob must be in [0, 1), got {self.empty_prob}")
        if self.n_empty is not None and self.n_empty < 0:
            raise ValueError(f"n_empty must be non-negative, got {self.n_empty}")


def _every_level_filled(filled: np.ndarray) -> bool:
    return bool(filled.any(axis=1).all() and filled.any(axis=0).all())


def _empty_mask(
    rng: np.random.Generator, a: int, b: int, empty_prob: float, n_empty: Optional[int]
) -> np.ndarray:
    if n_empty is not None and n_empty > a * b - max(a, b):
        raise ValueError(f"Can't leave {n_empty} of {a * b} cells empty in an {a} x {b} layout")
    for _ in range(MAX_DRAWS):
        if n_empty is not None:
            empty = np.zeros(a * b, dtype=bool)
            empty[rng.choice(a * b, size=n_empty, replace=False)] = True
            empty = empty.reshape(a, b)
        else:
            empty = rng.random((a, b)) < empty_prob
        if _every_level_filled(~empty):
            return empty
    raise ValueError(f"No {a} x {b} layout with every level filled after {MAX_DRAWS} draws")


def random_layout(
    rng: np.random.Generator,
    a_range: Tuple[int, int] = (2, 5),
    b_range: Tuple[int, int] = (2, 5),
    n_range: Tuple[int, int] = (1, 6),
    empty_prob: float = 0.0,
    n_empty: Optional[int] = None,
) -> Dataset:
    """
    Draw a random two-factor dataset with factors "A" and "B" and a standard normal response "y"

    Levels are named a1..aA and b1..bB.  Rows are shuffled, so level order follows first appearance.

    Examples
    --------
    >>> data = random_layout(np.random.default_rng(42), n_empty=1)
    """
    a = int(rng.integers(a_range[0], a_range[1] + 1))
    b = int(rng.integers(b_range[0], b_range[1] + 1))
    counts = rng.integers(n_range[0], n_range[1] + 1, size=(a, b))
    counts[_empty_mask(rng, a, b, empty_prob, n_empty)] = 0

    cells = [(i, j) for i in range(a) for j in range(b) for _ in range(counts[i, j])]
    order = rng.permutation(len(cells))
    df = pd.DataFrame(
        {
            "y": rng.standard_normal(len(cells)),
            "A": [f"a{cells[k][0] + 1}" for k in order],
            "B": [f"b{cells[k][1] + 1}" for k in order],
        }
    )
    return Dataset.from_frame(df, "y", ["A", "B"])


@dataclass(frozen=True)
class RunResult:
    index: int
    a: int
    b: int
    n_obs: int
    n_empty: int
    passed: bool
    max_discrepancy: float
    failures: List[str] = field(default_factory=list)


def run_one(index: int, seed: np.random.SeedSequence, settings: SimulationSettings) -> RunResult:
    """Draw one layout from its own seed and check it"""
    rng = np.random.default_rng(seed)
    data = random_layout(
        rng,
        a_range=settings.a_range,
        b_range=settings.b_range,
        n_range=settings.n_range,
        empty_prob=settings.empty_prob,
        n_empty=settings.n_empty,
    )
    report = equivalence_report(
        data,
        tol=settings.tol,
        verify_tol=settings.verify_tol,
        seed=int(rng.integers(2 ** 32)),
    )
    a, b = report.counts.shape
    return RunResult(
        index=index,
        a=a,
        b=b,
        n_obs=data.n_obs,
        n_empty=report.n_empty,
        passed=report.passed,
        max_discrepancy=report.max_discrepancy,
        failures=report.failures(),
    )


@dataclass(frozen=True)
class SimulationSummary:
    seed: int
    settings: SimulationSettings
    results: Tuple[RunResult, ...]

    @property
    def n_passed(self) -> int:
        return sum(1 for r in self.results if r.passed)

    @property
    def passed(self) -> bool:
        return self.n_passed == len(self.results)

    @property
    def max_discrepancy(self) -> float:
        return max((r.max_discrepancy for r in self.results), default=0.0)

    def render_text(self) -> str:
        lines = [f"Simulated {len(self.results):,} layouts with seed {self.seed} ({PRNG})"]
        for r in self.results:
            if not r.passed:
                lines.append(
                    f"Run {r.index}: FAIL ({r.a} x {r.b}, {r.n_obs} observations, {r.n_empty} empty cell(s))"
                )
                lines.extend(f"  {reason}" for reason in r.failures)
        lines.append(
            f"Passed {self.n_passed:,}/{len(self.results):,}, "
            f"max relative discrepancy {self.max_discrepancy:.3g}"
        )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "prng": PRNG,
            "runs": len(self.results),
            "passed": self.n_passed,
            "failed": len(self.results) - self.n_passed,
            "max_discrepancy": float(f"{self.max_discrepancy:.12g}"),
            "failures": [
                {"run": r.index, "reasons": r.failures} for r in self.results if not r.passed
            ],
        }


def simulate(settings: SimulationSettings, seed: int = DEFAULT_SEED) -> SimulationSummary:
    """
    Run the two-factor equivalence checks on `settings.runs` random layouts

    Each run draws from its own child of SeedSequence(seed), so results don't depend on the number of jobs
    and are always reported in run order.

    Parameters
    ----------
    settings: SimulationSettings
    seed: int
        Non-negative seed

    Returns
    -------
    SimulationSummary
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    children = np.random.SeedSequence(seed).spawn(settings.runs)
    if settings.jobs == 1 or settings.runs <= 1:
        results = [run_one(idx, s, settings) for idx, s in enumerate(children)]
    else:
        results = Parallel(n_jobs=settings.jobs, prefer="threads")(
            delayed(run_one)(idx, s, settings) for idx, s in enumerate(children)
        )
    summary = SimulationSummary(seed=seed, settings=settings, results=tuple(results))
    _echo(
        f"Done: {summary.n_passed:,} of {len(summary.results):,} runs passed",
        fg="green" if summary.passed else "red",
    )
    return summary
