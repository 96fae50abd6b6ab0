from functools import wraps
from typing import Iterable, List, Optional

import click
import numpy as np
import pandas as pd


def _echo(message: str, fg: Optional[str] = None):
    """Log a message on the error stream so stdout only carries results"""
    if fg is None:
        click.echo(message, err=True)
    else:
        click.echo(click.style(message, fg=fg), err=True)


def print_wrap(func):
    @wraps(func)
    def wrapped(*args, **kwargs):
        _echo("=" * 80)
        _echo(f"Running {func.__name__}")
        _echo("-" * 80)
        result = func(*args, **kwargs)
        _echo("=" * 80)
        return result

    return wrapped


def _validate_columns(data: pd.DataFrame, names: Iterable[str]) -> List[str]:
    """Return the requested column names, raising if any are not in the data"""
    names = list(names)
    missing = [n for n in names if n not in data.columns]
    if len(missing) > 0:
        raise ValueError(f"missing column(s): {', '.join(missing)}")
    return names


def _hstack(blocks: List[np.ndarray], n_rows: int) -> np.ndarray:
    """Column-wise concatenation that tolerates an empty list (n x 0 result)"""
    if len(blocks) == 0:
        return np.zeros((n_rows, 0))
    return np.hstack(blocks)


def _sig(value: Optional[float], digits: int = 12) -> Optional[float]:
    """Round to a number of significant digits, passing through undefined values"""
    if value is None or not np.isfinite(value):
        return None
    return float(f"{value:.{digits}g}")


def _fmt(value: Optional[float], digits: int = 12) -> str:
    """Text form of a number matching `_sig`; infinite values print as inf"""
    if value is None or np.isnan(value):
        return "NA"
    return f"{value:.{digits}g}"
