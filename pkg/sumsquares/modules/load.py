"""
Load
====

Load observations of a response and its classifying factors

  .. autosummary::
     :toctree: modules/load

     Dataset
     load_csv

"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..internal.utilities import _echo, _validate_columns

# Response values read as missing rather than as numbers
NA_TOKENS = {"", "NA", "N/A", "NaN", "nan", "NULL", "null", "."}


class DataError(ValueError):
    """The data can't be used as a dataset"""


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    A real response observed under combinations of factor levels.

    Factor columns are stored as pandas categoricals whose categories are the levels in order of first appearance.

    Parameters
    ----------
    data: pd.DataFrame
        One float column for the response and one categorical column per factor
    response_name: str
        Name of the response column
    factor_names: tuple of str
        Names of the factor columns, in the order given by the caller
    """

    data: pd.DataFrame
    response_name: str
    factor_names: Tuple[str, ...]

    @classmethod
    def from_frame(
        cls, df: pd.DataFrame, response_name: str, factor_names: Sequence[str]
    ) -> "Dataset":
        """
        Validate a DataFrame and convert it into a Dataset.

        The response must be numeric with no missing values, and every factor label must be present.
        Rows are numbered from 1 (the first row after the header) in error messages.
        """
        factor_names = tuple(factor_names)
        if response_name in factor_names:
            raise DataError(f"'{response_name}' can't be both the response and a factor")
        try:
            _validate_columns(df, [response_name, *factor_names])
        except ValueError as e:
            raise DataError(str(e)) from None
        if len(df) == 0:
            raise DataError("the data has no observations")

        response = _parse_response(df[response_name], response_name)
        columns = {response_name: response}
        for name in factor_names:
            labels = df[name]
            missing = labels.isna() | labels.astype(str).str.strip().isin(NA_TOKENS)
            if missing.any():
                row = int(np.flatnonzero(missing.values)[0]) + 1
                raise DataError(f"factor '{name}' is missing a level in row {row}")
            labels = labels.astype(str).str.strip()
            columns[name] = pd.Categorical(labels, categories=pd.unique(labels))
        data = pd.DataFrame(columns)
        return cls(data=data, response_name=response_name, factor_names=factor_names)

    @property
    def n_obs(self) -> int:
        return len(self.data)

    @property
    def y(self) -> np.ndarray:
        return self.data[self.response_name].to_numpy(dtype=float)

    @property
    def factors(self) -> Dict[str, pd.Categorical]:
        return {name: self.data[name].values for name in self.factor_names}

    def levels(self, name: str) -> List[str]:
        self._check_factor(name)
        return list(self.data[name].cat.categories)

    def n_levels(self, name: str) -> int:
        return len(self.levels(name))

    def codes(self, name: str) -> np.ndarray:
        """Level index (0-based, first-appearance order) of each observation"""
        self._check_factor(name)
        return self.data[name].cat.codes.to_numpy(dtype=int)

    def with_response(self, y: np.ndarray) -> "Dataset":
        """The same classification with a different response vector"""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n_obs,):
            raise DataError(f"response must have {self.n_obs} values, got shape {y.shape}")
        data = self.data.copy()
        data[self.response_name] = y
        return Dataset(data, self.response_name, self.factor_names)

    def describe(self) -> str:
        return f"{self.n_obs:,} observations of {1 + len(self.factor_names):,} variables"

    def _check_factor(self, name: str):
        if name not in self.factor_names:
            raise DataError(f"'{name}' is not a factor of this dataset")


def _parse_response(values: pd.Series, name: str) -> np.ndarray:
    text = values.astype(str).str.strip()
    missing = values.isna() | text.isin(NA_TOKENS)
    if missing.any():
        row = int(np.flatnonzero(missing.values)[0]) + 1
        raise DataError(f"response '{name}' is missing a value in row {row}")
    numbers = pd.to_numeric(text, errors="coerce")
    bad = numbers.isna() | ~np.isfinite(numbers)
    if bad.any():
        row = int(np.flatnonzero(bad.values)[0]) + 1
        raise DataError(
            f"response '{name}' has a non-numeric value in row {row}: '{text.iloc[row - 1]}'"
        )
    return numbers.to_numpy(dtype=float)


def load_csv(
    filename: Union[str, Path], response_name: str, factor_names: Sequence[str], **kwargs
) -> Dataset:
    """
    Load a dataset from a comma-separated file with a header row

    Parameters
    ----------
    filename: str or Path
        UTF-8 CSV file
    response_name: str
        Column holding the (numeric) response
    factor_names: list of str
        Columns holding factor levels.  Values are always read as labels, never as numbers.
    **kwargs:
        Other keyword arguments to pass to pd.read_csv

    Returns
    -------
    Dataset
        Factor levels are ordered by first appearance in the file

    Examples
    --------
    >>> import sumsquares
    >>> data = sumsquares.load.load_csv("fixture.csv", "y", ["A", "B"])
    Loaded 6 observations of 3 variables
    """
    try:
        df = pd.read_csv(
            filename,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
            **kwargs,
        )
    except pd.errors.EmptyDataError:
        raise DataError(f"'{filename}' is an empty file") from None
    data = Dataset.from_frame(df, response_name, factor_names)
    _echo(f"Loaded {data.describe()}")
    return data
