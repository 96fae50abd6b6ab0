import click

from ..modules.projector import DEFAULT_TOL
from ..modules.simulate import DEFAULT_SEED
from ..modules.twofactor import DEFAULT_VERIFY_TOL
from .custom_types import LevelRangeParamType

# File IO
INPUT_FILE = click.Path(exists=True, file_okay=True, dir_okay=False, readable=True)

FACTOR_LEVELS = LevelRangeParamType(minimum=2)
CELL_SIZES = LevelRangeParamType(minimum=1)

option_data = click.option(
    "--data",
    "-d",
    type=INPUT_FILE,
    required=True,
    help="Comma-separated file with a header row.  Columns named in the formula are used.",
)
option_formula = click.option(
    "--formula",
    "-f",
    type=click.STRING,
    required=True,
    help='Model formula, e.g. "y ~ A*B"',
)
option_format = click.option(
    "--format",
    "output_format",
    type=click.Choice(["text", "json"]),
    default="text",
    show_default=True,
    help="Output format on standard output",
)
option_tol = click.option(
    "--tol",
    type=click.FloatRange(min=0, min_open=True),
    default=DEFAULT_TOL,
    show_default=True,
    help="Relative tolerance for rank decisions",
)
option_verify_tol = click.option(
    "--verify-tol",
    type=click.FloatRange(min=0, min_open=True),
    default=DEFAULT_VERIFY_TOL,
    show_default=True,
    help="Largest relative discrepancy accepted between sums of squares that should agree",
)
option_seed = click.option(
    "--seed",
    type=click.IntRange(min=0),
    default=DEFAULT_SEED,
    show_default=True,
    help="Seed for the random number generator (PCG64)",
)
