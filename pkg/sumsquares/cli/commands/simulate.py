import click

from ...modules import simulate
from ..config import RunConfig, emit, run
from ..parameters import (
    CELL_SIZES,
    FACTOR_LEVELS,
    option_format,
    option_seed,
    option_tol,
    option_verify_tol,
)


def cmd_simulate(config: RunConfig) -> int:
    settings = simulate.SimulationSettings(
        runs=config.runs,
        a_range=config.a_range,
        b_range=config.b_range,
        n_range=config.n_range,
        empty_prob=config.empty_prob,
        n_empty=config.n_empty,
        tol=config.tol,
        verify_tol=config.verify_tol,
        jobs=config.jobs,
    )
    summary = simulate.simulate(settings, seed=config.seed)
    emit(summary, config.output_format)
    return 0 if summary.passed else 1


@click.command(
    name="simulate",
    help="Run the two-factor verification on seeded random layouts and summarize the results",
)
@click.option("--runs", type=click.IntRange(min=0), default=200, show_default=True)
@option_seed
@click.option(
    "--a-levels", "a_range", type=FACTOR_LEVELS, default="2-5", show_default=True,
    help="Range of level counts for factor A",
)
@click.option(
    "--b-levels", "b_range", type=FACTOR_LEVELS, default="2-5", show_default=True,
    help="Range of level counts for factor B",
)
@click.option(
    "--cell-size", "n_range", type=CELL_SIZES, default="1-6", show_default=True,
    help="Range of observations per filled cell",
)
@click.option(
    "--empty-prob",
    type=click.FloatRange(min=0, max=1, max_open=True),
    default=0.0,
    show_default=True,
    help="Probability that a cell is empty",
)
@click.option(
    "--empty-cells",
    "n_empty",
    type=click.IntRange(min=0),
    default=None,
    help="Exact number of empty cells per layout (overrides --empty-prob)",
)
@click.option(
    "--jobs", type=click.IntRange(min=-1), default=1, show_default=True,
    help="Number of threads (-1 for all cores)",
)
@option_format
@option_tol
@option_verify_tol
def simulate_cli(
    runs, seed, a_range, b_range, n_range, empty_prob, n_empty, jobs, output_format, tol, verify_tol
):
    if jobs == 0:
        raise click.BadParameter("must not be 0", param_hint="--jobs")
    config = RunConfig(
        command="simulate",
        seed=seed,
        runs=runs,
        a_range=a_range,
        b_range=b_range,
        n_range=n_range,
        empty_prob=empty_prob,
        n_empty=n_empty,
        jobs=jobs,
        output_format=output_format,
        tol=tol,
        verify_tol=verify_tol,
    )
    run(cmd_simulate, config)
