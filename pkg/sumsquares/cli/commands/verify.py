import click

from ...internal.utilities import _echo
from ...modules import formula, load, twofactor
from ..config import RunConfig, emit, run
from ..parameters import (
    option_data,
    option_format,
    option_formula,
    option_seed,
    option_tol,
    option_verify_tol,
)


def cmd_verify(config: RunConfig) -> int:
    """Exit code 0 when the report confirms every expected equality, 1 otherwise"""
    model = formula.parse_formula(config.formula)
    factors = model.factors
    if len(factors) != 2:
        raise click.UsageError(
            f"verify needs a formula with exactly two factors, got {len(factors)}"
        )
    data = load.load_csv(config.data, model.response, factors)
    report = twofactor.equivalence_report(
        data,
        factors,
        tol=config.tol,
        verify_tol=config.verify_tol,
        seed=config.seed,
    )
    emit(report, config.output_format)
    if report.passed:
        _echo("Done: every sum of squares agrees", fg="green")
        return 0
    _echo(f"Verification failed: {len(report.failures()):,} problem(s)", fg="red")
    return 1


@click.command(
    name="verify",
    help="Compare Type III, RMFM, MWSM and contrast-form sums of squares for a two-factor layout.  "
    "The saturated model of the formula's two factors is always used.",
)
@option_data
@option_formula
@option_format
@option_tol
@option_verify_tol
@option_seed
def verify_cli(data, formula, output_format, tol, verify_tol, seed):
    config = RunConfig(
        command="verify",
        data=data,
        formula=formula,
        output_format=output_format,
        tol=tol,
        verify_tol=verify_tol,
        seed=seed,
    )
    run(cmd_verify, config)
