import click

from ...internal.utilities import _echo
from ...modules import design, formula, load, sstypes
from ..config import RunConfig, emit, run
from ..parameters import option_data, option_format, option_formula, option_tol


def cmd_anova(config: RunConfig) -> int:
    model = formula.parse_formula(config.formula)
    data = load.load_csv(config.data, model.response, model.factors)
    table = sstypes.anova(
        design.build_design(data, model), data.y, config.ss_type, tol=config.tol
    )
    emit(table, config.output_format)
    _echo(f"Done: Type {config.ss_type} table for {len(table.rows):,} terms", fg="green")
    return 0


@click.command(name="anova", help="Print a Type I, II or III ANOVA table for a model")
@option_data
@option_formula
@click.option(
    "--type",
    "ss_type",
    type=click.Choice(sstypes.SS_TYPES),
    default="III",
    show_default=True,
    help="Type of sums of squares",
)
@option_format
@option_tol
def anova_cli(data, formula, ss_type, output_format, tol):
    config = RunConfig(
        command="anova",
        data=data,
        formula=formula,
        ss_type=ss_type,
        output_format=output_format,
        tol=tol,
    )
    run(cmd_anova, config)
