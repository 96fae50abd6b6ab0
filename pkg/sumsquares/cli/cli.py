import click

from sumsquares import __version__

from .commands import anova_cli, simulate_cli, verify_cli


@click.group()
@click.version_option(version=__version__)
def entry_point():
    pass


entry_point.add_command(anova_cli)
entry_point.add_command(verify_cli)
entry_point.add_command(simulate_cli)
