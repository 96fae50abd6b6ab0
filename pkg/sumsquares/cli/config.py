import json
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import click

from ..modules.projector import DEFAULT_TOL
from ..modules.simulate import DEFAULT_SEED
from ..modules.twofactor import DEFAULT_VERIFY_TOL

COMMANDS = ("anova", "verify", "simulate")


@dataclass(frozen=True)
class RunConfig:
    """
    Everything one CLI command needs, collected from its options.

    The seed defaults to DEFAULT_SEED (42) so that runs are reproducible without passing one.
    """

    command: str
    data: Optional[str] = None
    formula: Optional[str] = None
    ss_type: str = "III"
    output_format: str = "text"
    seed: int = DEFAULT_SEED
    tol: float = DEFAULT_TOL
    verify_tol: float = DEFAULT_VERIFY_TOL
    runs: int = 200
    a_range: Tuple[int, int] = (2, 5)
    b_range: Tuple[int, int] = (2, 5)
    n_range: Tuple[int, int] = (1, 6)
    empty_prob: float = 0.0
    n_empty: Optional[int] = None
    jobs: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"command must be one of {', '.join(COMMANDS)}, got '{self.command}'")


def emit(result, output_format: str):
    """Write a result object (with `to_dict` and `render_text`) to standard output"""
    if output_format == "json":
        click.echo(json.dumps(result.to_dict(), indent=2))
    else:
        click.echo(result.render_text(), nl=False)


def run(cmd: Callable[[RunConfig], int], config: RunConfig):
    """
    Run a command and exit with its code.
    Domain errors (ValueError) exit with 1 and their message on the error stream.
    """
    try:
        code = cmd(config)
    except click.ClickException:
        raise
    except ValueError as e:
        raise click.ClickException(str(e)) from None
    click.get_current_context().exit(code)
