# flake8: noqa
from .cli import entry_point
from .cli import anova_cli, simulate_cli, verify_cli

import sys

sys.tracebacklimit = 0
del sys
