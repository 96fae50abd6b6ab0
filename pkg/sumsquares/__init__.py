# flake8: noqa
from ._version import __version__

from .modules import formula, load, design, projector, sstypes, twofactor, simulate
