# flake8: noqa
from .anova import anova_cli
from .verify import verify_cli
from .simulate import simulate_cli
