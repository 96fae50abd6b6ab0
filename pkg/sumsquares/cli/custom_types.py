import click


class LevelRangeParamType(click.ParamType):
    """
    An inclusive integer range written "LOW-HIGH" (or a single number for LOW = HIGH), converted to a tuple
    """

    name = "range"

    def __init__(self, minimum: int = 1):
        self.minimum = minimum

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        parts = str(value).split("-")
        try:
            numbers = [int(p) for p in parts]
        except ValueError:
            self.fail(f"'{value}' is not a range like 2-5", param, ctx)
        if len(numbers) == 1:
            numbers = numbers * 2
        if len(numbers) != 2:
            self.fail(f"'{value}' is not a range like 2-5", param, ctx)
        low, high = numbers
        if low < self.minimum or high < low:
            self.fail(f"'{value}' must satisfy {self.minimum} <= low <= high", param, ctx)
        return low, high
