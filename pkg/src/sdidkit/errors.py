"""Exception hierarchy shared by all sdidkit modules."""


class SdidkitError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 1


class ParseError(SdidkitError):
    """Malformed input: empty file, missing column, unparseable value."""


class BalanceError(SdidkitError):
    """A (unit, period) cell is missing from an otherwise rectangular panel."""

    def __init__(self, unit, period):
        self.unit = unit
        self.period = period
        super().__init__(f"missing observation for unit {unit!r} in period {period}")


class DuplicateError(SdidkitError):
    """The same (unit, period) cell appears more than once."""

    def __init__(self, unit, period):
        self.unit = unit
        self.period = period
        super().__init__(f"duplicate observation for unit {unit!r} in period {period}")


class AssignmentError(SdidkitError):
    """Treatment flag is not constant within a unit, or the assignment is degenerate."""


class DegenerateOutcomeError(SdidkitError):
    """An outcome value makes a transform or ratio undefined."""


class ConfigError(SdidkitError):
    """Invalid run configuration (subsets, windows, missing periods...)."""


class DimensionError(SdidkitError):
    """Array shapes do not agree."""


class ConvergenceError(SdidkitError):
    """The weight solver hit its iteration cap before certifying optimality."""

    exit_code = 2

    def __init__(self, message, objective=float("nan"), gap=float("nan"), iterations=0):
        self.objective = objective
        self.gap = gap
        self.iterations = iterations
        super().__init__(
            f"{message} (objective={objective:.6g}, gap={gap:.3g}, iterations={iterations})"
        )


class InferenceError(SdidkitError):
    """Placebo inference cannot be carried out or failed too often."""

    exit_code = 2

    def __init__(self, message, failures=0):
        self.failures = failures
        super().__init__(message)
