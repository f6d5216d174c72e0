"""Exception hierarchy shared by every fairway module."""


class FairwayError(Exception):
    """Base class for all errors raised by fairway."""


class EmptyAllocation(FairwayError, ValueError):
    pass


class InvalidValue(FairwayError, ValueError):
    pass


class DegenerateMean(FairwayError, ValueError):
    pass


class InvalidSpec(FairwayError, ValueError):
    pass


class InvalidFlow(FairwayError, ValueError):
    pass


class NoConvergence(FairwayError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class UnknownMetric(FairwayError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown metric"


class DegenerateEfficiency(FairwayError, ValueError):
    pass


class DegenerateMetric(FairwayError, ValueError):
    pass


class ConfigError(FairwayError, ValueError):
    """Invalid experiment configuration; carries the offending field and line."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field '{field}'")
        if line:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
