"""Exception hierarchy shared by the services, repositories and the CLI."""

import math


class PmlDesignError(Exception):
    """Root of every error raised by the toolkit."""


class InvalidInputError(PmlDesignError, ValueError):
    """Invalid distribution, table shape, threshold or violated precondition."""


class OutOfSupportError(InvalidInputError):
    """An output column outside S_Y was queried; PML is undefined there."""

    def __init__(self, column: int):
        super().__init__(f"Output column {column} is not in the output support (all entries are zero)")
        self.column = column


class DegenerateBudgetError(InvalidInputError):
    """The PML budget is at or above -log p_min, where every mechanism already satisfies it."""

    def __init__(self, eps: float, p_min: float):
        super().__init__(
            f"PML budget {eps:.6g} is not below -log p_min = {-math.log(p_min):.6g}; the LDP conversion is undefined"
        )
        self.eps = eps
        self.p_min = p_min


class SolverNumericalError(PmlDesignError):
    """The feasibility solver could not certify either feasibility or infeasibility."""


class ScenarioFileError(InvalidInputError):
    """A scenario, mechanism or report file could not be read or failed validation."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason