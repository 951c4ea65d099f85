"""Exception types shared across the package.

Exit-code mapping used by the CLI: bad inputs (shape, range, file
contents) are ``UsageError`` subclasses and exit 2; violations detected
at runtime (a law failing on valid inputs, infeasible generation after
resampling) are ``RuntimeViolation`` subclasses and exit 1.
"""


class BKLabError(Exception):
    """Base class for all package errors."""


class UsageError(BKLabError):
    """Invalid input: wrong shapes, bad parameters, corrupt files."""


class RuntimeViolation(BKLabError):
    """A check failed on inputs that passed validation."""


class ShapeMismatchError(UsageError):
    pass


class NonPositiveEntryError(UsageError):
    """A measure entry is zero, negative, or non-finite."""

    def __init__(self, k: int, j: int, value: float):
        self.k = k
        self.j = j
        self.value = value
        super().__init__(f"measure entry at fiber {k}, atom {j} is {value!r}; "
                         "all entries must be strictly positive and finite")


class InvalidPError(UsageError):
    pass


class IndexOutOfRangeError(UsageError):
    pass


class NegativeInputError(UsageError):
    pass


class NotPositiveError(UsageError):
    """Operator has a negative entry where a positive operator is required."""


class NotSubUnitalError(UsageError):
    """Operator violates T(ones) <= ones (a fiber row sums above 1)."""


class NotContractionError(UsageError):
    def __init__(self, p: float, worst: float):
        self.p = p
        self.worst = worst
        super().__init__(f"operator norm {worst!r} exceeds 1 at p={p}")


class NonPositiveWeightError(UsageError):
    pass


class CorruptFileError(UsageError):
    pass


class InfeasibleScalingError(RuntimeViolation):
    """Generator cannot satisfy both endpoint contraction conditions."""


class NoConvergenceError(RuntimeViolation):
    """Iterative norm solver did not converge to the requested tolerance."""


class InvariantViolationError(RuntimeViolation):
    """A law the model guarantees was observed to fail."""
