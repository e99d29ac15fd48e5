"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class ZeroFrequency(ValueError):
    """Raised where an operation needs a nonzero frequency."""


class PreconditionViolation(ValueError):
    """Raised when a frequency lies in the wrong angle class for an operation."""


class DegenerateCoefficient(ValueError):
    pass


class InternalConsistencyError(RuntimeError):
    """Something that cannot happen for the piecewise-linear model happened."""


class PrecisionBudgetError(ValueError):
    def __init__(self, required_bits: int, available_bits: int):
        self.required_bits = required_bits
        self.available_bits = available_bits
        super().__init__(
            f"precision budget too small: need at least {required_bits} fractional "
            f"bits, have {available_bits}"
        )
