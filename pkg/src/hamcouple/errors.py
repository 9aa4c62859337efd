"""Exception types raised across the package."""


class SchemaError(ValueError):
    """Variables, kinds, grids or axes do not match what an operation expects."""


class StateValidityError(ValueError):
    """A state is structurally fine but physically inadmissible (e.g. rho <= 0)."""


class NumericalFailure(ArithmeticError):
    """A numerical routine produced non-finite values."""


class BlowUpError(RuntimeError):
    """Time integration produced non-finite fields."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite state at step {step}")


class CompatibilityError(ValueError):
    """Matched-pair actions violate a compatibility identity."""

    def __init__(self, identity, index, residual):
        self.identity = identity
        self.index = tuple(int(i) for i in index)
        self.residual = float(residual)
        super().__init__(
            f"{identity} violated: residual {self.residual:.3e} at index {self.index}")


class ParityError(ValueError):
    """Time-reversal parity is undefined for a variable in the schema."""
