"""Exception hierarchy shared across the package."""


class CharnError(ValueError):
    """Base class for all data and numeric failures raised by charnorm."""


class ExplosiveSeries(CharnError):
    """The simulated recursion produced a non-finite state."""

    def __init__(self, step: int, value: float):
        self.step = step
        self.value = value
        super().__init__(f"non-finite state {value!r} at simulation step {step}")


class EmptyNeighborhood(CharnError):
    """All kernel weights vanish at an evaluation point."""


class DegenerateWeights(CharnError):
    """The weight function is zero at every lagged observation."""


class NonpositiveVariance(CharnError):
    """A fitted conditional variance is <= 0 at a point carrying positive weight."""

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"fitted variance {value!r} <= 0 at residual index {index}")


class ZeroVariance(CharnError):
    """Parametric residuals are all identical, so they cannot be standardized."""


class DegenerateTau(CharnError):
    """Normalization of the multiplicative-structure test is singular (test inapplicable)."""


class UntabulatedAlpha(CharnError):
    """Requested level has no tabulated critical value."""
