"""Exception hierarchy."""


class EquivariantInsError(Exception):
    """Base class for all errors raised by this package."""


class NotSkewError(EquivariantInsError, ValueError):
    """Matrix handed to ``vee`` is not antisymmetric."""


class DegenerateMatrixError(EquivariantInsError, ValueError):
    """Matrix is too close to singular to be projected onto SO(3)."""


class SingularScaleError(EquivariantInsError, ValueError):
    """Scale block of a SIM_2(3) element is not invertible."""


class GainDomainError(EquivariantInsError, ValueError):
    """Gains fall outside the admissible set."""


class WindowTooLongError(EquivariantInsError, ValueError):
    """Requested integration window exceeds the sampled series."""


class NumericalBlowupError(EquivariantInsError, ArithmeticError):
    """Integration diverged."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"state diverged at step {step}")


class PathError(EquivariantInsError, OSError):
    """Failure reading or writing an output file."""
