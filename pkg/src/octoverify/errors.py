"""Exception hierarchy."""


class OctoverifyError(Exception):
    """Base class for all errors raised by the package."""


class LevelMismatchError(OctoverifyError, ValueError):
    pass


class DomainError(OctoverifyError, ValueError):
    """An input violates the precondition of an operation."""


class ChartDegeneracyError(OctoverifyError, ArithmeticError):
    pass


class StencilError(OctoverifyError, ValueError):
    """A finite-difference stencil leaves the domain on a non-periodic axis."""


class ConvergenceError(OctoverifyError, ArithmeticError):
    pass


class SpectrumNotConstantError(OctoverifyError, ValueError):
    """Gram eigen-directions are not globally defined on the grid."""


class SpecError(OctoverifyError, ValueError):
    """Malformed or invalid manifold spec string.

    ``position`` is the character offset of the problem, or None for
    arithmetic validation errors that concern the whole spec.
    """

    def __init__(self, message, text=None, position=None):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(str(self))

    def __str__(self):
        if self.text is None or self.position is None:
            return self.message
        caret = " " * self.position + "^"
        return f"{self.message} at position {self.position}\n  {self.text}\n  {caret}"


class RefusedError(OctoverifyError, ValueError):
    """The input lies outside the hypotheses a check is designed for."""
