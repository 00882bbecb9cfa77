"""Exception types shared across the package."""


class TorusPsidoError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(TorusPsidoError, ValueError):
    """Operands live on incompatible grids, boxes, or fiber dimensions."""


class DomainError(TorusPsidoError, ValueError):
    """An argument left its admissible domain (stencil outside a box, p < 1, ...)."""


class ConfigurationError(TorusPsidoError, ValueError):
    """Grid and box sizes violate a precondition, e.g. the no-aliasing bound N >= 2K+1."""


class SymbolSpecError(TorusPsidoError, ValueError):
    """A symbol specification document could not be parsed.

    Carries the location of the offending field as a dotted path.
    """

    def __init__(self, message: str, location: str = ""):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class SingularResolventError(TorusPsidoError, ArithmeticError):
    """a(k) + lambda was numerically singular at a lattice point."""

    def __init__(self, k, lam, cond=float("inf")):
        self.k = k
        self.lam = lam
        self.cond = cond
        super().__init__(
            f"singular resolvent at k={k}, lambda={lam} (cond~{cond:.3g})"
        )


class StepError(TorusPsidoError, ArithmeticError):
    """A time step's linear solve failed."""

    def __init__(self, step: int, k, message: str = "singular implicit step"):
        self.step = step
        self.k = k
        super().__init__(f"{message} at step {step}, k={k}")
