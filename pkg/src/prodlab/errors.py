"""Exception hierarchy shared by every module."""


class ProdlabError(Exception):
    """Base class for all library errors."""


class PrecisionError(ProdlabError, ValueError):
    """Invalid precision request."""


class DomainError(ProdlabError, ValueError):
    """Argument outside the domain of an operation."""


class PoleError(DomainError):
    """Argument too close to a pole of tan, cot or csc."""

    def __init__(self, fn, x, distance):
        self.fn = fn
        self.x = x
        self.distance = distance
        super().__init__(f"{fn}({x}) is within {distance} of a pole")


class NonConvergenceError(ProdlabError, ArithmeticError):
    """Results did not stabilise under guard-bit escalation."""


class IndexRangeError(ProdlabError, IndexError):
    """Term index outside the product's range."""


class DegenerateFitError(ProdlabError, ArithmeticError):
    """Convergence rows are unusable for a fit (zero or underflowing errors)."""


class ProductOverflowError(ProdlabError, OverflowError):
    """Log-space product too large to exponentiate."""


class IntervalCheckError(ProdlabError, ValueError):
    """An interval enclosure could not certify a radical-tree invariant."""


class UnsupportedSeedError(ProdlabError, ValueError):
    """No exact radical form is tabulated for cos(pi/n)."""


class RadicalSyntaxError(ProdlabError, ValueError):
    """Malformed radical text."""

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")
