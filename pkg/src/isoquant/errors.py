"""Exception hierarchy shared by all modules."""


class LatticeError(ValueError):
    """Base class for all errors raised by this package."""


class InvalidGramError(LatticeError):
    """Matrix is not a symmetric positive-definite 3x3 matrix."""


class DegenerateLatticeError(LatticeError):
    """Gram matrix (or conorm set) is singular or numerically so."""


class ReductionError(LatticeError):
    """Selling reduction did not terminate."""


class DomainError(LatticeError):
    """Family parameters fall outside their admissible region."""


class GeometryError(LatticeError):
    """Voronoi cell construction produced an inconsistent polytope."""
