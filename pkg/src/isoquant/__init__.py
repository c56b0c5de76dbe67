"""Normalized second moment, packing and covering of three-dimensional isodual lattices."""

from .errors import (
    DegenerateLatticeError,
    DomainError,
    GeometryError,
    InvalidGramError,
    LatticeError,
    ReductionError,
)
from .families import *  # noqa: F401,F403
from .lattice import *  # noqa: F401,F403
from .moments import *  # noqa: F401,F403
from .montecarlo import closest_point, closest_points, second_moment_mc
from .optimizer import *  # noqa: F401,F403
from .report import LatticeReport, dumps, lattice_report
from .roots import PolynomialRootSet, isolate_real_roots, sextic_roots
from .verify import VerificationReport, verify_paper
from .voronoi import VoronoiCell, second_moment_exact, voronoi_cell

__version__ = "0.1.0"
