"""Normalized second moment from conorms and its closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LatticeError
from .families import (
    DecomposableParams,
    IndecomposableParams,
    _as_decomposable,
    _as_indecomposable,
)
from .lattice import TOL, ConormSet

__all__ = [
    "MomentReport",
    "g_from_conorms",
    "g_indecomposable",
    "g_closed_form",
    "g_decomposable",
    "g_decomposable_printed",
    "G_MCC",
    "G_BCC",
    "G_FCC",
    "G_CUBIC",
    "G_HEX_PRISM",
]

G_MCC = (17.0 + 4.0 * math.sqrt(2.0)) / 288.0
G_BCC = 19.0 / 384.0 * 2.0 ** (2.0 / 3.0)
G_FCC = 2.0 ** (1.0 / 3.0) / 16.0
G_CUBIC = 1.0 / 12.0
G_HEX_PRISM = 5.0 * math.sqrt(3.0) / 162.0 + 1.0 / 36.0


@dataclass(frozen=True)
class MomentReport:
    g_value: float
    method: str
    stderr: float | None = None
    samples: int | None = None
    seed: int | None = None

    def to_json(self) -> dict:
        out = {"g_value": self.g_value, "method": self.method}
        if self.method == "monte-carlo":
            out.update(stderr=self.stderr, samples=self.samples, seed=self.seed)
        return out


def _conorm_sums(p) -> tuple[float, float, float]:
    p01, p02, p03, p12, p13, p23 = p
    s1 = p01 + p02 + p03 + p12 + p13 + p23
    s2 = p01 * p02 * p13 * p23 + p01 * p03 * p12 * p23 + p02 * p03 * p12 * p13
    k = (
        p01 * p02 * p03 * (p12 + p13 + p23)
        + p01 * p12 * p13 * (p02 + p03 + p23)
        + p02 * p12 * p23 * (p01 + p03 + p13)
        + p03 * p13 * p23 * (p01 + p02 + p12)
    )
    return s1, s2, k


def g_from_conorms(conorms: ConormSet, det: float = 1.0) -> MomentReport:
    """G of the lattice with these (reduced) conorms and determinant ``det``.

    ``G = (det*S1 + 2*S2 + K) / (36 det^(4/3))`` where S1 sums the conorms,
    S2 sums products over two complementary pairs and K sums, over each
    superbase vector, the product of its three conorms times the sum of
    the other three.
    """
    values = conorms.values if isinstance(conorms, ConormSet) else tuple(conorms)
    if min(values) < -TOL.conorm_zero:
        raise LatticeError("conorms must be nonnegative (reduce the lattice first)")
    if not det > 0:
        raise LatticeError(f"determinant must be positive, got {det!r}")
    s1, s2, k = _conorm_sums(values)
    g = (det * s1 + 2.0 * s2 + k) / (36.0 * det ** (4.0 / 3.0))
    return MomentReport(g, "conorm-formula")


def _f(a, b):
    ab = a * b
    return (
        3 * ab**5
        - 8 * ab**4 * (a + b)
        + 4 * ab**3 * (a * a + 10 * ab + b * b)
        - 48 * ab**3 * (a + b)
        + 8 * ab**2 * (3 * a * a + 4 * ab + 3 * b * b)
        + 32 * ab**2 * (a + b)
        - 8 * ab * (5 * a * a + 6 * ab + 5 * b * b)
        + 16 * (a * a + ab + b * b)
    )


def g_closed_form(alpha, beta):
    """Closed-form G over the indecomposable family, without domain checks.

    Works elementwise on arrays, and stays finite on the edges
    ``alpha = 1`` / ``beta = 1`` where the family degenerates into the
    decomposable one.
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    out = _f(a, b) / (36.0 * a * b * (2.0 - a * b) ** 4)
    return float(out) if out.ndim == 0 else out


def g_indecomposable(p: IndecomposableParams | tuple[float, float]) -> float:
    p = _as_indecomposable(p)
    return g_closed_form(p.alpha, p.beta)


def g_decomposable(p: DecomposableParams | tuple[float, ...]) -> float:
    """``(1 + (a+b)(2-ab) + 2(ab-1)^(3/2)) / 36``, consistent with the conorm formula."""
    p = _as_decomposable(p)
    a, b = p.alpha, p.beta
    return (1.0 + (a + b) * (2.0 - a * b) + 2.0 * max(a * b - 1.0, 0.0) ** 1.5) / 36.0


def g_decomposable_printed(alpha: float, beta: float) -> float:
    """The decomposable closed form as it appears in print (sign error included).

    Kept only to document the discrepancy: at (1, 1) it gives 7/36.
    """
    a, b = alpha, beta
    return (a * b * (a + b) + 2.0 * max(a * b - 1.0, 0.0) ** 1.5 + 2 * a + 2 * b + 1) / 36.0
