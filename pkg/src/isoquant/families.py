"""Parametrized families of determinant-1 isodual lattices in 3D.

Indecomposable lattices are indexed by ``(alpha, beta)`` in the open unit
square; decomposable ones, ``Z + (2D lattice)``, by ``alpha <= beta`` with
``h = sqrt(alpha * beta - 1)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lattice import ConormSet, GramMatrix

__all__ = [
    "PARAM_MARGIN",
    "IndecomposableParams",
    "DecomposableParams",
    "indecomposable_gram",
    "indecomposable_conorms",
    "decomposable_params",
    "decomposable_gram",
    "decomposable_conorms",
    "mcc_gram",
    "mcc_params",
    "fcc_gram",
    "bcc_gram",
    "cubic_gram",
    "hexagonal_prism_gram",
    "parse_param",
]

PARAM_MARGIN = 1e-9

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

_TOKENS = {
    "2-sqrt2": 2.0 - SQRT2,
    "sqrt3-1": SQRT3 - 1.0,
    "2/sqrt3": 2.0 / SQRT3,
    "1/sqrt3": 1.0 / SQRT3,
    "sqrt2": SQRT2,
    "sqrt3": SQRT3,
}


def parse_param(text: str) -> float:
    """Parse a decimal literal or one of the symbolic tokens.

    >>> parse_param("2-sqrt2") == 2 - math.sqrt(2)
    True
    """
    key = re.sub(r"\s+", "", str(text)).lower()
    if key in _TOKENS:
        return _TOKENS[key]
    try:
        value = float(key)
    except ValueError:
        raise ValueError(
            f"cannot parse parameter {text!r}; use a decimal or one of {sorted(_TOKENS)}"
        ) from None
    if not math.isfinite(value):
        raise ValueError(f"parameter {text!r} is not finite")
    return value


@dataclass(frozen=True)
class IndecomposableParams:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            x = getattr(self, name)
            if not x >= PARAM_MARGIN:
                raise DomainError(f"{name}={x!r} violates {name} > 0")
            if not x <= 1.0 - PARAM_MARGIN:
                raise DomainError(f"{name}={x!r} violates {name} < 1")

    @property
    def gamma(self) -> float:
        return 2.0 - self.alpha * self.beta


@dataclass(frozen=True)
class DecomposableParams:
    """Decomposable parameters; build with :func:`decomposable_params`.

    ``reduced`` tells whether ``2h <= alpha`` holds, i.e. whether the
    triple is the reduced representative of its lattice.
    """

    alpha: float
    beta: float
    h: float

    @property
    def reduced(self) -> bool:
        return 2.0 * self.h <= self.alpha * (1.0 + 1e-12)


def _as_indecomposable(p) -> IndecomposableParams:
    if isinstance(p, IndecomposableParams):
        return p
    a, b = p
    return IndecomposableParams(float(a), float(b))


def _as_decomposable(p) -> DecomposableParams:
    if isinstance(p, DecomposableParams):
        return p
    a, b = p[:2]
    return decomposable_params(a, b)


def _raw_indecomposable_gram(a: float, b: float) -> np.ndarray:
    g = np.array(
        [
            [2 * a / b, -a * b, -a * (2 - b)],
            [-a * b, 2 * b / a, -2 * b * (1 - a) / a],
            [-a * (2 - b), -2 * b * (1 - a) / a, (a * a * b + 2 * a + 2 * b - 4 * a * b) / a],
        ]
    )
    return g / (2 - a * b)


def _raw_indecomposable_conorms(a: float, b: float) -> tuple[float, ...]:
    c = 2 - a * b
    return (
        a * (2 - b) / c,
        a * b / c,
        2 * a * (1 - b) / (b * c),
        2 * b * (1 - a) / (a * c),
        2 * (1 - a) * (1 - b) / c,
        b * (2 - a) / c,
    )


def indecomposable_gram(p: IndecomposableParams | tuple[float, float]) -> GramMatrix:
    p = _as_indecomposable(p)
    return GramMatrix(_raw_indecomposable_gram(p.alpha, p.beta))


def indecomposable_conorms(p: IndecomposableParams | tuple[float, float]) -> ConormSet:
    p = _as_indecomposable(p)
    return ConormSet(_raw_indecomposable_conorms(p.alpha, p.beta))


def decomposable_params(alpha: float, beta: float) -> DecomposableParams:
    """Complete ``(alpha, beta)`` with ``h = sqrt(alpha*beta - 1)``.

    Requires ``0 < alpha <= beta`` and ``alpha*beta >= 1``. Triples with
    ``2h > alpha`` are accepted (they still describe determinant-1
    lattices) and flagged through ``DecomposableParams.reduced``.
    """
    alpha, beta = float(alpha), float(beta)
    if not alpha > 0:
        raise DomainError(f"alpha={alpha!r} violates alpha > 0")
    if not alpha <= beta:
        raise DomainError(f"alpha={alpha!r}, beta={beta!r} violates alpha <= beta")
    disc = alpha * beta - 1.0
    if disc < -1e-12:
        raise DomainError(f"alpha*beta={alpha * beta!r} < 1: no real h")
    h = math.sqrt(max(disc, 0.0))
    return DecomposableParams(alpha, beta, h)


def decomposable_gram(p: DecomposableParams | tuple[float, ...]) -> GramMatrix:
    p = _as_decomposable(p)
    return GramMatrix([[1.0, 0.0, 0.0], [0.0, p.alpha, -p.h], [0.0, -p.h, p.beta]])


def decomposable_conorms(p: DecomposableParams | tuple[float, ...]) -> ConormSet:
    p = _as_decomposable(p)
    return ConormSet((1.0, p.alpha - p.h, p.beta - p.h, 0.0, 0.0, p.h))


def mcc_params() -> IndecomposableParams:
    return IndecomposableParams(2.0 - SQRT2, 2.0 - SQRT2)


def mcc_gram() -> GramMatrix:
    """The mean-centered cuboidal lattice in its symmetric basis."""
    d, e = 1.0 + SQRT2, 1.0 - SQRT2
    return GramMatrix(0.5 * np.array([[d, -1.0, -1.0], [-1.0, d, e], [-1.0, e, d]]))


def cubic_gram() -> GramMatrix:
    return GramMatrix(np.eye(3))


def fcc_gram(normalized: bool = True) -> GramMatrix:
    g = GramMatrix([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])
    return g.normalized() if normalized else g


def bcc_gram(normalized: bool = True) -> GramMatrix:
    g = GramMatrix([[3.0, -1.0, -1.0], [-1.0, 3.0, -1.0], [-1.0, -1.0, 3.0]])
    return g.normalized() if normalized else g


def hexagonal_prism_gram() -> GramMatrix:
    """``Z + 3^(-1/4) A2``, determinant 1."""
    s = 1.0 / SQRT3
    return GramMatrix([[1.0, 0.0, 0.0], [0.0, 2 * s, -s], [0.0, -s, 2 * s]])
