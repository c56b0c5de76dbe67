"""Real-root isolation on an interval by sign changes, bisection and Newton."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SEXTIC",
    "QUADRATIC_MCC",
    "QUADRATIC_EDGE",
    "PolynomialRootSet",
    "isolate_real_roots",
    "sextic_roots",
]

# coefficients, highest degree first
SEXTIC = (57.0, -220.0, -102.0, 1448.0, -1860.0, 832.0, -152.0)
QUADRATIC_MCC = (1.0, -4.0, 2.0)  # root 2 - sqrt(2)
QUADRATIC_EDGE = (1.0, 2.0, -2.0)  # root sqrt(3) - 1


@dataclass(frozen=True)
class PolynomialRootSet:
    coefficients: tuple[float, ...]
    interval: tuple[float, float]
    roots_in_interval: tuple[float, ...]
    residuals: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.roots_in_interval)


def _horner(c, x: float) -> float:
    acc = 0.0
    for a in c:
        acc = acc * x + a
    return acc


def _bisect(c, lo: float, hi: float, flo: float) -> float:
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = _horner(c, mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def isolate_real_roots(coefficients, lo: float, hi: float, subdivisions: int = 1 << 20) -> PolynomialRootSet:
    """Real roots of odd multiplicity strictly inside ``(lo, hi)``.

    The interval is cut into ``subdivisions`` equal pieces; each piece whose
    endpoint values change sign is bisected to machine precision and the
    result receives one Newton step, kept only if it lowers the residual.
    Even-multiplicity roots (no sign change) are not detected.
    """
    if not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    c = tuple(float(a) for a in coefficients)
    dc = tuple(np.polyder(np.array(c)).tolist())
    x = np.linspace(lo, hi, subdivisions + 1)
    y = np.polyval(np.array(c), x)
    roots = []
    exact = np.nonzero(y[1:-1] == 0.0)[0] + 1
    roots.extend(float(x[k]) for k in exact)
    for k in np.nonzero(y[:-1] * y[1:] < 0)[0]:
        r = _bisect(c, float(x[k]), float(x[k + 1]), float(y[k]))
        d = _horner(dc, r)
        if d != 0.0:
            polished = r - _horner(c, r) / d
            if lo < polished < hi and abs(_horner(c, polished)) < abs(_horner(c, r)):
                r = polished
        roots.append(r)
    roots = sorted(r for r in roots if lo < r < hi)
    return PolynomialRootSet(
        coefficients=c,
        interval=(float(lo), float(hi)),
        roots_in_interval=tuple(roots),
        residuals=tuple(abs(_horner(c, r)) for r in roots),
    )


def sextic_roots(interval: tuple[float, float] = (0.0, 1.0)) -> PolynomialRootSet:
    """Roots of the degree-6 factor of the critical-point eliminant."""
    lo, hi = interval
    return isolate_real_roots(SEXTIC, lo, hi)
