"""Critical points of G over the isodual families.

The indecomposable closed form is a rational function of ``p = alpha*beta``
and ``s = alpha + beta``; gradients and Hessians are assembled from its
``(p, s)`` partials by the chain rule.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import DomainError
from .families import IndecomposableParams, _as_indecomposable
from .moments import G_MCC, g_closed_form
from .roots import QUADRATIC_EDGE, QUADRATIC_MCC, isolate_real_roots, sextic_roots

__all__ = [
    "CriticalPoint",
    "CriticalPointList",
    "NineCandidateRow",
    "EdgeScanResult",
    "DecomposableScanResult",
    "gradient_raw",
    "hessian_raw",
    "grad_g",
    "hessian_g",
    "classify",
    "find_critical_points",
    "nine_candidate_check",
    "format_nine_table",
    "boundary_edge_scan",
    "decomposable_gradient",
    "decomposable_hessian",
    "decomposable_region_scan",
]

log = logging.getLogger(__name__)

GRAD_MARGIN = 1e-6
EIG_TOL = 1e-10
DEDUP_RADIUS = 1e-6
BOUNDARY_TOL = 1e-8
MAX_HALVINGS = 30


@dataclass(frozen=True)
class CriticalPoint:
    params: tuple[float, float]
    grad_norm: float
    hessian: tuple[tuple[float, float], tuple[float, float]]
    classification: str
    g_value: float

    @property
    def alpha(self) -> float:
        return self.params[0]

    @property
    def beta(self) -> float:
        return self.params[1]

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "grad_norm": self.grad_norm,
            "hessian": [list(r) for r in self.hessian],
            "classification": self.classification,
            "g_value": self.g_value,
        }


class CriticalPointList(list):
    """List of critical points plus bookkeeping about the search."""

    def __init__(self, points=(), n_starts: int = 0, n_converged: int = 0):
        super().__init__(points)
        self.n_starts = n_starts
        self.n_converged = n_converged


# ---------------------------------------------------------------- indecomposable


def _pq_partials(a, b):
    p = a * b
    s = a + b
    f = (3 * p**5 + 32 * p**4 - 8 * p**4 * s + 4 * p**3 * s**2 - 48 * p**3 * s
         - 16 * p**3 + 24 * p**2 * s**2 + 32 * p**2 * s + 32 * p**2 - 40 * p * s**2
         + 16 * s**2 - 16 * p)
    fp = (15 * p**4 + 128 * p**3 - 32 * p**3 * s + 12 * p**2 * s**2 - 144 * p**2 * s
          - 48 * p**2 + 48 * p * s**2 + 64 * p * s + 64 * p - 40 * s**2 - 16)
    fs = -8 * p**4 + 8 * p**3 * s - 48 * p**3 + 48 * p**2 * s + 32 * p**2 - 80 * p * s + 32 * s
    fpp = (60 * p**3 - 96 * p**2 * s + 384 * p**2 + 24 * p * s**2 - 288 * p * s - 96 * p
           + 48 * s**2 + 64 * s + 64)
    fps = -32 * p**3 + 24 * p**2 * s - 144 * p**2 + 96 * p * s + 64 * p - 80 * s
    fss = 8 * p**3 + 48 * p**2 - 80 * p + 32

    c = 2 - p
    q = 1.0 / (36 * p * c**4)
    r = -1.0 / p + 4.0 / c
    q1 = q * r
    q2 = q * (r * r + 1.0 / p**2 + 4.0 / c**2)

    g_p = fp * q + f * q1
    g_s = fs * q
    g_pp = fpp * q + 2 * fp * q1 + f * q2
    g_ps = fps * q + fs * q1
    g_ss = fss * q
    return g_p, g_s, g_pp, g_ps, g_ss


def gradient_raw(alpha, beta) -> np.ndarray:
    """Analytic ``(dG/dalpha, dG/dbeta)``; no domain checks, broadcasts."""
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    g_p, g_s, *_ = _pq_partials(a, b)
    return np.stack([b * g_p + g_s, a * g_p + g_s], axis=-1)


def hessian_raw(alpha, beta) -> np.ndarray:
    """Analytic Hessian, shape ``(..., 2, 2)``."""
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    g_p, _, g_pp, g_ps, g_ss = _pq_partials(a, b)
    haa = b * b * g_pp + 2 * b * g_ps + g_ss
    hbb = a * a * g_pp + 2 * a * g_ps + g_ss
    hab = g_p + a * b * g_pp + (a + b) * g_ps + g_ss
    return np.stack([np.stack([haa, hab], -1), np.stack([hab, hbb], -1)], -2)


def _check_interior(p: IndecomposableParams) -> None:
    for name in ("alpha", "beta"):
        x = getattr(p, name)
        if not GRAD_MARGIN <= x <= 1 - GRAD_MARGIN:
            raise DomainError(f"{name}={x!r} is within {GRAD_MARGIN} of the boundary")


def grad_g(p: IndecomposableParams | tuple[float, float]) -> tuple[float, float]:
    p = _as_indecomposable(p)
    _check_interior(p)
    ga, gb = gradient_raw(p.alpha, p.beta)
    return float(ga), float(gb)


def hessian_g(p: IndecomposableParams | tuple[float, float]) -> np.ndarray:
    p = _as_indecomposable(p)
    _check_interior(p)
    return hessian_raw(p.alpha, p.beta)


def classify(hessian, on_boundary: bool = False) -> str:
    if on_boundary:
        return "boundary-constrained"
    h = np.asarray(hessian, dtype=float)
    if not np.all(np.isfinite(h)):
        return "unclassified"
    lo, hi = np.linalg.eigvalsh(h)
    if lo > EIG_TOL:
        return "local-min"
    if hi < -EIG_TOL:
        return "local-max"
    if lo < -EIG_TOL and hi > EIG_TOL:
        return "saddle"
    return "unclassified"


def _damped_newton(grad_fn, hess_fn, inside, starts: np.ndarray, tol: float, max_iter: int = 100):
    """Vectorized Newton on ``grad = 0`` with step halving.

    A step is accepted once it stays ``inside`` and lowers the gradient
    norm; after ``MAX_HALVINGS`` failed halvings the start stops moving.
    Iteration continues past ``tol`` until the gradient stops decreasing,
    so converged points are polished to round-off level.
    Returns ``(points, grad_norms, converged_mask)``.
    """
    x = np.array(starts, dtype=float)
    g = grad_fn(x[:, 0], x[:, 1])
    gn = np.linalg.norm(g, axis=1)
    alive = np.isfinite(gn)
    for _ in range(max_iter):
        act = np.nonzero(alive & (gn > 0))[0]
        if len(act) == 0:
            break
        h = hess_fn(x[act, 0], x[act, 1])
        det = np.linalg.det(h)
        step = -g[act]
        good = np.isfinite(det) & (np.abs(det) > 1e-300)
        step[good] = -np.linalg.solve(h[good], g[act][good][..., None])[..., 0]
        lam = np.ones(len(act))
        pending = np.arange(len(act))
        for _ in range(MAX_HALVINGS + 1):
            trial = x[act[pending]] + lam[pending, None] * step[pending]
            ok = inside(trial[:, 0], trial[:, 1])
            gt = np.full_like(trial, np.nan)
            if ok.any():
                gt[ok] = grad_fn(trial[ok, 0], trial[ok, 1])
            gtn = np.linalg.norm(gt, axis=1)
            better = ok & (gtn < gn[act[pending]])
            idx = act[pending[better]]
            x[idx], g[idx], gn[idx] = trial[better], gt[better], gtn[better]
            pending = pending[~better]
            if len(pending) == 0:
                break
            lam[pending] *= 0.5
        alive[act[pending]] = False
    return x, gn, gn < tol


def _dedup(points: list[CriticalPoint]) -> list[CriticalPoint]:
    points = sorted(points, key=lambda c: (c.g_value, c.alpha, c.beta))
    kept: list[CriticalPoint] = []
    for c in points:
        if all(math.dist(c.params, k.params) > DEDUP_RADIUS for k in kept):
            kept.append(c)
    return kept


def _interior_point(a: float, b: float) -> CriticalPoint:
    h = hessian_raw(a, b)
    return CriticalPoint(
        params=(float(a), float(b)),
        grad_norm=float(np.linalg.norm(gradient_raw(a, b))),
        hessian=tuple(tuple(float(x) for x in row) for row in h),
        classification=classify(h),
        g_value=g_closed_form(a, b),
    )


def find_critical_points(
    region: tuple[tuple[float, float], tuple[float, float]] = ((0.01, 0.99), (0.01, 0.99)),
    grid_n: int = 40,
    tol: float = 1e-10,
) -> CriticalPointList:
    """Multi-start damped Newton search for interior gradient zeros.

    Starts form a ``grid_n x grid_n`` grid spanning ``region``; iterates may
    roam the whole open square but only converged points inside ``region``
    are reported, deduplicated and sorted by G.
    """
    (alo, ahi), (blo, bhi) = region
    if not (1e-4 <= alo < ahi <= 1 - 1e-4 and 1e-4 <= blo < bhi <= 1 - 1e-4):
        raise DomainError(f"region {region} must lie in the open unit square with margin 1e-4")
    if grid_n < 20:
        raise ValueError(f"grid_n must be >= 20, got {grid_n}")
    aa, bb = np.meshgrid(np.linspace(alo, ahi, grid_n), np.linspace(blo, bhi, grid_n), indexing="ij")
    starts = np.column_stack([aa.ravel(), bb.ravel()])

    def inside(a, b):
        return (a > GRAD_MARGIN) & (a < 1 - GRAD_MARGIN) & (b > GRAD_MARGIN) & (b < 1 - GRAD_MARGIN)

    x, _, conv = _damped_newton(gradient_raw, hessian_raw, inside, starts, tol)
    in_region = (x[:, 0] >= alo) & (x[:, 0] <= ahi) & (x[:, 1] >= blo) & (x[:, 1] <= bhi)
    found = [_interior_point(a, b) for a, b in x[conv & in_region]]
    out = CriticalPointList(_dedup(found), n_starts=len(starts), n_converged=int(conv.sum()))
    log.info(
        "critical-point search: %d starts, %d converged, %d dropped, %d distinct in region",
        len(starts), out.n_converged, len(starts) - out.n_converged, len(out),
    )
    return out


# ---------------------------------------------------------------- nine candidates


@dataclass(frozen=True)
class NineCandidateRow:
    alpha: float
    beta: float
    alpha_label: str
    beta_label: str
    grad_norm: float
    both_vanish: bool


def nine_candidate_check(threshold: float = 1e-8) -> list[NineCandidateRow]:
    """Gradient at every pair drawn from the eliminant's roots in (0, 1).

    The candidate set is the root of each quadratic factor together with
    the sextic root, all recomputed by the same isolator.
    """
    values = [
        ("2-sqrt2", _unit_root(QUADRATIC_MCC)),
        ("sqrt3-1", _unit_root(QUADRATIC_EDGE)),
        ("r6", sextic_roots((0.0, 1.0)).roots_in_interval[0]),
    ]
    rows = []
    for la, a in values:
        for lb, b in values:
            gn = float(np.linalg.norm(gradient_raw(a, b)))
            rows.append(NineCandidateRow(a, b, la, lb, gn, gn < threshold))
    return rows


def _unit_root(coeffs) -> float:
    roots = isolate_real_roots(coeffs, 0.0, 1.0).roots_in_interval
    if len(roots) != 1:
        raise RuntimeError(f"expected one root in (0, 1), found {roots}")
    return roots[0]


def format_nine_table(rows: list[NineCandidateRow]) -> str:
    head = f"{'alpha':>10} {'beta':>10} {'|grad G|':>12}  vanish"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(
            f"{r.alpha_label:>10} {r.beta_label:>10} {r.grad_norm:12.3e}  {'yes' if r.both_vanish else 'no'}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------- beta = 1 edge


@dataclass(frozen=True)
class EdgeScanResult:
    point: CriticalPoint
    stationary_alphas: tuple[float, ...]
    descent_direction: tuple[float, float]
    descent_step: float
    descent_delta: float

    @property
    def is_local_minimum(self) -> bool:
        return not self.descent_delta < -1e-9

    def to_json(self) -> dict:
        return {
            "point": self.point.to_json(),
            "stationary_alphas": list(self.stationary_alphas),
            "descent_direction": list(self.descent_direction),
            "descent_step": self.descent_step,
            "descent_delta": self.descent_delta,
            "is_local_minimum": self.is_local_minimum,
        }


def _sign_change_roots(fn, lo: float, hi: float, n: int) -> list[float]:
    x = np.linspace(lo, hi, n)
    y = np.array([fn(t) for t in x])
    roots = [float(x[k]) for k in np.nonzero(y == 0.0)[0]]
    for k in np.nonzero(y[:-1] * y[1:] < 0)[0]:
        roots.append(brentq(fn, x[k], x[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return sorted(roots)


def _best_descent(fn, x0: np.ndarray, step: float, angles: np.ndarray) -> tuple[np.ndarray, float]:
    f0 = fn(*x0)
    best_d, best = None, np.inf
    for th in angles:
        d = np.array([math.cos(th), math.sin(th)])
        val = fn(*(x0 + step * d)) - f0
        if val < best:
            best_d, best = d, val
    return best_d, float(best)


def boundary_edge_scan(step: float = 1e-3, n_grid: int = 2000) -> EdgeScanResult:
    """Stationary point of G restricted to the edge ``beta = 1``.

    The closed form extends smoothly to the edge. Non-minimality in the
    two-parameter problem is shown by the best of 360 probe directions
    pointing into the square (``beta`` decreasing) at distance ``step``.
    """
    def edge_slope(a):
        return float(gradient_raw(a, 1.0)[0])

    alphas = _sign_change_roots(edge_slope, 0.01, 0.99, n_grid)
    if len(alphas) != 1:
        raise RuntimeError(f"expected a unique edge stationary point, found {alphas}")
    a = alphas[0]
    h = hessian_raw(a, 1.0)
    point = CriticalPoint(
        params=(a, 1.0),
        grad_norm=float(np.linalg.norm(gradient_raw(a, 1.0))),
        hessian=tuple(tuple(float(x) for x in row) for row in h),
        classification=classify(h, on_boundary=True),
        g_value=g_closed_form(a, 1.0),
    )
    angles = np.linspace(math.pi, 2 * math.pi, 362)[1:-1]
    d, delta = _best_descent(g_closed_form, np.array([a, 1.0]), step, angles)
    return EdgeScanResult(point, tuple(alphas), (float(d[0]), float(d[1])), step, delta)


# ---------------------------------------------------------------- decomposable


def decomposable_gradient(alpha, beta) -> np.ndarray:
    """Gradient of the decomposable closed form (valid for ``alpha*beta >= 1``)."""
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    s = np.sqrt(np.maximum(a * b - 1.0, 0.0))
    return np.stack([2 - 2 * a * b - b * b + 3 * b * s, 2 - 2 * a * b - a * a + 3 * a * s], -1) / 36.0


def decomposable_hessian(alpha, beta) -> np.ndarray:
    """Hessian of the decomposable closed form; infinite on ``alpha*beta = 1``."""
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    s = np.sqrt(np.maximum(a * b - 1.0, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        haa = -2 * b + 1.5 * b * b / s
        hbb = -2 * a + 1.5 * a * a / s
        hab = -2 * a - 2 * b + 3 * s + 1.5 * a * b / s
    return np.stack([np.stack([haa, hab], -1), np.stack([hab, hbb], -1)], -2) / 36.0


def _gd(a, b) -> float:
    return (1.0 + (a + b) * (2.0 - a * b) + 2.0 * max(a * b - 1.0, 0.0) ** 1.5) / 36.0


@dataclass(frozen=True)
class DecomposableScanResult:
    points: tuple[CriticalPoint, ...]
    in_reduced_region: tuple[bool, ...]
    region_min: float
    region_argmin: tuple[float, float]
    grid_min: float
    beta_max: float
    grid_n: int

    @property
    def min_exceeds_mcc(self) -> bool:
        return self.grid_min > G_MCC and self.region_min > G_MCC

    def to_json(self) -> dict:
        return {
            "points": [
                dict(p.to_json(), in_reduced_region=r)
                for p, r in zip(self.points, self.in_reduced_region)
            ],
            "region_min": self.region_min,
            "region_argmin": list(self.region_argmin),
            "grid_min": self.grid_min,
            "beta_max": self.beta_max,
            "grid_n": self.grid_n,
            "min_exceeds_mcc": self.min_exceeds_mcc,
        }


def _reduced_beta_range(a, beta_max):
    lo = np.maximum(a, 1.0 / a)
    hi = np.minimum((a * a + 4.0) / (4.0 * a), beta_max)
    return lo, hi


def _on_decomposable_boundary(a: float, b: float) -> bool:
    tol = BOUNDARY_TOL
    h = math.sqrt(max(a * b - 1.0, 0.0))
    return abs(a * b - 1.0) <= tol or abs(a - b) <= tol or abs(2 * h - a) <= tol


def _decomposable_point(a: float, b: float, on_boundary: bool) -> CriticalPoint:
    h = decomposable_hessian(a, b)
    return CriticalPoint(
        params=(float(a), float(b)),
        grad_norm=float(np.linalg.norm(decomposable_gradient(a, b))),
        hessian=tuple(tuple(float(x) for x in row) for row in h),
        classification=classify(h, on_boundary=on_boundary),
        g_value=float(_gd(a, b)),
    )


def decomposable_region_scan(grid_n: int = 200, beta_max: float = 4.0) -> DecomposableScanResult:
    """Stationary points and minimum of G over decomposable lattices.

    Stationary points are searched on ``{0 < alpha <= beta <= beta_max,
    alpha*beta >= 1}``: interior gradient zeros by multi-start Newton, and
    stationary points of G restricted to the curves ``alpha*beta = 1``,
    ``alpha = beta`` and ``2h = alpha``. The minimum is taken over the
    reduced region (``2h <= alpha``) by a ``grid_n^2`` grid followed by a
    bounded local refinement.
    """
    if grid_n < 200:
        raise ValueError(f"grid_n must be >= 200, got {grid_n}")
    found: list[CriticalPoint] = []

    # interior zeros of the gradient; G is symmetric so fold onto alpha <= beta
    n_starts = max(20, grid_n // 10)
    axis = np.linspace(1.0 / beta_max + 1e-3, beta_max - 1e-3, n_starts)
    aa, bb = np.meshgrid(axis, axis, indexing="ij")
    starts = np.column_stack([aa.ravel(), bb.ravel()])
    starts = starts[starts[:, 0] * starts[:, 1] > 1.0 + 1e-6]

    def inside(a, b):
        return (a * b > 1.0 + 1e-12) & (a > 0) & (b > 0) & (a <= beta_max) & (b <= beta_max)

    x, _, conv = _damped_newton(decomposable_gradient, decomposable_hessian, inside, starts, 1e-13)
    for a, b in np.sort(x[conv], axis=1):
        found.append(_decomposable_point(a, b, _on_decomposable_boundary(a, b)))

    # stationary points of boundary restrictions
    t_min = 2 * beta_max - math.sqrt(4 * beta_max**2 - 4)
    curves = [
        (lambda t: (t, 1.0 / t), lambda t: (1.0, -1.0 / t**2), 1.0 / beta_max, 1.0),
        (lambda t: (t, t), lambda t: (1.0, 1.0), 1.0, beta_max),
        (
            lambda t: (t, (t * t + 4.0) / (4.0 * t)),
            lambda t: (1.0, 0.25 - 1.0 / t**2),
            t_min,
            2.0 / math.sqrt(3.0),
        ),
    ]
    for c, dc, lo, hi in curves:
        def slope(t, c=c, dc=dc):
            return float(np.dot(decomposable_gradient(*c(t)), dc(t)))

        for t in _sign_change_roots(slope, lo, hi, 4 * grid_n):
            a, b = c(t)
            found.append(_decomposable_point(a, b, True))

    # collapse duplicates, preferring the boundary-constrained label
    found.sort(key=lambda p: p.classification != "boundary-constrained")
    points: list[CriticalPoint] = []
    for p in found:
        if all(math.dist(p.params, k.params) > DEDUP_RADIUS for k in points):
            points.append(p)
    points.sort(key=lambda p: (p.alpha, p.beta))
    reduced = tuple(
        bool(p.alpha * p.beta >= 1 - 1e-12 and 2 * math.sqrt(max(p.alpha * p.beta - 1, 0)) <= p.alpha + 1e-9)
        for p in points
    )

    # minimum over the reduced region, parametrized by (alpha, t in [0, 1])
    a_lo, a_hi = 1.0 / beta_max, 2.0 / math.sqrt(3.0)
    ag, tg = np.meshgrid(np.linspace(a_lo, a_hi, grid_n), np.linspace(0.0, 1.0, grid_n), indexing="ij")
    lo, hi = _reduced_beta_range(ag, beta_max)
    bg = lo + tg * np.maximum(hi - lo, 0.0)
    gg = (1.0 + (ag + bg) * (2.0 - ag * bg) + 2.0 * np.maximum(ag * bg - 1.0, 0.0) ** 1.5) / 36.0
    k = np.unravel_index(np.argmin(gg), gg.shape)
    grid_min = float(gg[k])

    def objective(z):
        a, t = z
        blo, bhi = _reduced_beta_range(a, beta_max)
        return _gd(a, blo + t * max(bhi - blo, 0.0))

    res = minimize(objective, [ag[k], tg[k]], method="L-BFGS-B", bounds=[(a_lo, a_hi), (0.0, 1.0)])
    ra, rt = res.x
    blo, bhi = _reduced_beta_range(ra, beta_max)
    rb = blo + rt * max(bhi - blo, 0.0)
    region_min, argmin = float(res.fun), (float(ra), float(rb))
    if grid_min < region_min:
        region_min, argmin = grid_min, (float(ag[k]), float(bg[k]))

    return DecomposableScanResult(
        points=tuple(points),
        in_reduced_region=reduced,
        region_min=region_min,
        region_argmin=argmin,
        grid_min=grid_min,
        beta_max=beta_max,
        grid_n=grid_n,
    )
