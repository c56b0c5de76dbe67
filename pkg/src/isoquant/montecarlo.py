"""Closest-point quantization and Monte Carlo estimation of G."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

from .lattice import GramMatrix
from .moments import MomentReport
from .voronoi import voronoi_cell

__all__ = ["search_window", "closest_point", "closest_points", "second_moment_mc", "CHUNK"]

CHUNK = 1 << 16
MIN_SAMPLES = 1000


@lru_cache(maxsize=64)
def _window_cached(key: bytes) -> int:
    g = GramMatrix(np.frombuffer(key).reshape(3, 3))
    covering = voronoi_cell(g).circumradius
    lam = float(np.linalg.eigvalsh(g.g)[0])
    return int(math.ceil(covering / math.sqrt(lam))) + 1


def search_window(gram: GramMatrix) -> int:
    """Half-width ``ceil(R / sqrt(lambda_min)) + 1`` of the search box.

    Any closest point lies within Cartesian distance R (covering radius)
    of the target, so within ``R / sqrt(lambda_min)`` in each coordinate.
    """
    return _window_cached(GramMatrix(gram).g.tobytes())


@lru_cache(maxsize=8)
def _offsets(w: int) -> np.ndarray:
    # itertools.product yields offsets in lexicographic order
    return np.array(list(itertools.product(range(-w, w + 1), repeat=3)), dtype=float)


def closest_points(gram: GramMatrix, targets, window: int | None = None) -> np.ndarray:
    """Closest lattice points (integer coordinates) to each row of ``targets``.

    Exhaustive over ``round(t) + [-w, w]^3``; exact ties go to the
    lexicographically smallest point.
    """
    gram = GramMatrix(gram)
    t = np.atleast_2d(np.asarray(targets, dtype=float))
    w = search_window(gram) if window is None else window
    off = _offsets(w)
    g = gram.g
    off_norm = np.einsum("ki,ij,kj->k", off, g, off)
    base = np.rint(t)
    diff = t - base
    # |diff - off|_g^2 = |diff|_g^2 - 2 diff.g.off + |off|_g^2; first term is constant per row
    score = off_norm[None, :] - 2.0 * (diff @ g) @ off.T
    best = np.argmin(score, axis=1)
    return (base + off[best]).astype(np.int64)


def closest_point(gram: GramMatrix, target, window: int | None = None) -> tuple[int, int, int]:
    u = closest_points(gram, [target], window)[0]
    return tuple(int(x) for x in u)


def _chunk_stats(g: np.ndarray, seed: int, index: int, n: int, w: int) -> tuple[int, float, float]:
    bitgen = np.random.Philox(key=seed, counter=[0, 0, 0, index])
    t = np.random.Generator(bitgen).random((n, 3))
    q = closest_points(g, t, w)
    e = t - q
    sq = np.einsum("ni,ij,nj->n", e, g, e)
    mean = float(sq.mean())
    return n, mean, float(((sq - mean) ** 2).sum())


def second_moment_mc(
    gram: GramMatrix, samples: int, seed: int = 0, workers: int = 1
) -> MomentReport:
    """Monte Carlo estimate of G from uniform points in the unit cell.

    Samples are generated in fixed-size chunks, chunk ``i`` drawing from a
    Philox stream keyed by ``seed`` with counter ``i``; chunk statistics are
    merged in chunk order, so the result is bit-identical for any
    ``workers``.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be >= {MIN_SAMPLES}, got {samples}")
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    gram = GramMatrix(gram)
    w = search_window(gram)
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    jobs = [(gram.g, seed, i, n, w) for i, n in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(lambda a: _chunk_stats(*a), jobs))
    else:
        stats = [_chunk_stats(*a) for a in jobs]

    # Chan et al. pairwise merge, in chunk order
    n_tot, mean, m2 = 0, 0.0, 0.0
    for n, mu, s in stats:
        delta = mu - mean
        tot = n_tot + n
        mean += delta * n / tot
        m2 += s + delta * delta * n_tot * n / tot
        n_tot = tot
    var = m2 / (n_tot - 1)
    vol_23 = gram.det ** (1.0 / 3.0)
    g_value = mean / (3.0 * vol_23)
    stderr = math.sqrt(var / n_tot) / (3.0 * vol_23)
    return MomentReport(g_value, "monte-carlo", stderr=stderr, samples=samples, seed=seed)
