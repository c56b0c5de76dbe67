"""Gram-matrix algebra for three-dimensional lattices.

Lattices are described by their 3x3 Gram matrix. Isometry classes are
handled through Selling reduction: every 3D lattice has an obtuse
superbase ``v0, v1, v2, v3`` (``v0 = -(v1 + v2 + v3)``) whose conorms
``p_ij = -v_i . v_j`` are all nonnegative, and the six conorms determine
the lattice up to isometry.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateLatticeError,
    InvalidGramError,
    LatticeError,
    ReductionError,
)

__all__ = [
    "Tolerances",
    "TOL",
    "GramMatrix",
    "ConormSet",
    "ShortVectorList",
    "CONORM_LABELS",
    "COMPLEMENTARY_PAIRS",
    "determinant",
    "dual_gram",
    "selling_reduce",
    "conorms_to_gram",
    "conorms_of_superbase",
    "obtuse_superbases",
    "minimal_vectors",
    "is_isodual",
    "load_gram",
    "save_gram",
    "gram_from_json",
    "gram_to_json",
]


@dataclass
class Tolerances:
    """Numerical tolerances used across the package.

    Mutate the module-level ``TOL`` instance to override them globally.
    """

    positive_definite: float = 1e-12
    conorm_zero: float = 1e-12
    conorm_equal: float = 1e-9
    symmetry: float = 1e-12
    max_selling_steps: int = 10_000
    max_condition: float = 1e12


TOL = Tolerances()

CONORM_LABELS = ("p01", "p02", "p03", "p12", "p13", "p23")
_INDEX_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
_PAIR_INDEX = {pair: k for k, pair in enumerate(_INDEX_PAIRS)}
# positions of {01,23}, {02,13}, {03,12} inside the conorm tuple
COMPLEMENTARY_PAIRS = ((0, 5), (1, 4), (2, 3))

_INITIAL_SUPERBASE = np.array(
    [[-1, -1, -1], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=np.int64
)


def _relabel_maps() -> np.ndarray:
    """Index maps sending a conorm tuple to each of its 24 relabelings."""
    maps = []
    for perm in itertools.permutations(range(4)):
        m = np.empty(6, dtype=np.int64)
        for k, (i, j) in enumerate(_INDEX_PAIRS):
            a, b = sorted((perm[i], perm[j]))
            m[_PAIR_INDEX[(a, b)]] = k
        maps.append(m)
    return np.array(maps)


_RELABEL_MAPS = _relabel_maps()


class GramMatrix:
    """Immutable symmetric positive-definite 3x3 matrix.

    Parameters
    ----------
    g : array_like, shape (3, 3)
        Inner products of the basis vectors. Asymmetry at round-off level
        (relative ``TOL.symmetry``) is removed by symmetrizing; anything
        larger is rejected.
    """

    __slots__ = ("_g",)

    def __init__(self, g) -> None:
        if isinstance(g, GramMatrix):
            a = g.g.copy()
        else:
            a = np.array(g, dtype=float)
        if a.shape != (3, 3):
            raise InvalidGramError(f"Gram matrix must be 3x3, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidGramError("Gram matrix has non-finite entries")
        scale = max(float(np.max(np.abs(a))), 1.0)
        if np.max(np.abs(a - a.T)) > TOL.symmetry * scale:
            raise InvalidGramError("Gram matrix is not symmetric")
        a = 0.5 * (a + a.T)
        minors = [a[0, 0], np.linalg.det(a[:2, :2]), np.linalg.det(a)]
        for k, m in enumerate(minors, start=1):
            if not m > TOL.positive_definite:
                raise InvalidGramError(
                    f"Gram matrix is not positive definite "
                    f"(leading minor {k} = {m:.3g})"
                )
        a.setflags(write=False)
        self._g = a

    @property
    def g(self) -> np.ndarray:
        return self._g

    def __array__(self, dtype=None, copy=None):
        return np.array(self._g, dtype=dtype)

    def __getitem__(self, idx):
        return self._g[idx]

    def __repr__(self) -> str:
        rows = ", ".join("[" + ", ".join(f"{x:.12g}" for x in r) + "]" for r in self._g)
        return f"GramMatrix([{rows}])"

    @property
    def det(self) -> float:
        return float(np.linalg.det(self._g))

    def scaled(self, c: float) -> "GramMatrix":
        return GramMatrix(c * self._g)

    def normalized(self) -> "GramMatrix":
        """Rescaled copy with determinant 1."""
        return self.scaled(self.det ** (-1.0 / 3.0))

    def transformed(self, u) -> "GramMatrix":
        """Gram matrix of the basis whose coordinate rows are ``u``."""
        u = np.asarray(u, dtype=float)
        return GramMatrix(u @ self._g @ u.T)

    def basis(self) -> np.ndarray:
        """Cartesian basis vectors as rows (lower-triangular Cholesky factor)."""
        return np.linalg.cholesky(self._g)

    def norm(self, u) -> np.ndarray:
        """Squared norm of lattice-coordinate vector(s) ``u``."""
        u = np.asarray(u, dtype=float)
        return np.einsum("...i,ij,...j->...", u, self._g, u)

    def allclose(self, other: "GramMatrix", rtol: float = 1e-10, atol: float = 0.0) -> bool:
        return bool(np.allclose(self._g, GramMatrix(other).g, rtol=rtol, atol=atol))

    def tolist(self) -> list[list[float]]:
        return self._g.tolist()


@dataclass(frozen=True)
class ConormSet:
    """Six conorms ``(p01, p02, p03, p12, p13, p23)`` of a superbase.

    ``superbase`` optionally records the integer coordinates of
    ``v0..v3`` (rows) that produced the values.
    """

    values: tuple[float, ...]
    superbase: tuple[tuple[int, ...], ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        vals = tuple(float(x) for x in self.values)
        if len(vals) != 6:
            raise LatticeError(f"a conorm set has six values, got {len(vals)}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_mapping(cls, m) -> "ConormSet":
        return cls(tuple(m[k] for k in CONORM_LABELS))

    def __getitem__(self, label: str) -> float:
        return self.values[CONORM_LABELS.index(label)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(CONORM_LABELS, self.values))

    @property
    def pairs(self) -> tuple[tuple[float, float], ...]:
        """Values grouped as ``(p01, p23), (p02, p13), (p03, p12)``."""
        v = self.values
        return tuple((v[i], v[j]) for i, j in COMPLEMENTARY_PAIRS)

    def relabel(self, perm: Sequence[int]) -> "ConormSet":
        """Conorms after renaming superbase index ``i`` to ``perm[i]``."""
        out = [0.0] * 6
        for k, (i, j) in enumerate(_INDEX_PAIRS):
            a, b = sorted((perm[i], perm[j]))
            out[_PAIR_INDEX[(a, b)]] = self.values[k]
        return ConormSet(tuple(out))

    @property
    def is_reduced(self) -> bool:
        return min(self.values) >= -TOL.conorm_zero

    @cached_property
    def labelings(self) -> np.ndarray:
        """All conorm tuples describing the same lattice, shape (m, 6).

        With all conorms strictly positive the obtuse superbase is unique
        up to sign and order, so the 24 relabelings suffice. If some conorm
        vanishes the lattice has further obtuse superbases; those are
        enumerated from the reconstructed Gram matrix.
        """
        v = np.array(self.values)
        scale = max(float(np.max(np.abs(v))), 1e-300)
        if np.min(v) > TOL.conorm_equal * scale:
            return np.unique(v[_RELABEL_MAPS], axis=0)
        _, conorms = obtuse_superbases(conorms_to_gram(self))
        return conorms

    def canonical(self) -> tuple[tuple[float, float], ...]:
        """Pair-respecting canonical form.

        Each complementary pair is sorted ascending and the three pairs
        are sorted lexicographically; among equivalent labelings the
        lexicographically largest such form is chosen, so isometric
        lattices with vanishing conorms still share one form.
        """
        best_key, best = None, None
        for row in self.labelings:
            form = tuple(sorted(tuple(sorted((row[i], row[j]))) for i, j in COMPLEMENTARY_PAIRS))
            key = tuple(round(x, 8) for pr in form for x in pr)
            if best_key is None or key > best_key:
                best_key, best = key, form
        return tuple((float(a), float(b)) for a, b in best)

    def equivalent(self, other: "ConormSet", tol: float | None = None) -> bool:
        """True if both sets describe isometric lattices (within ``tol``)."""
        tol = TOL.conorm_equal if tol is None else tol
        target = np.array(other.values)
        return bool(np.any(np.max(np.abs(self.labelings - target), axis=1) <= tol))

    def gram(self) -> GramMatrix:
        return conorms_to_gram(self)

    def to_json(self) -> dict:
        return {"conorms": self.as_dict(), "canonical_pairs": [list(p) for p in self.canonical()]}


@dataclass(frozen=True)
class ShortVectorList:
    """Minimal vectors of a lattice in integer coordinates."""

    vectors: tuple[tuple[int, int, int], ...]
    norms: tuple[float, ...]
    min_norm: float

    def __len__(self) -> int:
        return len(self.vectors)


def determinant(gram: GramMatrix) -> float:
    return GramMatrix(gram).det


def dual_gram(gram: GramMatrix) -> GramMatrix:
    """Gram matrix of the dual lattice in the dual basis (matrix inverse)."""
    g = GramMatrix(gram).g
    if np.linalg.cond(g) > TOL.max_condition:
        raise DegenerateLatticeError("Gram matrix is numerically singular")
    inv = np.linalg.inv(g)
    return GramMatrix(0.5 * (inv + inv.T))


def conorms_of_superbase(gram: GramMatrix, superbase) -> np.ndarray:
    """Conorms ``-v_i . v_j`` for a superbase given as 4x3 integer rows."""
    s = np.asarray(superbase, dtype=float)
    p = -(s @ GramMatrix(gram).g @ s.T)
    return np.array([p[i, j] for i, j in _INDEX_PAIRS])


def selling_reduce(gram: GramMatrix) -> ConormSet:
    """Reduce to an obtuse superbase by iterated Selling steps.

    Each step takes the most negative conorm ``p_ij`` and replaces the
    superbase by ``(-v_i, v_j, v_k + v_i, v_l + v_i)``, which lowers
    ``sum |v|^2`` by ``2 |p_ij|``.
    """
    g = GramMatrix(gram).g
    scale = float(np.trace(g)) / 3.0
    zero = TOL.conorm_zero * scale
    sb = _INITIAL_SUPERBASE.copy()
    for _ in range(TOL.max_selling_steps + 1):
        p = -(sb @ g @ sb.T)
        vals = np.array([p[i, j] for i, j in _INDEX_PAIRS])
        k = int(np.argmin(vals))
        if vals[k] >= -zero:
            break
        i, j = _INDEX_PAIRS[k]
        rest = [m for m in range(4) if m not in (i, j)]
        for m in rest:
            sb[m] += sb[i]
        sb[i] = -sb[i]
    else:
        raise ReductionError(
            f"Selling reduction exceeded {TOL.max_selling_steps} steps"
        )
    vals = np.where(np.abs(vals) < zero, 0.0, vals)
    return ConormSet(tuple(vals), superbase=tuple(map(tuple, sb.tolist())))


def conorms_to_gram(conorms: ConormSet | Iterable[float]) -> GramMatrix:
    """Gram matrix of ``v1, v2, v3`` for a superbase with these conorms."""
    c = conorms if isinstance(conorms, ConormSet) else ConormSet(tuple(conorms))
    p = np.zeros((4, 4))
    for k, (i, j) in enumerate(_INDEX_PAIRS):
        p[i, j] = p[j, i] = c.values[k]
    g = -p[1:, 1:]
    for i in range(1, 4):
        g[i - 1, i - 1] = sum(p[i, j] for j in range(4) if j != i)
    scale = max(float(np.max(np.abs(g))), 1e-300)
    if abs(np.linalg.det(g)) <= TOL.positive_definite * scale**3:
        raise DegenerateLatticeError("conorm set describes a degenerate lattice")
    try:
        return GramMatrix(g)
    except InvalidGramError as exc:
        raise DegenerateLatticeError(str(exc)) from exc


def _reduced_basis(gram: GramMatrix) -> np.ndarray:
    """Integer rows ``v1, v2, v3`` of an obtuse superbase (unimodular)."""
    sb = selling_reduce(gram).superbase
    return np.array(sb[1:], dtype=np.int64)


def _ellipsoid_points(g: np.ndarray, bound: float) -> np.ndarray:
    """All nonzero integer vectors with ``u^T g u <= bound``."""
    ginv = np.linalg.inv(g)
    box = np.floor(np.sqrt(bound * np.diag(ginv)) + 1e-9).astype(int)
    axes = [np.arange(-b, b + 1) for b in box]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    norms = np.einsum("ni,ij,nj->n", pts, g, pts)
    keep = (norms <= bound) & np.any(pts != 0, axis=1)
    return pts[keep]


def coset_minima(gram: GramMatrix, rtol: float = 1e-9) -> dict[tuple[int, int, int], np.ndarray]:
    """Minimal vectors of each nonzero coset of 2L in L, ties included.

    Keys are the coset labels in ``{0,1}^3`` (original coordinates), values
    integer vectors in original coordinates.
    """
    gram = GramMatrix(gram)
    r = _reduced_basis(gram)
    gr = r @ gram.g @ r.T
    cosets = [c for c in itertools.product((0, 1), repeat=3) if any(c)]
    # each coset contains its 0/1 representative, which bounds the minimum
    bound = max(float(np.array(c) @ gr @ np.array(c)) for c in cosets) * (1 + 1e-9)
    pts = _ellipsoid_points(gr, bound)
    norms = np.einsum("ni,ij,nj->n", pts, gr, pts)
    orig = pts @ r
    labels = np.mod(orig, 2)
    out = {}
    for c in cosets:
        mask = np.all(labels == c, axis=1)
        n = norms[mask]
        m = n.min()
        out[c] = orig[mask][n <= m * (1 + rtol)]
    return out


def obtuse_superbases(gram: GramMatrix, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Enumerate every obtuse superbase (ordered) of the lattice.

    Returns ``(superbases, conorms)`` with shapes ``(m, 4, 3)`` and
    ``(m, 6)``; distinct conorm tuples only. Relies on the fact that the
    vectors of an obtuse superbase are minimal in their cosets of 2L.
    """
    gram = GramMatrix(gram)
    tol = TOL.conorm_equal if tol is None else tol
    scale = float(np.trace(gram.g)) / 3.0
    cands = np.concatenate(list(coset_minima(gram, rtol=tol).values()))
    n = len(cands)
    idx = np.array(list(itertools.product(range(n), repeat=3)))
    trip = cands[idx]  # (T, 3, 3)
    dets = np.rint(np.linalg.det(trip.astype(float))).astype(int)
    trip = trip[np.abs(dets) == 1]
    v0 = -trip.sum(axis=1, keepdims=True)
    sbs = np.concatenate([v0, trip], axis=1)  # (T, 4, 3)
    sf = sbs.astype(float)
    p = -np.einsum("tai,ij,tbj->tab", sf, gram.g, sf)
    conorms = np.stack([p[:, i, j] for i, j in _INDEX_PAIRS], axis=1)
    ok = np.all(conorms >= -tol * scale, axis=1)
    sbs, conorms = sbs[ok], conorms[ok]
    conorms = np.where(np.abs(conorms) < tol * scale, 0.0, conorms)
    _, first = np.unique(np.round(conorms / scale, 10), axis=0, return_index=True)
    first = np.sort(first)
    return sbs[first], conorms[first]


def minimal_vectors(gram: GramMatrix) -> ShortVectorList:
    """All nonzero lattice vectors of minimal norm.

    Enumeration runs over the box ``|u_i| <= ceil(sqrt(max g_ii / lambda_min)) + 1``
    in a Selling-reduced basis, then maps back to the caller's basis.
    """
    gram = GramMatrix(gram)
    r = _reduced_basis(gram)
    gr = r @ gram.g @ r.T
    lam = float(np.linalg.eigvalsh(gr)[0])
    b = int(np.ceil(np.sqrt(np.max(np.diag(gr)) / lam))) + 1
    axis = np.arange(-b, b + 1)
    pts = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    pts = pts[np.any(pts != 0, axis=1)]
    norms = np.einsum("ni,ij,nj->n", pts, gr, pts)
    m = norms.min()
    sel = pts[norms <= m * (1 + 1e-9)] @ r
    sel = sel[np.lexsort(sel.T[::-1])]
    true_norms = gram.norm(sel)
    return ShortVectorList(
        vectors=tuple(tuple(int(x) for x in v) for v in sel),
        norms=tuple(float(x) for x in true_norms),
        min_norm=float(true_norms.min()),
    )


def is_isodual(gram: GramMatrix, tol: float | None = None) -> bool:
    """Whether the lattice is similar to its dual.

    The Gram matrix is rescaled to determinant 1, where similarity
    reduces to isometry, and the reduced conorms are compared.
    """
    g = GramMatrix(gram).normalized()
    return selling_reduce(g).equivalent(selling_reduce(dual_gram(g)), tol)


def gram_to_json(gram: GramMatrix) -> dict:
    return {"gram": GramMatrix(gram).tolist()}


def gram_from_json(obj) -> GramMatrix:
    if not isinstance(obj, dict) or "gram" not in obj:
        raise InvalidGramError('expected an object with key "gram"')
    return GramMatrix(obj["gram"])


def load_gram(path: str | Path) -> GramMatrix:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidGramError(f"{path}: not valid JSON ({exc.msg})") from exc
    return gram_from_json(obj)


def save_gram(gram: GramMatrix, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(gram_to_json(gram), fh, indent=2)
        fh.write("\n")
