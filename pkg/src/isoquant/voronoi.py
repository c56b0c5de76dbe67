"""Voronoi cell of a 3D lattice and exact integration of |x|^2 over it."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLatticeError, GeometryError
from .lattice import TOL, GramMatrix, coset_minima
from .moments import MomentReport

__all__ = ["VoronoiCell", "voronoi_cell", "second_moment_exact", "tetra_second_moment"]

_MERGE_TOL = 1e-9
_VOLUME_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class VoronoiCell:
    """Voronoi cell of the origin.

    Attributes
    ----------
    relevant_vectors : ndarray of int, shape (k, 3)
        Lattice coordinates of the face-defining vectors (closed under
        negation).
    relevant_norms : ndarray, shape (k,)
    normals : ndarray, shape (k, 3)
        Cartesian relevant vectors; face ``i`` is ``x . n_i = |n_i|^2 / 2``.
    vertices : ndarray, shape (m, 3)
        Cartesian vertices.
    faces : tuple of ndarray
        Vertex indices of each face, in cyclic order.
    """

    gram: GramMatrix
    relevant_vectors: np.ndarray
    relevant_norms: np.ndarray
    normals: np.ndarray
    vertices: np.ndarray
    faces: tuple = field(repr=False)
    inradius: float
    circumradius: float
    volume: float
    second_moment: float

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def _relevant_vectors(gram: GramMatrix) -> np.ndarray:
    # Voronoi: v is relevant iff +-v are the only minimal vectors of v + 2L
    rel = [m for m in coset_minima(gram).values() if len(m) == 2]
    return np.concatenate(rel)


def _merge(points: np.ndarray, tol: float) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= tol for q in kept):
            kept.append(p)
    return np.array(kept)


def _order_face(pts: np.ndarray, normal: np.ndarray) -> np.ndarray:
    c = pts.mean(axis=0)
    e1 = pts[0] - c
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal / np.linalg.norm(normal), e1)
    d = pts - c
    return np.argsort(np.arctan2(d @ e2, d @ e1))


def tetra_second_moment(a, b, c, d) -> tuple[float, float]:
    """Volume and integral of |x|^2 over the tetrahedron ``abcd``.

    Uses the exact degree-2 rule
    ``int |x|^2 = V/20 * (sum |v_i|^2 + |sum v_i|^2)``.
    """
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    vol = abs(np.linalg.det(np.array([b - a, c - a, d - a]))) / 6.0
    s = a + b + c + d
    sq = a @ a + b @ b + c @ c + d @ d + s @ s
    return vol, vol * sq / 20.0


def voronoi_cell(gram: GramMatrix) -> VoronoiCell:
    gram = GramMatrix(gram)
    if np.linalg.cond(gram.g) > TOL.max_condition:
        raise DegenerateLatticeError("Gram matrix is numerically singular")
    rel = _relevant_vectors(gram)
    rel = rel[np.lexsort(rel.T[::-1])]
    basis = gram.basis()
    normals = rel @ basis
    offsets = 0.5 * np.einsum("ij,ij->i", normals, normals)
    scale = float(np.sqrt(offsets.max()))
    tol = _MERGE_TOL * scale

    cands = []
    for i, j, k in itertools.combinations(range(len(rel)), 3):
        a = normals[[i, j, k]]
        if abs(np.linalg.det(a)) < 1e-12 * scale**3:
            continue
        x = np.linalg.solve(a, offsets[[i, j, k]])
        if np.all(normals @ x <= offsets + tol * scale):
            cands.append(x)
    if not cands:
        raise GeometryError("no Voronoi vertices found")
    verts = _merge(np.array(cands), tol)

    faces = []
    used = []
    for i, (n, off) in enumerate(zip(normals, offsets)):
        on = np.nonzero(np.abs(verts @ n - off) <= tol * scale)[0]
        if len(on) < 3:
            continue
        faces.append(on[_order_face(verts[on], n)])
        used.append(i)
    if len(used) != len(rel):
        raise GeometryError(f"{len(rel) - len(used)} relevant vectors do not span a face")

    volume = 0.0
    moment = 0.0
    origin = np.zeros(3)
    for idx in faces:
        pts = verts[idx]
        c = pts.mean(axis=0)
        for p, q in zip(pts, np.roll(pts, -1, axis=0)):
            v, m = tetra_second_moment(origin, c, p, q)
            volume += v
            moment += m

    expected = np.sqrt(gram.det)
    if abs(volume - expected) > 1e-6 * expected:
        raise GeometryError(f"cell volume {volume:.12g} differs from sqrt(det) {expected:.12g}")

    norms = np.einsum("ni,ij,nj->n", rel, gram.g, rel)
    return VoronoiCell(
        gram=gram,
        relevant_vectors=rel,
        relevant_norms=norms,
        normals=normals,
        vertices=verts,
        faces=tuple(faces),
        inradius=float(np.sqrt(norms.min()) / 2.0),
        circumradius=float(np.max(np.linalg.norm(verts, axis=1))),
        volume=float(volume),
        second_moment=float(moment),
    )


def second_moment_exact(cell: VoronoiCell | GramMatrix, det: float | None = None) -> MomentReport:
    """Normalized second moment ``(1/3) * M2 * vol^(-5/3)`` of a Voronoi cell.

    ``det`` (optional) is checked against the cell volume.
    """
    if not isinstance(cell, VoronoiCell):
        cell = voronoi_cell(cell)
    if det is not None:
        expected = np.sqrt(det)
        if abs(cell.volume - expected) > _VOLUME_RTOL * expected:
            raise GeometryError(
                f"cell volume {cell.volume:.12g} inconsistent with det {det:.12g}"
            )
    g = cell.second_moment * cell.volume ** (-5.0 / 3.0) / 3.0
    return MomentReport(float(g), "exact-polytope")
