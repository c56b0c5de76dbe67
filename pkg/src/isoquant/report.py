"""Full geometric summary of a lattice and the shared text serialization."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, is_dataclass

import numpy as np

from .lattice import GramMatrix, is_isodual, minimal_vectors
from .voronoi import second_moment_exact, voronoi_cell

__all__ = ["LatticeReport", "lattice_report", "format_number", "dumps"]


@dataclass(frozen=True)
class LatticeReport:
    determinant: float
    g_value: float
    packing_radius: float
    covering_radius: float
    center_density: float
    kissing_number: int
    isodual: bool

    def to_json(self) -> dict:
        return asdict(self)


def lattice_report(gram: GramMatrix) -> LatticeReport:
    gram = GramMatrix(gram)
    det = gram.det
    cell = voronoi_cell(gram)
    short = minimal_vectors(gram)
    r = math.sqrt(short.min_norm) / 2.0
    return LatticeReport(
        determinant=det,
        g_value=second_moment_exact(cell, det).g_value,
        packing_radius=r,
        covering_radius=cell.circumradius,
        center_density=r**3 / math.sqrt(det),
        kissing_number=len(short),
        isodual=is_isodual(gram),
    )


def format_number(x: float) -> str:
    return format(float(x), ".12g")


def _plain(obj):
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    if is_dataclass(obj):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(format_number(x)) if math.isfinite(x) else None
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    """JSON text with every float rounded to 12 significant digits."""
    return json.dumps(_plain(obj), indent=indent)
