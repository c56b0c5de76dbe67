"""Acceptance criteria, one test per criterion.

Each test computes its quantities directly from the library and asserts at
the stated tolerance; ``conftest.py`` prints a pass/fail line per criterion
at the end of the run. The last test runs the ``verify-paper`` command end
to end.
"""

import json
import math

import numpy as np
import pytest

from isoquant.cli import main
from isoquant.families import (
    _raw_indecomposable_gram,
    bcc_gram,
    cubic_gram,
    decomposable_conorms,
    decomposable_gram,
    decomposable_params,
    fcc_gram,
    hexagonal_prism_gram,
    indecomposable_conorms,
    indecomposable_gram,
    mcc_gram,
    mcc_params,
)
from isoquant.lattice import ConormSet, GramMatrix, conorms_to_gram, is_isodual, selling_reduce
from isoquant.moments import g_closed_form, g_decomposable, g_decomposable_printed, g_from_conorms
from isoquant.montecarlo import second_moment_mc
from isoquant.optimizer import (
    boundary_edge_scan,
    decomposable_region_scan,
    find_critical_points,
    gradient_raw,
    nine_candidate_check,
)
from isoquant.report import lattice_report
from isoquant.roots import SEXTIC, sextic_roots
from isoquant.verify import random_unimodular
from isoquant.voronoi import second_moment_exact, voronoi_cell

SQRT2, SQRT3 = math.sqrt(2.0), math.sqrt(3.0)
G_MCC_EXACT = (17 + 4 * SQRT2) / 288
G_EDGE_EXACT = 5 * SQRT3 / 162 + 1 / 36


@pytest.mark.criterion(1)
def test_criterion_1_mcc_second_moment_four_ways():
    assert G_MCC_EXACT == pytest.approx(0.0786696, abs=1e-7)
    g6 = g_closed_form(2 - SQRT2, 2 - SQRT2)
    g5 = g_from_conorms(indecomposable_conorms(mcc_params())).g_value
    gv = second_moment_exact(mcc_gram()).g_value
    assert abs(g6 - G_MCC_EXACT) <= 1e-10
    assert abs(g5 - g6) <= 1e-10
    assert abs(gv - G_MCC_EXACT) <= 1e-7
    mc = second_moment_mc(mcc_gram(), 1_000_000, seed=0)
    assert abs(mc.g_value - G_MCC_EXACT) <= 4 * mc.stderr


@pytest.mark.criterion(2)
def test_criterion_2_bcc_fcc_and_ordering():
    g_bcc = second_moment_exact(bcc_gram()).g_value
    g_fcc = second_moment_exact(fcc_gram()).g_value
    g_mcc = second_moment_exact(mcc_gram()).g_value
    assert abs(g_bcc - 0.0785432) <= 1e-7
    assert abs(g_fcc - 0.0787450) <= 1e-7
    # closed forms behind the printed decimals
    assert g_bcc == pytest.approx(19 / 384 * 2 ** (2 / 3), abs=1e-12)
    assert g_fcc == pytest.approx(2 ** (1 / 3) / 16, abs=1e-12)
    assert g_bcc < g_mcc < g_fcc


@pytest.mark.criterion(3)
def test_criterion_3_unique_interior_critical_point():
    pts = find_critical_points(((0.01, 0.99), (0.01, 0.99)), grid_n=40, tol=1e-10)
    assert len(pts) == 1
    (p,) = pts
    assert math.dist(p.params, (2 - SQRT2, 2 - SQRT2)) <= 1e-8
    assert np.all(np.linalg.eigvalsh(np.array(p.hessian)) > 1e-10)


@pytest.mark.criterion(4)
def test_criterion_4_sextic_root():
    r = sextic_roots((0.0, 1.0))
    assert len(r) == 1
    (root,) = r.roots_in_interval
    assert math.floor(root * 1e4) / 1e4 == 0.9894
    assert abs(np.polyval(SEXTIC, root)) < 1e-10
    assert r.residuals[0] < 1e-10


@pytest.mark.criterion(5)
def test_criterion_5_nine_candidates():
    rows = nine_candidate_check()
    assert len(rows) == 9
    r6 = sextic_roots().roots_in_interval[0]
    values = {2 - SQRT2, SQRT3 - 1}
    assert {round(r.alpha, 12) for r in rows} == {round(v, 12) for v in values | {r6}}
    for r in rows:
        gn = float(np.linalg.norm(gradient_raw(r.alpha, r.beta)))
        if r.alpha_label == r.beta_label == "2-sqrt2":
            assert gn < 1e-8 and r.both_vanish
        else:
            assert gn > 1e-4 and not r.both_vanish


@pytest.mark.criterion(6)
def test_criterion_6_edge_lattice():
    edge = boundary_edge_scan()
    a = edge.point.alpha
    assert abs(a - (SQRT3 - 1)) <= 1e-8
    assert G_EDGE_EXACT == pytest.approx(0.0812361, abs=1e-7)
    assert abs(g_closed_form(a, 1.0) - G_EDGE_EXACT) <= 1e-8
    edge_gram = GramMatrix(_raw_indecomposable_gram(SQRT3 - 1, 1.0))
    assert abs(second_moment_exact(edge_gram).g_value - G_EDGE_EXACT) <= 1e-8
    assert abs(second_moment_exact(hexagonal_prism_gram()).g_value - G_EDGE_EXACT) <= 1e-8
    assert selling_reduce(edge_gram).equivalent(selling_reduce(hexagonal_prism_gram()))
    # an interior direction of strict decrease exists
    assert edge.descent_delta < -1e-9
    assert not edge.is_local_minimum


@pytest.mark.criterion(7)
def test_criterion_7_decomposable_family():
    assert abs(g_decomposable(decomposable_params(1, 1)) - 1 / 12) <= 1e-12
    assert abs(g_decomposable(decomposable_params(1, 2)) - 1 / 12) <= 1e-12
    assert selling_reduce(decomposable_gram(decomposable_params(1, 2))).equivalent(
        selling_reduce(cubic_gram())
    )
    scan = decomposable_region_scan(grid_n=200)
    assert scan.grid_min > G_MCC_EXACT and scan.region_min > G_MCC_EXACT
    assert abs(scan.region_min - 0.0812361) <= 1e-4
    assert all(p.classification != "local-min" for p in scan.points)


@pytest.mark.criterion(8)
def test_criterion_8_mcc_constants():
    r = lattice_report(mcc_gram())
    packing = 0.5 * math.sqrt(0.5 + 1 / SQRT2)
    covering = 3**0.5 * 2**-1.25
    assert abs(r.packing_radius - packing) <= 1e-7
    assert abs(r.covering_radius - covering) <= 1e-7
    assert f"{r.center_density:.6f}".startswith("0.1657")
    assert abs(r.center_density - packing**3) <= 1e-7
    assert r.kissing_number == 8
    assert abs(r.determinant - 1) <= 1e-7
    assert r.isodual


@pytest.mark.criterion(9)
def test_criterion_9_property_suites():
    rng = np.random.default_rng(909)
    for a, b in rng.uniform(0.05, 0.95, size=(100, 2)):
        g6 = g_closed_form(a, b)
        assert abs(g6 - g_from_conorms(indecomposable_conorms((a, b))).g_value) <= 1e-10 * g6

    h = 1e-6
    for a, b in rng.uniform(0.05, 0.95, size=(200, 2)):
        fd = np.array([
            (g_closed_form(a + h, b) - g_closed_form(a - h, b)) / (2 * h),
            (g_closed_form(a, b + h) - g_closed_form(a, b - h)) / (2 * h),
        ])
        assert np.linalg.norm(gradient_raw(a, b) - fd) <= 1e-6 * np.linalg.norm(fd)

    for _ in range(200):
        c = ConormSet(tuple(rng.uniform(0.02, 1.0, size=6)))
        g = conorms_to_gram(c)
        assert selling_reduce(g).equivalent(c, 1e-9)
        assert selling_reduce(g.transformed(random_unimodular(rng))).equivalent(c, 1e-9)

    for a, b in rng.uniform(0.05, 0.95, size=(100, 2)):
        g = indecomposable_gram((a, b))
        assert is_isodual(g)
        assert voronoi_cell(g).volume == pytest.approx(math.sqrt(g.det), rel=1e-8)

    m1 = second_moment_mc(mcc_gram(), 100_000, seed=7)
    m2 = second_moment_mc(mcc_gram(), 100_000, seed=7, workers=4)
    assert m1 == m2


@pytest.mark.criterion(10)
def test_criterion_10_decomposable_discrepancy():
    printed = g_decomposable_printed(1.0, 1.0)
    assert printed == pytest.approx(7 / 36, abs=1e-12)
    assert abs(printed - 1 / 12) > 1e-3
    assert abs(g_decomposable(decomposable_params(1, 1)) - 1 / 12) <= 1e-12
    rng = np.random.default_rng(1010)
    n = 0
    while n < 200:
        a = rng.uniform(0.26, 2 / SQRT3)
        lo, hi = max(a, 1 / a), (a * a + 4) / (4 * a)
        if hi < lo:
            continue
        p = decomposable_params(a, rng.uniform(lo, hi))
        assert abs(g_decomposable(p) - g_from_conorms(decomposable_conorms(p)).g_value) <= 1e-12
        n += 1


def test_verify_paper_command(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["verify-paper", "--out", str(out)])
    text = capsys.readouterr().out
    report = json.loads(out.read_text())
    assert code == 0, text
    assert report["overall"] == "pass"
    assert {c["criterion"] for c in report["checks"]} == set(range(1, 11))
    assert all(c["pass"] for c in report["checks"])
    assert any("7/36" in n for n in report["notes"])
    assert "overall PASS" in text
