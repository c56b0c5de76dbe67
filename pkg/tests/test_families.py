import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from isoquant.errors import DomainError
from isoquant.families import (
    DecomposableParams,
    IndecomposableParams,
    decomposable_conorms,
    decomposable_gram,
    decomposable_params,
    hexagonal_prism_gram,
    indecomposable_conorms,
    indecomposable_gram,
    mcc_gram,
    mcc_params,
    parse_param,
)
from isoquant.lattice import ConormSet, GramMatrix, conorms_to_gram, is_isodual, selling_reduce

SQRT2, SQRT3 = math.sqrt(2.0), math.sqrt(3.0)
unit = st.floats(0.01, 0.99)


def _random_decomposable(rng):
    """(alpha, beta) in the reduced region 2h <= alpha <= beta."""
    while True:
        a = rng.uniform(0.5, 2 / SQRT3)
        lo, hi = max(a, 1 / a), (a * a + 4) / (4 * a)
        if hi >= lo:
            return a, rng.uniform(lo, hi)


def test_parse_param_tokens():
    assert parse_param("2-sqrt2") == 2 - SQRT2
    assert parse_param("sqrt3-1") == SQRT3 - 1
    assert parse_param("2/sqrt3") == 2 / SQRT3
    assert parse_param(" 0.25 ") == 0.25


@pytest.mark.parametrize("text", ["", "abc", "nan", "inf", "sqrt5"])
def test_parse_param_rejects(text):
    with pytest.raises(ValueError):
        parse_param(text)


# indecomposable


def test_symbolic_determinant_is_one():
    a, b = sp.symbols("a b", positive=True)
    g = sp.Matrix(
        [
            [2 * a / b, -a * b, -a * (2 - b)],
            [-a * b, 2 * b / a, -2 * b * (1 - a) / a],
            [-a * (2 - b), -2 * b * (1 - a) / a, (a**2 * b + 2 * a + 2 * b - 4 * a * b) / a],
        ]
    ) / (2 - a * b)
    assert sp.simplify(g.det() - 1) == 0


def test_mcc_point_gram():
    g = indecomposable_gram((2 - SQRT2, 2 - SQRT2)).g
    assert np.allclose(np.diag(g), (1 + SQRT2) / 2, atol=1e-12)
    off = sorted([g[0, 1], g[0, 2], g[1, 2]])
    assert np.allclose(off, sorted([-0.5, -0.5, -(SQRT2 - 1) / 2]), atol=1e-12)
    assert selling_reduce(indecomposable_gram(mcc_params())).equivalent(selling_reduce(mcc_gram()))


def test_half_half_determinant():
    assert abs(indecomposable_gram((0.5, 0.5)).det - 1.0) < 1e-9


@pytest.mark.parametrize("p", [(0.0, 0.5), (0.5, 0.0), (1.0, 0.5), (0.5, 1.0), (-0.1, 0.5), (0.5, 1 - 1e-10)])
def test_indecomposable_domain(p):
    with pytest.raises(DomainError):
        IndecomposableParams(*p)


def test_mcc_conorms():
    c = indecomposable_conorms(mcc_params()).as_dict()
    s = (SQRT2 - 1) / 2
    for k in ("p01", "p03", "p12", "p23"):
        assert c[k] == pytest.approx(0.5, abs=1e-14)
    for k in ("p02", "p13"):
        assert c[k] == pytest.approx(s, abs=1e-14)


def test_half_half_conorms_exact_fractions():
    c = indecomposable_conorms((0.5, 0.5)).values
    assert np.allclose(c, np.array([3, 1, 4, 4, 2, 3]) / 7, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(unit, unit)
def test_indecomposable_conorms_positive(a, b):
    assert min(indecomposable_conorms((a, b)).values) > 0


@settings(max_examples=200, deadline=None)
@given(unit, unit)
def test_indecomposable_conorms_are_superbase_conorms(a, b):
    # the conorms rebuild a determinant-1 lattice isometric to the family member
    rebuilt = conorms_to_gram(indecomposable_conorms((a, b)))
    assert rebuilt.det == pytest.approx(1.0, rel=1e-9)
    assert selling_reduce(rebuilt).equivalent(selling_reduce(indecomposable_gram((a, b))), 1e-9)


def test_indecomposable_family_determinant_and_conorms_500():
    rng = np.random.default_rng(11)
    for a, b in rng.uniform(0.01, 0.99, size=(500, 2)):
        g = indecomposable_gram((a, b))
        assert abs(g.det - 1.0) < 1e-8
        assert selling_reduce(g).equivalent(indecomposable_conorms((a, b)), 1e-8)


@settings(max_examples=200, deadline=None)
@given(unit, unit)
def test_indecomposable_symmetric_under_swap(a, b):
    assert selling_reduce(indecomposable_gram((a, b))).equivalent(
        selling_reduce(indecomposable_gram((b, a))), 1e-9
    )


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_indecomposable_members_are_isodual(a, b):
    assert is_isodual(indecomposable_gram((a, b)))


# decomposable


def test_decomposable_params_examples():
    assert decomposable_params(1, 1).h == 0.0
    assert decomposable_params(1, 2).h == pytest.approx(1.0)
    p = decomposable_params(2 / SQRT3, 2 / SQRT3)
    assert p.h == pytest.approx(1 / SQRT3, abs=1e-12)
    assert 2 * p.h == pytest.approx(p.alpha, abs=1e-12)
    assert p.reduced


def test_decomposable_params_flags_unreduced():
    p = decomposable_params(1, 2)
    assert isinstance(p, DecomposableParams)
    assert not p.reduced


@pytest.mark.parametrize("ab", [(0.5, 0.5), (2.0, 1.0), (0.0, 3.0), (-1.0, -1.0)])
def test_decomposable_domain(ab):
    with pytest.raises(DomainError):
        decomposable_params(*ab)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.0, 3.0))
def test_decomposable_constraint_holds_by_construction(a, extra):
    b = max(a, 1 / a) + extra
    p = decomposable_params(a, b)
    assert abs(p.alpha * p.beta - p.h**2 - 1) < 1e-10


def test_decomposable_gram_examples():
    assert decomposable_gram(decomposable_params(1, 1)).allclose(GramMatrix(np.eye(3)))
    g = decomposable_gram(decomposable_params(1, 2))
    assert np.allclose(g.g, [[1, 0, 0], [0, 1, -1], [0, -1, 2]])
    assert selling_reduce(g).equivalent(selling_reduce(GramMatrix(np.eye(3))))
    hp = decomposable_gram(decomposable_params(2 / SQRT3, 2 / SQRT3))
    assert selling_reduce(hp).equivalent(selling_reduce(hexagonal_prism_gram()))


def test_decomposable_conorm_examples():
    assert decomposable_conorms(decomposable_params(1, 1)).values == (1, 1, 1, 0, 0, 0)
    assert np.allclose(decomposable_conorms(decomposable_params(1, 2)).values, (1, 0, 1, 0, 0, 1))


def test_decomposable_conorms_match_reduction():
    rng = np.random.default_rng(5)
    for _ in range(200):
        p = decomposable_params(*_random_decomposable(rng))
        c = decomposable_conorms(p)
        assert min(c.values) >= 0
        assert selling_reduce(decomposable_gram(p)).equivalent(c, 1e-9)


def test_decomposable_members_are_isodual():
    rng = np.random.default_rng(6)
    for _ in range(50):
        assert is_isodual(decomposable_gram(decomposable_params(*_random_decomposable(rng))))


# named lattices


def test_mcc_gram_properties():
    g = mcc_gram()
    assert abs(g.det - 1) < 1e-12
    assert selling_reduce(g).equivalent(indecomposable_conorms(mcc_params()))
    assert is_isodual(g)


def test_hexagonal_prism_is_z_plus_scaled_a2():
    # A2 with minimal norm 2 has determinant 3
    s = 3 ** -0.25 * SQRT2
    basis = np.array([[1, 0, 0], [0, s, 0], [0, -s / 2, s * SQRT3 / 2]])
    assert GramMatrix(basis @ basis.T).allclose(hexagonal_prism_gram(), rtol=1e-12, atol=1e-15)
    assert isinstance(selling_reduce(hexagonal_prism_gram()), ConormSet)
