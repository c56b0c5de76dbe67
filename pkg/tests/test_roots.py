import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoquant.roots import QUADRATIC_EDGE, QUADRATIC_MCC, SEXTIC, isolate_real_roots, sextic_roots


def test_sextic_coefficients():
    assert SEXTIC == (57, -220, -102, 1448, -1860, 832, -152)


def test_sextic_single_root_in_unit_interval():
    r = sextic_roots((0.0, 1.0))
    assert len(r) == 1
    assert math.floor(r.roots_in_interval[0] * 1e4) / 1e4 == 0.9894
    assert r.residuals[0] < 1e-10


def test_sextic_root_brackets_sign_change():
    r = sextic_roots().roots_in_interval[0]
    assert 0.98 < r < 0.999
    p = np.poly1d(SEXTIC)
    assert p(0.98) * p(0.999) < 0


def test_sextic_root_agrees_with_companion_matrix():
    eig = np.roots(SEXTIC)
    real = sorted(x.real for x in eig if abs(x.imag) < 1e-9 and 0 < x.real < 1)
    assert len(real) == 1
    assert sextic_roots().roots_in_interval[0] == pytest.approx(real[0], abs=1e-12)


def test_quadratic_factor_roots():
    (a,) = isolate_real_roots(QUADRATIC_MCC, 0, 1).roots_in_interval
    (b,) = isolate_real_roots(QUADRATIC_EDGE, 0, 1).roots_in_interval
    assert abs(a - (2 - math.sqrt(2))) < 1e-12
    assert abs(b - (math.sqrt(3) - 1)) < 1e-12


def test_full_eliminant_roots_in_unit_interval():
    # product of all factors; the only unit-interval roots are the three above
    x = np.poly1d([1, 0])
    full = (
        x * (x - 1) * (x - 2) * np.poly1d(QUADRATIC_EDGE) * np.poly1d(QUADRATIC_MCC)
        * np.poly1d([1, -4, 6, 0, -4]) * np.poly1d(SEXTIC)
    )
    roots = isolate_real_roots(full.coeffs, 0.0, 1.0, subdivisions=1 << 16).roots_in_interval
    expected = sorted([2 - math.sqrt(2), math.sqrt(3) - 1, sextic_roots().roots_in_interval[0]])
    assert np.allclose(roots, expected, atol=1e-10)


def test_roots_strictly_inside_interval():
    # x(x - 1) has roots only at the endpoints
    assert len(isolate_real_roots([1, -1, 0], 0.0, 1.0)) == 0


def test_exact_zero_on_grid_is_reported():
    # (x - 1/2)^2 has no sign change but vanishes exactly at a grid node
    r = isolate_real_roots([1, -1, 0.25], 0.0, 1.0)
    assert r.roots_in_interval == (0.5,)
    assert r.residuals == (0.0,)


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        isolate_real_roots([1, 0], 1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=4, unique=True))
def test_recovers_planted_roots(planted):
    planted = sorted(planted)
    if min(np.diff(planted), default=1.0) < 1e-3:
        return
    coeffs = np.poly(planted)
    r = isolate_real_roots(coeffs, 0.0, 1.0, subdivisions=1 << 14)
    assert np.allclose(r.roots_in_interval, planted, atol=1e-9)
    assert all(lo < x < hi for x in r.roots_in_interval for lo, hi in [r.interval])
