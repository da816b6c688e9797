from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from finitegap.contour import compute_period_data
from finitegap.homology import homology_basis
from finitegap.meromorphic import d_coefficients, omega_tilde_numerators, scalar_params
from finitegap.surface import MainSpectrum, sort_spectrum


def _scalars(spec, split=None):
    o = sort_spectrum(spec)
    b = homology_basis(o)
    return scalar_params(o, b, compute_period_data(o, b), split)


def test_genus2_reference_scalars(table1):
    s = _scalars(table1)
    assert s.K0_abs == pytest.approx(3.6061, abs=1e-4)
    assert s.k0 == pytest.approx(78.8096, abs=1e-4)
    assert abs(s.omega0) < 1e-10


def test_genus3_reference_scalars(table2):
    s = _scalars(table2)
    assert s.K0_abs == pytest.approx(6.4261, abs=1e-4)
    assert s.omega0 == pytest.approx(-21.5630, abs=1e-4)
    assert s.k0 == pytest.approx(2.6069, abs=1e-4)


def test_split_point_independence(table1):
    # the regularized integrals must not depend on where the path is cut
    a, b = _scalars(table1), _scalars(table1, split=7.5)
    assert b.K0_abs == pytest.approx(a.K0_abs, rel=1e-9)
    assert b.omega0 == pytest.approx(a.omega0, abs=1e-9)
    assert b.k0 == pytest.approx(a.k0, rel=1e-9)


def test_plane_wave_closed_form():
    # a single point iA gives q = A exp(2 i A^2 z)
    s = _scalars(MainSpectrum((1.7j,)))
    assert s.K0_abs == pytest.approx(1.7, rel=1e-10)
    assert abs(s.omega0) < 1e-10
    assert s.k0 == pytest.approx(2 * 1.7 ** 2, rel=1e-10)


@settings(max_examples=10)
@given(st.floats(-3, 3), st.floats(0.5, 3))
def test_genus_zero_shift(x, a):
    # shifting the point by x adds -2x to omega0 and leaves |K0| alone
    s = _scalars(MainSpectrum((complex(x, a),)))
    assert s.K0_abs == pytest.approx(a, rel=1e-9)
    assert s.omega0 == pytest.approx(-2 * x, abs=1e-8)


def test_numerators_have_expected_degree(table2):
    o = sort_spectrum(table2)
    n0, n1, n2 = omega_tilde_numerators(o)
    g = o.genus
    assert (n0.degree, n1.degree, n2.degree) == (g, g + 1, g + 2)
    d1, _ = d_coefficients(o)
    assert d1 == pytest.approx(0.0, abs=1e-12)  # real parts cancel for this spectrum
