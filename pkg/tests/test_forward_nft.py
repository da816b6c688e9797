from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finitegap.errors import SynthesisError
from finitegap.forward_nft import (_transfer_batch, detwist, discriminant, find_main_spectrum, grid_seeds,
                                   monodromy, neighbourhood_seeds, plane_wave_spectrum, roundtrip_report)
from finitegap.surface import MainSpectrum
from finitegap.synthesis import Waveform, sample_period


def plane(A, T=2 * math.pi, n=256):
    t = T * np.arange(n) / n
    return Waveform(t, np.full(n, A, dtype=complex), 0.0, T)


@given(st.floats(0.1, 3.0), st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_plane_wave_discriminant_closed_form(A, lam):
    w = plane(A)
    got = discriminant(w.samples, w.dt, lam)
    assert got == pytest.approx(np.cos(np.sqrt(lam ** 2 + A ** 2 + 0j) * 2 * math.pi), rel=1e-9, abs=1e-9)


@settings(max_examples=15)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=4,
                max_size=64), st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False))
def test_monodromy_unimodular(q, lam):
    m = _transfer_batch(np.array(q), 0.05, np.array([lam]))[0]
    assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-8 * max(1.0, np.max(np.abs(m)) ** 2))


def test_monodromy_record(params1):
    w = sample_period(params1, 256)
    m = monodromy(w, 0.3 + 0.2j)
    assert m.discriminant == pytest.approx(0.5 * np.trace(m.matrix))


def test_plane_wave_recovery_includes_double_points():
    A = 1.7
    w = plane(A, n=1024)
    nominal = plane_wave_spectrum(A, 2 * math.pi, 6)
    nominal = nominal[np.abs(nominal.imag) > 0.5]
    res = find_main_spectrum(w, neighbourhood_seeds(nominal, 0.2), real_floor=0.5, double_points=True)
    for p in nominal:
        assert np.min(np.abs(res.points - p)) < 1e-6
    # without the residual test only the simple points +-iA are returned
    simple = find_main_spectrum(w, neighbourhood_seeds(nominal, 0.2), real_floor=0.5)
    np.testing.assert_allclose(np.sort(simple.points.imag), [-A, A], atol=1e-9)


def test_roundtrip_genus2_reference_converges_second_order():
    e512 = roundtrip_report(MainSpectrum((-1 + 3j, 5j, 1 + 3j)), 512).max_error
    e2048 = roundtrip_report(MainSpectrum((-1 + 3j, 5j, 1 + 3j)), 2048).max_error
    assert e2048 < 5e-2 and e2048 < e512 / 8


def test_roundtrip_genus_zero():
    assert roundtrip_report(MainSpectrum((1.3j,)), 256).max_error < 1e-3


def test_detwist_shift():
    T, n = 1.0, 128
    t = T * np.arange(n) / n
    phi = 0.7
    w = Waveform(t, np.exp(1j * phi * t / T) * 2.0, 0.0, T)
    flat, shift = detwist(w, phi)
    np.testing.assert_allclose(flat.samples, 2.0)
    assert shift == pytest.approx(phi / (2 * T))


def test_twisted_genus3_reference_window(params2):
    # genus-3 reference is quasi-periodic only after snapping; recover on the periodized version
    from finitegap.synthesis import periodize
    p = periodize(params2, 40.0, snap_small=True)
    w = sample_period(p, 1024)
    seeds = grid_seeds((-50, 50), (4, 8), 21, 3)
    res = find_main_spectrum(w, seeds, twist=p.omega0 * 2 * math.pi / 40)
    top = res.points[res.points.imag > 0]
    assert len(top) >= 4
    assert sorted(np.round(top.imag))[-4:] == [5.0, 5.0, 7.0, 7.0]


def test_monodromy_rejects_empty():
    with pytest.raises(SynthesisError):
        monodromy(Waveform(np.zeros(0), np.zeros(0)), 0.1j)


def test_grid_seeds_shape():
    assert grid_seeds((-1, 1), (1, 2), 5, 3).shape == (15,)
