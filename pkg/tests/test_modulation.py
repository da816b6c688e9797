from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from finitegap.channel import FiberParams, UnitMap
from finitegap.errors import ErasureError
from finitegap.modulation import (GRAY_CODE, LinkConfig, NfamConfig, bits_to_int, build_constellation,
                                  count_maxima, detect_symbol, genus_constellation, genus_demo, genus_spectrum,
                                  level_indices, mean_power, nfam_demap, nfam_encode, receiver_seeds,
                                  simulate_nfam, symbol_power)
from finitegap.surface import MainSpectrum
from finitegap.synthesis import Waveform, compute_params, eval_q, sample_period

symbols = st.integers(0, 255)


def test_genus3_reference_symbol():
    # levels (5, 7, 7, 5) are Gray words 00 01 01 00
    spec = nfam_encode("00010100")
    assert spec == MainSpectrum((-30 + 5j, -10 + 7j, 10 + 7j, 30 + 5j))


def test_all_zero_bits():
    assert [p.imag for p in nfam_encode(0).upper_points] == [5.0] * 4


def test_gray_neighbours_differ_in_one_bit():
    for a, b in zip(GRAY_CODE, GRAY_CODE[1:]):
        assert sum(x != y for x, y in zip(a, b)) == 1


@given(symbols)
def test_encode_demap_identity(s):
    spec = nfam_encode(s)
    pts = np.array(spec.upper_points + tuple(p.conjugate() for p in spec.upper_points))
    assert bits_to_int(nfam_demap(pts)) == s


@given(symbols, st.lists(st.complex_numbers(max_magnitude=0.99, allow_nan=False, allow_infinity=False),
                         min_size=4, max_size=4))
def test_demap_tolerates_small_perturbation(s, noise):
    pts = np.array(nfam_encode(s).upper_points) + 0.99 * np.array(noise) * np.array([1, 1, 1, 1])
    pts = np.array([complex(p.real, np.clip(p.imag, 0.1, None)) for p in pts])
    assert bits_to_int(nfam_demap(pts)) == s


@given(symbols)
def test_levels_are_independent(s):
    idx = level_indices(s)
    spec = nfam_encode(s)
    assert tuple(NfamConfig().levels[i] for i in idx) == tuple(p.imag for p in spec.upper_points)


def test_demap_extra_points_below_ignored():
    spec = nfam_encode(0b11100100)
    pts = np.array(spec.upper_points + (0.5 + 0.2j, -7 + 1j, 3 - 4j))
    assert bits_to_int(nfam_demap(pts)) == 0b11100100


def test_erasure_on_too_few_points():
    with pytest.raises(ErasureError):
        nfam_demap([1 + 5j, 2 + 7j, 3 - 1j])


def test_demap_tie_break_prefers_small_real_part():
    pts = [-30 + 9j, -10 + 9j, 10 + 9j, 30 + 9j, 50 + 9j]
    bits = nfam_demap(pts)
    assert bits_to_int(bits) == bits_to_int("11111111")


def test_config_validation():
    with pytest.raises(ValueError):
        NfamConfig(levels=(5, 7, 7, 9))
    with pytest.raises(ValueError):
        NfamConfig(gray_map=("00", "01", "01", "10"))
    with pytest.raises(ValueError):
        nfam_encode("0101")


def test_genus_spectra():
    assert genus_spectrum(3) == MainSpectrum((20 + 5j, 40 + 5j, 60 + 5j, 80 + 5j))
    assert genus_spectrum(1) == MainSpectrum((20 + 5j, 40 + 5j))
    assert [s.genus for s in genus_constellation(5)] == [1, 2, 3, 4, 5]


def test_genus_maxima_nondecreasing():
    rows = genus_demo(5, 1024)
    counts = [r.maxima for r in rows]
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert counts[-1] > counts[0]


def test_symbol_power_plane_wave():
    A = 1.3
    w = Waveform(np.arange(16) * 0.1, np.full(16, A, dtype=complex))
    u = UnitMap(1e-9, 1e9, 2e-3)
    assert symbol_power(w, u) == pytest.approx(10 * math.log10(2e-3 * A * A / 1e-3))


def test_power_invariant_under_shift():
    spec = nfam_encode(37)
    p, ps = compute_params(spec), compute_params(spec.shifted(0.7))
    t = np.linspace(0, 2 * math.pi / 40, 256, endpoint=False)
    assert mean_power(Waveform(t, eval_q(ps, t))) == pytest.approx(mean_power(Waveform(t, eval_q(p, t))), rel=1e-9)


def test_constellation_shares_period(constellation):
    assert len(constellation) == 256
    assert {p.base for p in constellation.params.values()} == {40.0}
    for p in constellation.params.values():
        assert np.all(np.mod(p.omega, 40.0) == 0)


def test_constellation_cache_roundtrip(tmp_path):
    cfg = NfamConfig()
    a = build_constellation(cfg, [0, 37, 255], tmp_path)
    files = list(tmp_path.glob("nfam-*.json"))
    assert len(files) == 1 and cfg.digest() in files[0].name
    b = build_constellation(cfg, [0, 37, 255], tmp_path)
    for s in (0, 37, 255):
        assert a.params[s] == b.params[s]


def test_round_trip_genus3_reference_symbol(constellation, nfam_cfg):
    s = bits_to_int("00010100")
    p = constellation.params[s]
    w = sample_period(p, nfam_cfg.samples_per_period)
    bits = detect_symbol(w, p.omega0 * nfam_cfg.period, nfam_cfg, receiver_seeds(nfam_cfg))
    assert bits_to_int(bits) == s


def test_simulation_reproducible(constellation, nfam_cfg):
    link = LinkConfig(distance_km=75.0, noise=True)
    a = simulate_nfam(6, link, nfam_cfg, seed=3, const=constellation)
    b = simulate_nfam(6, link, nfam_cfg, seed=3, const=constellation)
    assert a == b and a.n_symbols == 6


def test_link_validation():
    with pytest.raises(ValueError):
        LinkConfig(distance_km=100.0)
    with pytest.raises(ValueError):
        LinkConfig(prefix_periods=0)
    assert LinkConfig(distance_km=225.0).spans == 3


def test_count_maxima_cosine():
    t = np.linspace(0, 2 * math.pi, 200, endpoint=False)
    w = Waveform(t, (2 + np.cos(3 * t)).astype(complex))
    assert count_maxima(w) == 3
