"""Normalized second/third-kind differentials and the scalar parameters |K0|, omega0, k0."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contour import PeriodData, RationalDifferential, path_moments, real_segment, real_tail
from .errors import PeriodError
from .homology import HomologyBasis
from .surface import OrderedSpectrum

SCALAR_REALITY_TOL = 1e-6
# leading coefficient of the divergence removed at infinity, per channel
_LEAD = (1.0, 1.0, 4.0)


@dataclass(frozen=True)
class ScalarParams:
    K0_abs: float
    omega0: float
    k0: float
    # imaginary parts discarded when the values were made real
    omega0_imag: float = 0.0
    k0_imag: float = 0.0


def d_coefficients(spec: OrderedSpectrum) -> tuple[complex, complex]:
    lam = spec.array
    d1 = 0.5 * np.sum(lam)
    pair_sum = 0.5 * (np.sum(lam) ** 2 - np.sum(lam ** 2))
    d2 = (np.sum(lam ** 2) - 2.0 * pair_sum) / 8.0
    return complex(d1), complex(d2)


def omega_tilde_numerators(spec: OrderedSpectrum) -> tuple[RationalDifferential, ...]:
    """Numerators with the right leading divergence and no subleading ones at infinity."""
    g = spec.genus
    d1, d2 = d_coefficients(spec)
    n0 = np.zeros(g + 3, dtype=complex)
    n0[g] = 1.0
    n1 = np.zeros(g + 3, dtype=complex)
    n1[g + 1], n1[g] = 1.0, -d1
    n2 = np.zeros(g + 3, dtype=complex)
    n2[g + 2], n2[g + 1], n2[g] = 4.0, -4.0 * d1, -4.0 * d2
    return tuple(RationalDifferential(tuple(np.trim_zeros(n, "b"))) for n in (n0, n1, n2))


def normalize_meromorphic(spec: OrderedSpectrum, basis: HomologyBasis, periods: PeriodData,
                          channel: int, a_moments=None) -> RationalDifferential:
    """Subtract normalized holomorphic differentials so every a-period vanishes."""
    g = spec.genus
    raw = omega_tilde_numerators(spec)[channel]
    if g == 0:
        return raw
    if a_moments is None:
        a_moments = [path_moments(spec, a, g + 3) for a in basis.a_cycles]
    alpha = np.array([raw.integrate(m) for m in a_moments])
    coeffs = raw.padded(g + 3)
    coeffs[:g] -= alpha @ periods.A_inv
    return RationalDifferential(tuple(coeffs))


def _closed_form(channel: int, X: float) -> float:
    # 2 int_1^X dl/l, 2 int_0^X dl, 2 int_0^X 4 l dl
    if channel == 0:
        return 2.0 * math.log(X)
    if channel == 1:
        return 2.0 * X
    return 4.0 * X * X


def regularized_integral(spec: OrderedSpectrum, basis: HomologyBasis, diff: RationalDifferential,
                         channel: int, split: float | None = None) -> complex:
    """int_{inf^-}^{inf^+} d Omega minus its leading divergence.

    The path is split at M (where the infinity path meets the real axis)
    and, if larger, at ``split``; the real-axis pieces are traversed on
    both sheets and so contribute twice.
    """
    M = basis.M
    X = max(M, 1.0) if split is None else max(split, M)
    coeffs = diff.padded(spec.genus + 3)
    mid = diff.integrate(path_moments(spec, basis.infinity_path, spec.genus + 3))
    between = 2.0 * real_segment(spec, coeffs, M, X) if X > M else 0j
    tail = 2.0 * real_tail(spec, coeffs, X, _LEAD[channel])
    return mid + between + tail - _closed_form(channel, X)


def scalar_params(spec: OrderedSpectrum, basis: HomologyBasis, periods: PeriodData,
                  split: float | None = None) -> ScalarParams:
    g = spec.genus
    a_moments = [path_moments(spec, a, g + 3) for a in basis.a_cycles]
    res = []
    for ch in range(3):
        diff = normalize_meromorphic(spec, basis, periods, ch, a_moments)
        res.append(regularized_integral(spec, basis, diff, ch, split))
    k0_sq = -4.0 * np.exp(-res[0])
    scale = abs(k0_sq)
    if abs(k0_sq.imag) > SCALAR_REALITY_TOL * max(scale, 1.0) or k0_sq.real <= 0:
        raise PeriodError(f"|K0|^2 evaluates to {k0_sq}, expected a positive real number")
    for name, val in (("omega0", res[1]), ("k0", res[2])):
        if abs(val.imag) > SCALAR_REALITY_TOL * max(1.0, abs(val)):
            raise PeriodError(f"{name} has imaginary part {val.imag:.3e}")
    return ScalarParams(math.sqrt(k0_sq.real), res[1].real, res[2].real, abs(res[1].imag), abs(res[2].imag))
