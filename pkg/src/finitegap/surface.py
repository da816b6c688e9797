"""Main spectrum and the two-sheeted hyperelliptic curve it defines.

The curve is P(lambda)^2 = prod_k (lambda - lambda_k)(lambda - conj(lambda_k)),
with P taken as sheet * principal_sqrt(P^2).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SpectrumError

DISTINCT_TOL = 1e-9


@dataclass(frozen=True)
class MainSpectrum:
    """The g+1 upper-half-plane points of a finite-gap main spectrum."""

    upper_points: tuple[complex, ...]

    def __post_init__(self) -> None:
        pts = tuple(complex(p) for p in self.upper_points)
        object.__setattr__(self, "upper_points", pts)
        if not pts:
            raise SpectrumError("spectrum needs at least one point")
        for p in pts:
            if not np.isfinite(p.real) or not np.isfinite(p.imag):
                raise SpectrumError(f"non-finite spectral point {p!r}")
            if p.imag <= 0.0:
                raise SpectrumError(f"point {p!r} must have strictly positive imaginary part")
        for p, q in itertools.combinations(pts, 2):
            if abs(p - q) < DISTINCT_TOL:
                raise SpectrumError(f"points {p!r} and {q!r} coincide (double point)")

    @property
    def genus(self) -> int:
        return len(self.upper_points) - 1

    def full(self) -> np.ndarray:
        pts = np.asarray(self.upper_points, dtype=complex)
        return np.concatenate([pts, pts.conj()])

    def shifted(self, shift: float) -> "MainSpectrum":
        return MainSpectrum(tuple(p + float(shift) for p in self.upper_points))

    def to_json(self) -> dict:
        return {"points": [{"re": p.real, "im": p.imag} for p in self.upper_points]}

    @classmethod
    def from_json(cls, data: dict) -> "MainSpectrum":
        try:
            raw = data["points"]
            pts = tuple(complex(float(p["re"]), float(p["im"])) for p in raw)
        except (KeyError, TypeError, ValueError) as exc:
            raise SpectrumError(f"malformed spectrum record: {exc}") from exc
        return cls(pts)


def load_spectrum(path: str | Path) -> MainSpectrum:
    with open(path) as fh:
        return MainSpectrum.from_json(json.load(fh))


@dataclass(frozen=True)
class OrderedSpectrum:
    """All 2g+2 branch points, ordered for the homology construction.

    Consecutive entries 2j-1, 2j are conjugate pairs, pairs are sorted by
    increasing |Im|, and the sign of Im alternates so that entries 2j and
    2j+1 (1-based) lie on the same side of the real axis.
    """

    points: tuple[complex, ...]

    @property
    def genus(self) -> int:
        return len(self.points) // 2 - 1

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)

    def __len__(self) -> int:
        return len(self.points)


def check_ordering(points) -> None:
    pts = list(points)
    n = len(pts)
    if n % 2 or n < 2:
        raise SpectrumError("ordered spectrum must have an even number >= 2 of points")
    for j in range(0, n, 2):
        if pts[j] != pts[j + 1].conjugate():
            raise SpectrumError(f"entries {j + 1},{j + 2} are not a conjugate pair")
    for j in range(1, n - 1, 2):
        a, b = pts[j], pts[j + 1]
        if abs(a.imag) > abs(b.imag):
            raise SpectrumError(f"|Im| decreases between entries {j + 1} and {j + 2}")
        if np.sign(a.imag) != np.sign(b.imag):
            raise SpectrumError(f"entries {j + 1} and {j + 2} are on opposite sides of the real axis")


def sort_spectrum(spec: MainSpectrum) -> OrderedSpectrum:
    """Order the full spectrum as required by the cycle construction.

    Pairs are sorted by |Im| and then by real part. The sign chain starts
    with the upper point in position 2.
    """
    upper = sorted(spec.upper_points, key=lambda p: (abs(p.imag), p.real))
    ordered: list[complex] = []
    sign = 1.0
    for p in upper:
        second = p if sign > 0 else p.conjugate()
        ordered.extend([second.conjugate(), second])
        # the next pair's first entry must share the side of this pair's second entry,
        # so its second entry is on the opposite side
        sign = -sign
    check_ordering(ordered)
    return OrderedSpectrum(tuple(ordered))


def curve_squared(points, lam) -> np.ndarray | complex:
    """P^2 at lam (scalar or array)."""
    lam = np.asarray(lam, dtype=complex)
    out = np.ones_like(lam)
    for p in np.asarray(points, dtype=complex):
        out = out * (lam - p)
    # turn a signed zero imaginary part into +0 so the branch is the upper one
    return out + 0.0j


def principal_sqrt(w):
    return np.sqrt(np.asarray(w, dtype=complex) + 0.0j)


def eval_P(spec: OrderedSpectrum, lam, sheet: int = 1):
    """sheet * principal_sqrt(P^2(lam))."""
    if sheet not in (1, -1):
        raise ValueError("sheet must be +1 or -1")
    val = sheet * principal_sqrt(curve_squared(spec.points, lam))
    return val[()] if np.ndim(val) == 0 else val


def epsilon(spec: OrderedSpectrum | np.ndarray) -> float:
    """Half the smallest Chebyshev-style distance between two branch points."""
    pts = np.asarray(spec.points if isinstance(spec, OrderedSpectrum) else spec, dtype=complex)
    if pts.size < 2:
        raise SpectrumError("epsilon needs at least two branch points")
    d = pts[:, None] - pts[None, :]
    cheb = np.maximum(np.abs(d.real), np.abs(d.imag))
    iu = np.triu_indices(pts.size, k=1)
    return 0.5 * float(np.min(cheb[iu]))
