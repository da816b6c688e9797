"""Forward periodic scattering: monodromy matrix, Floquet discriminant and main-spectrum recovery."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SynthesisError
from .surface import MainSpectrum
from .synthesis import Waveform, compute_params, periodize, period_of, sample_waveform

DET_TOL = 1e-6
DEDUP_TOL = 1e-4
REAL_AXIS_FLOOR = 0.1
NEIGHBOUR_RADIUS = 0.5
DOUBLE_POINT_RESIDUAL = 1e-12
_NEWTON_ITERS = 60


@dataclass(frozen=True)
class Monodromy:
    lam: complex
    matrix: np.ndarray
    discriminant: complex


def _transfer_batch(q: np.ndarray, dt: float, lam: np.ndarray) -> np.ndarray:
    """Monodromy matrices for every lam, shape (n_lam, 2, 2).

    Sample q_n is held constant over a cell of width dt, where the generator
    U = [[-i lam, q], [-conj q, i lam]] squares to -(lam^2 + |q|^2) I, so
    exp(dt U) = cos(kappa dt) I + sin(kappa dt)/kappa U exactly.
    """
    lam = np.asarray(lam, dtype=complex).reshape(-1, 1)
    q = np.asarray(q, dtype=complex).reshape(1, -1)
    kappa = np.sqrt(lam ** 2 + np.abs(q) ** 2)
    c = np.cos(kappa * dt)
    # sin(x)/x with the x -> 0 limit
    x = kappa * dt
    small = np.abs(x) < 1e-8
    sinc = np.where(small, 1.0 - x * x / 6.0, np.sin(x) / np.where(small, 1.0, x)) * dt
    a = c - 1j * lam * sinc
    d = c + 1j * lam * sinc
    b = q * sinc
    cc = -np.conj(q) * sinc
    # ordered product E_{N-1} ... E_0 by pairwise reduction, entries kept as separate arrays
    while a.shape[1] > 1:
        if a.shape[1] % 2:
            tail = (a[:, -1:], b[:, -1:], cc[:, -1:], d[:, -1:])
            a, b, cc, d = a[:, :-1], b[:, :-1], cc[:, :-1], d[:, :-1]
        else:
            tail = None
        a0, b0, c0, d0 = a[:, 0::2], b[:, 0::2], cc[:, 0::2], d[:, 0::2]
        a1, b1, c1, d1 = a[:, 1::2], b[:, 1::2], cc[:, 1::2], d[:, 1::2]
        a, b, cc, d = a1 * a0 + b1 * c0, a1 * b0 + b1 * d0, c1 * a0 + d1 * c0, c1 * b0 + d1 * d0
        if tail is not None:
            a, b, cc, d = (np.concatenate([x, y], axis=1) for x, y in zip((a, b, cc, d), tail))
    out = np.empty((a.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0], out[:, 0, 1], out[:, 1, 0], out[:, 1, 1] = a[:, 0], b[:, 0], cc[:, 0], d[:, 0]
    return out


def monodromy(wave: Waveform, lam: complex, *, check: bool = True) -> Monodromy:
    """Monodromy over the window covered by ``wave`` (samples taken as cell midpoints)."""
    if len(wave) < 1:
        raise SynthesisError("empty waveform")
    dt = _cell_width(wave)
    m = _transfer_batch(wave.samples, dt, np.array([lam]))[0]
    det = np.linalg.det(m)
    if check and abs(det - 1) > DET_TOL:
        raise SynthesisError(f"monodromy determinant {det} differs from 1")
    return Monodromy(complex(lam), m, complex(0.5 * np.trace(m)))


def _cell_width(wave: Waveform) -> float:
    if wave.period_hint is not None and len(wave) > 1:
        # samples cover [t0, t0 + T) without the endpoint
        T = wave.period_hint
        if abs(wave.dt * len(wave) - T) < 1e-9 * T:
            return T / len(wave)
    return wave.dt


def discriminant(samples, dt: float, lam) -> np.ndarray:
    """Half-trace of the monodromy, vectorised over lam."""
    lam = np.asarray(lam, dtype=complex)
    mats = _transfer_batch(samples, dt, lam.ravel())
    return (0.5 * (mats[:, 0, 0] + mats[:, 1, 1])).reshape(lam.shape)


def detwist(wave: Waveform, twist: float) -> tuple[Waveform, float]:
    """Remove a linear phase so that a quasi-periodic window becomes periodic.

    ``twist`` is the phase gained over one window. Returns the periodic
    waveform and the real shift its spectrum has relative to the original.
    """
    T = _cell_width(wave) * len(wave)
    t_rel = wave.t - wave.t[0]
    samples = wave.samples * np.exp(-1j * twist * t_rel / T)
    return Waveform(wave.t, samples, wave.z, wave.period_hint), twist / (2.0 * T)


def neighbourhood_seeds(points, radius: float = NEIGHBOUR_RADIUS) -> np.ndarray:
    """Each point plus its 8 neighbours on a square of half-side ``radius``."""
    offs = np.array([complex(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)]) * radius
    pts = np.asarray(list(points), dtype=complex).reshape(-1, 1)
    return (pts + offs[None, :]).ravel()


def grid_seeds(re_range, im_range, n_re: int, n_im: int) -> np.ndarray:
    re = np.linspace(re_range[0], re_range[1], n_re)
    im = np.linspace(im_range[0], im_range[1], n_im)
    return (re[None, :] + 1j * im[:, None]).ravel()


@dataclass(frozen=True)
class RecoveryResult:
    points: np.ndarray
    n_seeds: int
    n_failed: int


def find_main_spectrum(wave: Waveform, seeds, *, twist: float = 0.0,
                       real_floor: float | None = None, dedup: float | None = None,
                       double_points: bool = False) -> RecoveryResult:
    """Newton iteration on Delta^2 - 1 from every seed, run in one batch.

    Newton stalls at double points, where Delta^2 - 1 and its derivative vanish
    together; with ``double_points`` an iterate is also accepted once
    |Delta^2 - 1| < DOUBLE_POINT_RESIDUAL.

    A nonzero ``twist`` (phase gained over the window) is removed first and
    the resulting real shift is undone on the recovered points.
    """
    real_floor = REAL_AXIS_FLOOR if real_floor is None else real_floor
    dedup = DEDUP_TOL if dedup is None else dedup
    seeds = np.asarray(seeds, dtype=complex).ravel()
    shift = 0.0
    if twist:
        wave, shift = detwist(wave, twist)
    dt = _cell_width(wave)
    q = wave.samples
    lam = seeds + shift
    active = np.ones(lam.size, dtype=bool)
    done = np.zeros(lam.size, dtype=bool)
    for _ in range(_NEWTON_ITERS):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        x = lam[idx]
        h = 1e-6 * np.maximum(1.0, np.abs(x))
        d = discriminant(q, dt, np.concatenate([x, x + h, x - h]))
        f0, fp, fm = d[: idx.size], d[idx.size: 2 * idx.size], d[2 * idx.size:]
        F = f0 ** 2 - 1.0
        dF = (fp ** 2 - fm ** 2) / (2.0 * h)
        bad = ~np.isfinite(dF) | (dF == 0)
        step = np.where(bad, 0.0, F / np.where(bad, 1.0, dF))
        # damp huge jumps so iterates stay near their seed
        big = np.abs(step) > 2.0
        step[big] *= 2.0 / np.abs(step[big])
        lam[idx] = x - step
        conv = (np.abs(step) < 1e-11 * np.maximum(1.0, np.abs(x))) & ~bad
        if double_points:
            conv |= np.abs(F) < DOUBLE_POINT_RESIDUAL
        done[idx[conv]] = True
        # iterates sinking onto the real axis head for double points; drop them early
        sinking = np.abs(lam[idx].imag) < 0.5 * real_floor
        active[idx[conv | bad | sinking | ~np.isfinite(lam[idx])]] = False
    ok = done & np.isfinite(lam)
    roots = lam[ok] - shift
    roots = roots[np.abs(roots.imag) >= real_floor]
    uniq: list[complex] = []
    for r in sorted(roots, key=lambda z: (z.real, z.imag)):
        if all(abs(r - u) > dedup for u in uniq):
            uniq.append(r)
    return RecoveryResult(np.array(uniq, dtype=complex), seeds.size, int(np.count_nonzero(~ok)))


def plane_wave_spectrum(A: float, T: float, n_max: int) -> np.ndarray:
    """Zeros of Delta^2 - 1 for q = A on a window T: +-sqrt((pi k / T)^2 - A^2)."""
    k = np.arange(n_max + 1)
    lam = np.sqrt((np.pi * k / T) ** 2 - A ** 2 + 0j)
    return np.concatenate([lam, -lam])


@dataclass(frozen=True)
class RoundTripReport:
    nominal: np.ndarray
    recovered: np.ndarray
    errors: np.ndarray
    n_samples: int
    period: float

    @property
    def max_error(self) -> float:
        return float(np.max(self.errors)) if self.errors.size else 0.0

    def to_json(self) -> dict:
        rows = []
        for n, r, e in zip(self.nominal, self.recovered, self.errors):
            rows.append({
                "nominal": {"re": float(n.real), "im": float(n.imag)},
                "recovered": None if not np.isfinite(r) else {"re": float(r.real), "im": float(r.imag)},
                "abs_error": float(e) if np.isfinite(e) else None,
            })
        return {"n_samples": self.n_samples, "period": self.period,
                "max_error": self.max_error if np.all(np.isfinite(self.errors)) else None, "points": rows}


def roundtrip_report(spec: MainSpectrum, n_samples: int = 2048, *, base: float | None = None,
                     period: float | None = None) -> RoundTripReport:
    """Synthesize one period, recover the spectrum, match each nominal point to its nearest root."""
    params = compute_params(spec)
    if base is not None:
        params = periodize(params, base)
    T = period if period is not None else period_of(params)
    if T is None:
        if params.genus == 0:
            T = 2 * math.pi
        else:
            raise SynthesisError("spectrum does not give a periodic waveform; pass base or period")
    wave = sample_waveform(params, 0.0, T, n_samples, endpoint=False)
    wave = Waveform(wave.t, wave.samples, wave.z, T)
    nominal = np.asarray(spec.upper_points, dtype=complex)
    res = find_main_spectrum(wave, neighbourhood_seeds(nominal), twist=params.omega0 * T)
    rec = np.full(nominal.size, np.nan + 0j)
    err = np.full(nominal.size, np.inf)
    if res.points.size:
        for i, p in enumerate(nominal):
            d = np.abs(res.points - p)
            j = int(np.argmin(d))
            rec[i], err[i] = res.points[j], d[j]
    return RoundTripReport(nominal, rec, err, n_samples, T)
