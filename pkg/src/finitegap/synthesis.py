"""Theta-function parameters of a finite-gap solution and evaluation of q(t, z)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import io
from .contour import compute_period_data
from .errors import SynthesisError
from .homology import homology_basis
from .meromorphic import scalar_params
from .surface import MainSpectrum, OrderedSpectrum, sort_spectrum
from . import theta as _theta
from .theta import ThetaSeries

DENOMINATOR_FLOOR = 1e-12
SNAP_WINDOW = 0.2
COMMENSURATE_TOL = 1e-9
_PHASE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class ThetaParams:
    """Everything needed to evaluate the closed-form solution.

    q(t, z) = K0_abs * theta((omega t + k z + delta_minus) / 2 pi)
                     / theta((omega t + k z + delta_plus) / 2 pi)
                     * exp(i omega0 t + i k0 z)
    """

    K0_abs: float
    omega0: float
    k0: float
    omega: np.ndarray
    k: np.ndarray
    delta_plus: np.ndarray
    delta_minus: np.ndarray
    tau: np.ndarray
    spectrum: OrderedSpectrum | None = None
    base: float | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float).reshape(-1))
        object.__setattr__(self, "k", np.asarray(self.k, dtype=float).reshape(-1))
        g = self.omega.size
        dp = np.asarray(self.delta_plus, dtype=complex).reshape(-1)
        if dp.size and np.max(np.abs(dp.imag)) > 0:
            raise SynthesisError("delta_plus must be real")
        object.__setattr__(self, "delta_plus", dp.real.astype(float))
        object.__setattr__(self, "delta_minus", np.asarray(self.delta_minus, dtype=complex).reshape(-1))
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=complex).reshape(g, g))
        for name in ("k", "delta_plus", "delta_minus"):
            if getattr(self, name).size != g:
                raise SynthesisError(f"{name} has length {getattr(self, name).size}, expected {g}")

    @property
    def genus(self) -> int:
        return self.omega.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, ThetaParams):
            return NotImplemented
        arrays = ("omega", "k", "delta_plus", "delta_minus", "tau")
        scalars = ("K0_abs", "omega0", "k0", "spectrum", "base")
        return (all(getattr(self, a) == getattr(other, a) for a in scalars)
                and all(np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays))

    __hash__ = None

    def to_json(self) -> dict:
        out = {
            "genus": self.genus,
            "K0_abs": self.K0_abs,
            "omega0": self.omega0,
            "k0": self.k0,
            "omega": [float(v) for v in self.omega],
            "k": [float(v) for v in self.k],
            "delta_plus": [float(v) for v in self.delta_plus],
            "delta_minus": io.complex_list(self.delta_minus),
            "tau": io.complex_matrix(self.tau),
            "base": self.base,
        }
        if self.spectrum is not None:
            out["ordered_spectrum"] = io.complex_list(self.spectrum.points)
        if self.diagnostics:
            out["diagnostics"] = dict(self.diagnostics)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ThetaParams":
        g = int(data["genus"])
        spec = None
        if "ordered_spectrum" in data:
            spec = OrderedSpectrum(tuple(io.parse_complex(p) for p in data["ordered_spectrum"]))
        tau = np.array([[io.parse_complex(v) for v in row] for row in data["tau"]], dtype=complex)
        return cls(
            K0_abs=float(data["K0_abs"]),
            omega0=float(data["omega0"]),
            k0=float(data["k0"]),
            omega=np.array(data["omega"], dtype=float),
            k=np.array(data["k"], dtype=float),
            delta_plus=np.array(data["delta_plus"], dtype=float),
            delta_minus=np.array([io.parse_complex(v) for v in data["delta_minus"]], dtype=complex),
            tau=tau.reshape(g, g),
            spectrum=spec,
            base=data.get("base"),
        )


def _reduce_phase(delta: np.ndarray) -> np.ndarray:
    """Real parts into [0, 2 pi); theta has period 1 in every argument."""
    two_pi = 2.0 * math.pi
    re = delta.real - two_pi * np.floor(delta.real / two_pi + _PHASE_SLACK)
    re[np.abs(re) < _PHASE_SLACK] = 0.0
    return re + 1j * delta.imag


def compute_params(spec: MainSpectrum) -> ThetaParams:
    """Full pipeline: ordering, homology basis, periods, phases, scalar parameters."""
    ordered = sort_spectrum(spec)
    basis = homology_basis(ordered)
    periods = compute_period_data(ordered, basis)
    scalars = scalar_params(ordered, basis, periods)
    g = ordered.genus
    delta_plus = np.zeros(g)
    delta_minus = _reduce_phase(delta_plus - periods.delta_diff)
    diag = {
        "omega_imag_residue": periods.omega_imag,
        "k_imag_residue": periods.k_imag,
        "omega0_imag_residue": scalars.omega0_imag,
        "k0_imag_residue": scalars.k0_imag,
        "M": basis.M,
        "epsilon": basis.eps,
    }
    return ThetaParams(scalars.K0_abs, scalars.omega0, scalars.k0, periods.omega, periods.k,
                       delta_plus, delta_minus, periods.tau, ordered, None, diag)


@lru_cache(maxsize=64)
def _series(tau_bytes: bytes, g: int, tol: float) -> ThetaSeries:
    tau = np.frombuffer(tau_bytes, dtype=complex).reshape(g, g)
    return ThetaSeries(tau, tol)


def theta_series(params: ThetaParams, tol: float | None = None) -> ThetaSeries:
    tol = _theta.DEFAULT_TOL if tol is None else tol
    return _series(np.ascontiguousarray(params.tau).tobytes(), params.genus, tol)


def eval_q(params: ThetaParams, t, z=0.0, *, tol: float | None = None):
    """q(t, z) for scalar or array t and z (broadcast together)."""
    t_arr, z_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(z, dtype=float))
    shape = t_arr.shape
    tt, zz = t_arr.ravel(), z_arr.ravel()
    carrier = np.exp(1j * (params.omega0 * tt + params.k0 * zz))
    if params.genus == 0:
        out = params.K0_abs * carrier
    else:
        th = theta_series(params, tol)
        phase = np.outer(tt, params.omega) + np.outer(zz, params.k)
        num = th((phase + params.delta_minus) / (2 * math.pi))
        den = th((phase + params.delta_plus) / (2 * math.pi))
        small = np.abs(den) < DENOMINATOR_FLOOR
        if np.any(small):
            i = int(np.flatnonzero(small)[0])
            raise SynthesisError(f"theta denominator {abs(den[i]):.3e} near zero at t={tt[i]}, z={zz[i]}")
        out = params.K0_abs * num / den * carrier
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def periodize(params: ThetaParams, base: float, *, snap_small: bool = False,
              window: float | None = None) -> ThetaParams:
    """Round every omega_j with |omega_j| >= base/2 to the nearest multiple of ``base``.

    Entries below base/2 are left alone unless ``snap_small`` is set, in which
    case they are set to zero (which must then also lie within the window).
    Each snapped entry must already sit within ``window * base`` of its target.
    """
    window = SNAP_WINDOW if window is None else window
    if not base > 0 or not math.isfinite(base):
        raise SynthesisError(f"base frequency must be positive, got {base}")
    new = params.omega.copy()
    for j, w in enumerate(params.omega):
        if abs(w) < 0.5 * base and not snap_small:
            continue
        target = base * round(w / base)
        if abs(w - target) > window * base:
            raise SynthesisError(
                f"omega[{j}] = {w:.6g} is {abs(w - target) / base:.1%} of base away from {target:.6g}")
        new[j] = target
    return replace(params, omega=new, base=float(base))


def shift_spectrum(spec: MainSpectrum, shift: float) -> MainSpectrum:
    """Translate every point by a real shift.

    The waveform changes only by a carrier: q_shift(t, 0) = q(t, 0) exp(-2 i shift t)
    up to a constant phase, so |q| is unchanged.
    """
    if not math.isfinite(shift):
        raise ValueError("shift must be finite")
    return spec.shifted(shift)


def base_frequency(omega, tol: float | None = None, max_den: int = 64) -> float | None:
    """Largest f with every omega_j an integer multiple of f, if one exists.

    Each |omega_j - n_j f| must stay below tol * max(1, |omega_j|). The
    tolerance has to be far below 1/max_den^2, otherwise chance rational
    approximations of incommensurate ratios are accepted.
    """
    tol = COMMENSURATE_TOL if tol is None else tol
    w = np.abs(np.asarray(omega, dtype=float))
    w = w[w > tol]
    if w.size == 0:
        return None
    ref = float(np.min(w))
    den = 1
    for v in w:
        frac = Fraction(v / ref).limit_denominator(max_den)
        den = den * frac.denominator // math.gcd(den, frac.denominator)
    f = ref / den
    n = np.round(w / f)
    if np.any(np.abs(w - n * f) > tol * np.maximum(1.0, w)):
        return None
    return f


@dataclass(frozen=True)
class Waveform:
    t: np.ndarray
    samples: np.ndarray
    z: float = 0.0
    period_hint: float | None = None

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        s = np.asarray(self.samples, dtype=complex)
        if t.ndim != 1 or t.shape != s.shape:
            raise SynthesisError("time grid and samples must be 1-d arrays of equal length")
        if t.size >= 2:
            d = np.diff(t)
            if np.any(d <= 0):
                raise SynthesisError("time grid must be strictly increasing")
            if np.max(np.abs(d - d[0])) > 1e-9 * max(abs(d[0]), 1e-300) * max(1, t.size):
                raise SynthesisError("time grid must be uniform")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "samples", s)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    def __len__(self) -> int:
        return self.t.size

    def to_csv(self) -> str:
        return io.waveform_csv(self.t, self.samples)


def period_of(params: ThetaParams) -> float | None:
    if params.base is not None:
        return 2 * math.pi / params.base
    f = base_frequency(params.omega)
    return None if f is None else 2 * math.pi / f


def sample_waveform(params: ThetaParams, t0: float, t1: float, n: int, z: float = 0.0,
                    *, endpoint: bool = True) -> Waveform:
    if n < 2:
        raise SynthesisError("need at least two samples")
    if not t1 > t0:
        raise SynthesisError("t1 must exceed t0")
    t = np.linspace(t0, t1, n, endpoint=endpoint)
    return Waveform(t, eval_q(params, t, z), z, period_of(params))


def sample_period(params: ThetaParams, n: int, z: float = 0.0, t0: float = 0.0) -> Waveform:
    """n samples covering one period [t0, t0 + T) (endpoint excluded)."""
    T = period_of(params)
    if T is None:
        raise SynthesisError("waveform has no finite time period; periodize it first")
    return sample_waveform(params, t0, t0 + T, n, z, endpoint=False)
