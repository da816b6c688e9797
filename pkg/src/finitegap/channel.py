"""Split-step Fourier fiber model in dimensionless units, with lumped amplifier noise."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import ChannelError
from .synthesis import Waveform

PLANCK = 6.62607015e-34
CARRIER_HZ = 193.4e12
MAX_DZ = 1e-3


@dataclass(frozen=True)
class FiberParams:
    """Standard single-mode fiber; the defaults are the usual SSMF values."""

    alpha_db_km: float = 0.2
    beta2_ps2_km: float = -21.5
    gamma_w_km: float = 1.3
    span_length_km: float = 75.0
    noise_figure_db: float = 5.5
    spans: int = 1

    def __post_init__(self) -> None:
        if self.alpha_db_km < 0 or self.gamma_w_km <= 0 or self.span_length_km < 0:
            raise ChannelError("alpha, gamma and span length must be nonnegative (gamma positive)")
        if self.beta2_ps2_km == 0:
            raise ChannelError("beta2 must be nonzero")
        if self.spans < 0 or int(self.spans) != self.spans:
            raise ChannelError("spans must be a nonnegative integer")

    @property
    def alpha_per_km(self) -> float:
        """Power attenuation in 1/km."""
        return self.alpha_db_km * math.log(10.0) / 10.0

    @property
    def beta2_si(self) -> float:
        return self.beta2_ps2_km * 1e-24 / 1e3

    @property
    def span_gain(self) -> float:
        return math.exp(self.alpha_per_km * self.span_length_km)

    @property
    def total_length_km(self) -> float:
        return self.spans * self.span_length_km

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "FiberParams":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        return cls(**known)


def gamma_eff(fiber: FiberParams) -> float:
    """Path-averaged nonlinearity gamma * L_eff / L_span in 1/W/km."""
    a, L = fiber.alpha_per_km, fiber.span_length_km
    if a * L < 1e-12:
        return fiber.gamma_w_km
    return fiber.gamma_w_km * (1.0 - math.exp(-a * L)) / (a * L)


def cyclic_prefix_duration(length_km: float, bandwidth_hz: float, beta2_ps2_km: float) -> float:
    """Dispersive memory 2 pi |beta2| L B in seconds."""
    if length_km < 0 or bandwidth_hz < 0:
        raise ChannelError("length and bandwidth must be nonnegative")
    return 2.0 * math.pi * abs(beta2_ps2_km) * 1e-24 * length_km * bandwidth_hz


@dataclass(frozen=True)
class UnitMap:
    """Physical scales of the dimensionless equation i q_z + q_tt + 2|q|^2 q = 0.

    t = T/T0, z = Z/Z0 and A = sqrt(P0) q with Z0 = 2 T0^2/|beta2| and
    P0 = |beta2|/(gamma_eff T0^2).
    """

    T0: float
    Z0: float
    P0: float

    def __post_init__(self) -> None:
        if not (self.T0 > 0 and self.Z0 > 0 and self.P0 > 0):
            raise ChannelError("unit scales must be positive")

    @classmethod
    def from_T0(cls, T0: float, fiber: FiberParams) -> "UnitMap":
        b2 = abs(fiber.beta2_si)
        g = gamma_eff(fiber) / 1e3
        return cls(T0, 2.0 * T0 ** 2 / b2, b2 / (g * T0 ** 2))

    @classmethod
    def from_period(cls, physical_period_s: float, dimensionless_period: float,
                    fiber: FiberParams) -> "UnitMap":
        return cls.from_T0(physical_period_s / dimensionless_period, fiber)

    def distance(self, km: float) -> float:
        return km * 1e3 / self.Z0

    def to_json(self) -> dict:
        return asdict(self)


def add_prefix(wave: Waveform, n_periods: int, samples_per_period: int, twist: float = 0.0) -> Waveform:
    """Prepend the last ``n_periods`` periods of a frame (cyclic extension).

    For a quasi-periodic signal, q(t + T) = exp(i twist) q(t), each copy moved
    back by m periods is multiplied by exp(-i m twist).
    """
    if n_periods < 0:
        raise ChannelError("prefix length must be nonnegative")
    n = len(wave)
    if samples_per_period <= 0 or n % samples_per_period:
        raise ChannelError("waveform does not cover an integer number of periods")
    if n_periods == 0:
        return wave
    reps = -(-n_periods * samples_per_period // n)
    frames_per_wave = n // samples_per_period
    copies = [wave.samples * np.exp(-1j * twist * frames_per_wave * m) for m in range(reps, 0, -1)]
    tiled = np.concatenate(copies)
    prefix = tiled[tiled.size - n_periods * samples_per_period:]
    dt = wave.dt
    t0 = wave.t[0] - prefix.size * dt
    t = t0 + dt * np.arange(prefix.size + n)
    return Waveform(t, np.concatenate([prefix, wave.samples]), wave.z, wave.period_hint)


def strip_prefix(frame: Waveform, n_periods: int, samples_per_period: int) -> Waveform:
    """One period centred in a frame of n_periods + 1 periods."""
    if n_periods < 0:
        raise ChannelError("prefix length must be nonnegative")
    total = (n_periods + 1) * samples_per_period
    if len(frame) != total:
        raise ChannelError(f"frame has {len(frame)} samples, expected {total}")
    start = (n_periods * samples_per_period) // 2
    sl = slice(start, start + samples_per_period)
    return Waveform(frame.t[sl], frame.samples[sl], frame.z, frame.period_hint)


def ase_variance(fiber: FiberParams, sample_rate_hz: float) -> float:
    """Per-quadrature noise variance (W) added by one amplifier."""
    nf = 10.0 ** (fiber.noise_figure_db / 10.0)
    return 0.5 * nf * (fiber.span_gain - 1.0) * PLANCK * CARRIER_HZ * sample_rate_hz


def _ssfm(q: np.ndarray, dt: float, distance: float, dz: float) -> np.ndarray:
    n_steps = max(1, int(math.ceil(distance / dz - 1e-12)))
    h = distance / n_steps
    w = 2.0 * math.pi * np.fft.fftfreq(q.size, d=dt)
    half = np.exp(-1j * w ** 2 * h / 2.0)
    spec = np.fft.fft(q)
    for _ in range(n_steps):
        spec *= half
        u = np.fft.ifft(spec)
        u *= np.exp(2j * np.abs(u) ** 2 * h)
        spec = np.fft.fft(u)
        spec *= half
    out = np.fft.ifft(spec)
    if not np.all(np.isfinite(out)):
        raise ChannelError("non-finite field during split-step propagation")
    return out


def propagate_dimensionless(wave: Waveform, distance: float, dz: float = 1e-4) -> Waveform:
    """Noiseless symmetric split-step over a periodic time window."""
    if dz <= 0 or dz > MAX_DZ:
        raise ChannelError(f"step {dz} outside (0, {MAX_DZ}]")
    if distance < 0:
        raise ChannelError("distance must be nonnegative")
    if distance == 0:
        return wave
    out = _ssfm(wave.samples, wave.dt, distance, dz)
    return Waveform(wave.t, out, wave.z + distance, wave.period_hint)


def propagate(wave: Waveform, fiber: FiberParams, units: UnitMap, dz: float = 1e-5,
              rng: np.random.Generator | None = None, noise: bool = True) -> Waveform:
    """Propagate over fiber.spans spans, loading amplifier noise after each span."""
    if dz <= 0 or dz > MAX_DZ:
        raise ChannelError(f"step {dz} outside (0, {MAX_DZ}]")
    span = units.distance(fiber.span_length_km)
    q = wave.samples.copy()
    if noise and rng is None:
        raise ChannelError("noise requested but no random generator given")
    sigma = 0.0
    if noise:
        sample_rate = 1.0 / (wave.dt * units.T0)
        sigma = math.sqrt(ase_variance(fiber, sample_rate) / units.P0)
    for _ in range(fiber.spans):
        q = _ssfm(q, wave.dt, span, dz)
        if sigma > 0:
            q = q + sigma * (rng.standard_normal(q.size) + 1j * rng.standard_normal(q.size))
    return Waveform(wave.t, q, wave.z + fiber.spans * span, wave.period_hint)


def lowpass(wave: Waveform, cutoff: float) -> Waveform:
    """Ideal low-pass: keep angular frequencies |w| <= cutoff (dimensionless)."""
    if cutoff <= 0:
        raise ChannelError("cutoff must be positive")
    w = 2.0 * math.pi * np.fft.fftfreq(len(wave), d=wave.dt)
    spec = np.fft.fft(wave.samples)
    spec[np.abs(w) > cutoff] = 0.0
    return replace(wave, samples=np.fft.ifft(spec))


def energy(wave: Waveform) -> float:
    return float(np.sum(np.abs(wave.samples) ** 2) * wave.dt)
