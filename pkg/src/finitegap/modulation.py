"""NFAM symbol mapping, genus-modulation spectra and symbol power accounting."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from . import io
from .channel import FiberParams, UnitMap, add_prefix, lowpass, propagate
from .errors import ErasureError, SynthesisError
from .forward_nft import find_main_spectrum, grid_seeds
from .surface import MainSpectrum
from .synthesis import ThetaParams, Waveform, compute_params, periodize, sample_period

GRAY_CODE = ("00", "01", "11", "10")
BITS_PER_SYMBOL = 8


@dataclass(frozen=True)
class NfamConfig:
    """Four spectral points at fixed real parts, each taking one of four imaginary levels."""

    real_parts: tuple[float, ...] = (-30.0, -10.0, 10.0, 30.0)
    levels: tuple[float, ...] = (5.0, 7.0, 9.0, 11.0)
    gray_map: tuple[str, ...] = GRAY_CODE
    base: float = 40.0
    samples_per_period: int = 512
    snap_window: float = 0.35

    def __post_init__(self) -> None:
        object.__setattr__(self, "real_parts", tuple(float(r) for r in self.real_parts))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        object.__setattr__(self, "gray_map", tuple(self.gray_map))
        if len(self.real_parts) != 4 or len(self.levels) != 4 or len(self.gray_map) != 4:
            raise ValueError("NFAM uses exactly 4 positions and 4 levels")
        if any(b >= a for a, b in zip(self.real_parts[1:], self.real_parts[:-1])):
            raise ValueError("real parts must be strictly increasing")
        if any(b >= a for a, b in zip(self.levels[1:], self.levels[:-1])):
            raise ValueError("levels must be strictly increasing")
        if min(self.levels) <= 0:
            raise ValueError("levels must be positive")
        if sorted(self.gray_map) != sorted(GRAY_CODE):
            raise ValueError("gray_map must be a permutation of the four 2-bit patterns")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.base

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _as_bits(bits) -> tuple[int, ...]:
    if isinstance(bits, (int, np.integer)):
        if not 0 <= bits < 2 ** BITS_PER_SYMBOL:
            raise ValueError("symbol index out of range")
        return tuple((int(bits) >> (BITS_PER_SYMBOL - 1 - i)) & 1 for i in range(BITS_PER_SYMBOL))
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    out = tuple(int(b) for b in bits)
    if len(out) != BITS_PER_SYMBOL or any(b not in (0, 1) for b in out):
        raise ValueError(f"need exactly {BITS_PER_SYMBOL} bits")
    return out


def bits_to_int(bits) -> int:
    v = 0
    for b in _as_bits(bits):
        v = (v << 1) | b
    return v


def level_indices(bits, cfg: NfamConfig = NfamConfig()) -> tuple[int, ...]:
    b = _as_bits(bits)
    pairs = ["".join(str(x) for x in b[2 * j: 2 * j + 2]) for j in range(4)]
    return tuple(cfg.gray_map.index(p) for p in pairs)


def nfam_encode(bits, cfg: NfamConfig = NfamConfig()) -> MainSpectrum:
    """8 bits -> spectrum {real_parts[j] + i level(bits[2j:2j+2])}."""
    idx = level_indices(bits, cfg)
    return MainSpectrum(tuple(complex(r, cfg.levels[i]) for r, i in zip(cfg.real_parts, idx)))


def _select_top(points, n: int = 4) -> np.ndarray:
    pts = np.asarray(points, dtype=complex)
    pts = pts[pts.imag > 0]
    if pts.size < n:
        raise ErasureError(f"only {pts.size} points above the real axis, need {n}")
    order = sorted(range(pts.size), key=lambda i: (-pts[i].imag, abs(pts[i].real)))
    return pts[order[:n]]


def nfam_demap(points, cfg: NfamConfig = NfamConfig()) -> tuple[int, ...]:
    """Largest-Im four points, ordered by real part, quantized to the nearest level."""
    top = _select_top(points)
    top = top[np.argsort(top.real, kind="stable")]
    levels = np.asarray(cfg.levels)
    bits: list[int] = []
    for p in top:
        i = int(np.argmin(np.abs(levels - p.imag)))
        bits.extend(int(c) for c in cfg.gray_map[i])
    return tuple(bits)


def genus_spectrum(g: int) -> MainSpectrum:
    """Points 20k + 5i for k = 1..g+1."""
    if g < 0:
        raise ValueError("genus must be nonnegative")
    return MainSpectrum(tuple(complex(20.0 * k, 5.0) for k in range(1, g + 2)))


def genus_constellation(g_max: int) -> list[MainSpectrum]:
    if g_max < 1:
        raise ValueError("g_max must be at least 1")
    return [genus_spectrum(g) for g in range(1, g_max + 1)]


def mean_power(wave: Waveform) -> float:
    """Mean |q|^2 over the samples (dimensionless)."""
    return float(np.mean(np.abs(wave.samples) ** 2))


def symbol_power(wave: Waveform, units: UnitMap) -> float:
    """Mean optical power of one period in dBm."""
    watts = units.P0 * mean_power(wave)
    if watts <= 0:
        return -math.inf
    return 10.0 * math.log10(watts / 1e-3)


def symbol_params(bits, cfg: NfamConfig = NfamConfig()) -> ThetaParams:
    """Periodized theta parameters for one NFAM symbol (every omega_j snapped)."""
    params = compute_params(nfam_encode(bits, cfg))
    return periodize(params, cfg.base, snap_small=True, window=cfg.snap_window)


@dataclass
class Constellation:
    cfg: NfamConfig
    params: dict[int, ThetaParams] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.params)

    def waveform(self, symbol: int, z: float = 0.0) -> Waveform:
        return sample_period(self.params[symbol], self.cfg.samples_per_period, z)

    def to_json(self) -> dict:
        return {
            "config": asdict(self.cfg),
            "digest": self.cfg.digest(),
            "symbols": {str(k): v.to_json() for k, v in sorted(self.params.items())},
        }


def build_constellation(cfg: NfamConfig = NfamConfig(), symbols=None,
                        cache_dir: str | Path | None = None) -> Constellation:
    """Parameters for the requested symbols (all 256 by default), cached on disk by config digest."""
    symbols = range(2 ** BITS_PER_SYMBOL) if symbols is None else sorted(set(int(s) for s in symbols))
    const = Constellation(cfg)
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"nfam-{cfg.digest()}.json"
        if path.exists():
            data = json.loads(path.read_text())
            for k, v in data.get("symbols", {}).items():
                const.params[int(k)] = ThetaParams.from_json(v)
    missing = [s for s in symbols if s not in const.params]
    for s in missing:
        const.params[s] = symbol_params(s, cfg)
    if path is not None and missing:
        io.atomic_write(path, io.dumps(const.to_json()))
    if len(const.params) != len(symbols):
        const = Constellation(cfg, {s: const.params[s] for s in symbols})
    return const


def estimate_twist(frame: np.ndarray, start: int, n: int) -> float:
    """Phase gained over one period, from the window [start, start+n) and the period before it."""
    if start < n:
        raise SynthesisError("need one full period before the window to estimate the twist")
    prev = frame[start - n: start]
    cur = frame[start: start + n]
    return float(np.angle(np.vdot(prev, cur)))


def receiver_seeds(cfg: NfamConfig = NfamConfig()) -> np.ndarray:
    """Coarse grid covering the constellation; the twist estimate fixes Re only modulo pi/T."""
    span = max(abs(r) for r in cfg.real_parts) + cfg.base
    n_re = int(round(2 * span / (0.25 * cfg.base))) + 1
    return grid_seeds((-span, span), (cfg.levels[0], cfg.levels[-1]), n_re, len(cfg.levels))


def detect_symbol(window: Waveform, twist: float, cfg: NfamConfig = NfamConfig(),
                  seeds=None) -> tuple[int, ...]:
    seeds = receiver_seeds(cfg) if seeds is None else seeds
    res = find_main_spectrum(window, seeds, twist=twist)
    return nfam_demap(res.points, cfg)


@dataclass(frozen=True)
class LinkConfig:
    """Desk-scale NFAM link: symbol timing, prefix, fiber and receiver filter."""

    period_s: float = 0.5e-9
    prefix_periods: int = 3
    distance_km: float = 0.0
    noise: bool = False
    dz: float = 1e-5
    rx_cutoff: float | None = 600.0
    fiber: FiberParams = FiberParams()

    def __post_init__(self) -> None:
        if self.period_s <= 0:
            raise ValueError("symbol period must be positive")
        if self.prefix_periods < 1:
            raise ValueError("need at least one prefix period for twist estimation")
        if self.distance_km < 0:
            raise ValueError("distance must be nonnegative")
        L = self.fiber.span_length_km
        if self.distance_km > 0 and abs(self.distance_km / L - round(self.distance_km / L)) > 1e-9:
            raise ValueError(f"distance must be a whole number of {L} km spans")
        if self.rx_cutoff is not None and self.rx_cutoff <= 0:
            raise ValueError("receiver cutoff must be positive")

    @property
    def spans(self) -> int:
        return int(round(self.distance_km / self.fiber.span_length_km))

    def units(self, cfg: NfamConfig) -> UnitMap:
        return UnitMap.from_period(self.period_s, cfg.period, self.fiber)


@dataclass(frozen=True)
class SimReport:
    n_symbols: int
    bit_errors: int
    erasures: int
    symbol_errors: int
    seed: int | None
    distance_km: float
    noise: bool
    config_digest: str

    @property
    def n_bits(self) -> int:
        return BITS_PER_SYMBOL * (self.n_symbols - self.erasures)

    @property
    def ber(self) -> float:
        return self.bit_errors / self.n_bits if self.n_bits else math.nan

    def to_json(self) -> dict:
        out = asdict(self)
        out.update(n_bits=self.n_bits, ber=self.ber)
        return out


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def transmit_frames(const: Constellation, symbols, link: LinkConfig) -> tuple[Waveform, int]:
    """Concatenate prefixed frames (zero-padded to a power of two). Returns the stream and frame length."""
    cfg = const.cfg
    n = cfg.samples_per_period
    frames = []
    for s in symbols:
        p = const.params[int(s)]
        w = sample_period(p, n)
        frames.append(add_prefix(w, link.prefix_periods, n, twist=p.omega0 * cfg.period).samples)
    flen = (link.prefix_periods + 1) * n
    body = np.concatenate(frames) if frames else np.zeros(0, dtype=complex)
    total = _next_pow2(max(body.size, 2))
    samples = np.zeros(total, dtype=complex)
    samples[: body.size] = body
    dt = cfg.period / n
    return Waveform(dt * np.arange(total), samples), flen


def receive_frames(stream: Waveform, n_frames: int, frame_len: int, cfg: NfamConfig,
                   link: LinkConfig, seeds=None) -> list[tuple[int, ...] | None]:
    """Strip, estimate the twist and demap every frame; None marks an erasure."""
    n = cfg.samples_per_period
    seeds = receiver_seeds(cfg) if seeds is None else seeds
    out: list[tuple[int, ...] | None] = []
    start = (link.prefix_periods * n) // 2
    for i in range(n_frames):
        frame = stream.samples[i * frame_len: (i + 1) * frame_len]
        twist = estimate_twist(frame, start, n)
        t = cfg.period / n * np.arange(n)
        window = Waveform(t, frame[start: start + n], stream.z, cfg.period)
        try:
            out.append(detect_symbol(window, twist, cfg, seeds))
        except (ErasureError, SynthesisError):
            out.append(None)
    return out


def simulate_nfam(n_symbols: int, link: LinkConfig = LinkConfig(), cfg: NfamConfig = NfamConfig(), *,
                  seed: int | None = 0, symbols=None, const: Constellation | None = None,
                  cache_dir: str | Path | None = None) -> SimReport:
    """Random symbols (or the given ones) through encode, synthesis, prefix, channel, receiver and demap."""
    rng = np.random.default_rng(seed)
    if symbols is None:
        if n_symbols < 1:
            raise ValueError("need at least one symbol")
        symbols = rng.integers(0, 2 ** BITS_PER_SYMBOL, size=n_symbols)
    symbols = np.asarray(symbols, dtype=int).ravel()
    if const is None:
        const = build_constellation(cfg, symbols, cache_dir)
    stream, flen = transmit_frames(const, symbols, link)
    units = link.units(cfg)
    if link.spans:
        fiber = replace(link.fiber, spans=link.spans)
        stream = propagate(stream, fiber, units, dz=link.dz, rng=rng, noise=link.noise)
    if link.rx_cutoff is not None:
        stream = lowpass(stream, link.rx_cutoff)
    detected = receive_frames(stream, symbols.size, flen, cfg, link)
    bit_errors = erasures = sym_errors = 0
    for s, d in zip(symbols, detected):
        if d is None:
            erasures += 1
            continue
        diff = sum(a != b for a, b in zip(_as_bits(int(s)), d))
        bit_errors += diff
        sym_errors += diff > 0
    digest = hashlib.sha256(json.dumps([cfg.digest(), asdict(link)], sort_keys=True).encode()).hexdigest()[:16]
    return SimReport(int(symbols.size), bit_errors, erasures, sym_errors, seed, link.distance_km, link.noise, digest)


GENUS_BASE = 40.0


def count_maxima(wave: Waveform, rel_height: float = 0.05) -> int:
    """Local maxima of |q| on a periodic grid, ignoring ripples below rel_height of the peak-to-trough swing."""
    a = np.abs(wave.samples)
    swing = float(a.max() - a.min())
    if swing <= 0:
        return 0
    # start and end at the global minimum so no peak sits on the window edge
    r = np.roll(a, -int(np.argmin(a)))
    peaks, _ = find_peaks(np.append(r, r[0]), prominence=rel_height * swing)
    return int(peaks.size)


@dataclass(frozen=True)
class GenusDemoRow:
    genus: int
    omega0: float
    K0_abs: float
    maxima: int
    power_db: float  # dBm with a unit map, else dB of the dimensionless mean |q|^2


def genus_demo(g_max: int = 5, n: int = 1024, base: float = GENUS_BASE,
               units: UnitMap | None = None) -> list[GenusDemoRow]:
    """Periodized genus-modulation waveforms with their maxima counts and mean power."""
    rows = []
    for g, spec in enumerate(genus_constellation(g_max), start=1):
        p = periodize(compute_params(spec), base)
        w = sample_period(p, n)
        pw = symbol_power(w, units) if units is not None else 10 * math.log10(mean_power(w))
        rows.append(GenusDemoRow(g, p.omega0, p.K0_abs, count_maxima(w), pw))
    return rows
