"""Command-line entry point: finitegap {params,synth,roundtrip,nfam-sim,genus-demo,channel}."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from . import contour, forward_nft, io, quadrature, synthesis, theta
from .channel import (FiberParams, UnitMap, cyclic_prefix_duration, energy, gamma_eff,
                      propagate_dimensionless)
from .errors import FiniteGapError, SpectrumError
from .forward_nft import roundtrip_report
from .modulation import LinkConfig, NfamConfig, build_constellation, genus_demo, simulate_nfam
from .surface import MainSpectrum
from .synthesis import Waveform, compute_params, periodize, period_of, sample_waveform

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4

# environment variable -> (module, attribute)
TOLERANCE_KNOBS = {
    "FINITEGAP_THETA_TOL": (theta, "DEFAULT_TOL"),
    "FINITEGAP_QUAD_ATOL": (quadrature, "ATOL"),
    "FINITEGAP_QUAD_RTOL": (quadrature, "RTOL"),
    "FINITEGAP_REALITY_TOL": (contour, "REALITY_TOL"),
    "FINITEGAP_SNAP_WINDOW": (synthesis, "SNAP_WINDOW"),
    "FINITEGAP_DEDUP_TOL": (forward_nft, "DEDUP_TOL"),
}

_EPILOG = "tolerance overrides (environment variables, positive floats):\n" + "\n".join(
    f"  {k:<24} {m.__name__.rsplit('.', 1)[-1]}.{a} (default {getattr(m, a):g})"
    for k, (m, a) in TOLERANCE_KNOBS.items()
) + "\n\nexit codes: 0 ok, 2 input error, 3 numerical failure, 4 validation failure"


class InputError(Exception):
    pass


class ValidationFailure(Exception):
    pass


def apply_env_overrides(env=None) -> dict[str, float]:
    env = os.environ if env is None else env
    applied = {}
    for key, (mod, attr) in TOLERANCE_KNOBS.items():
        raw = env.get(key)
        if raw is None or raw == "":
            continue
        try:
            val = float(raw)
        except ValueError as exc:
            raise InputError(f"{key}={raw!r} is not a number") from exc
        if not (val > 0 and math.isfinite(val)):
            raise InputError(f"{key} must be a positive finite number")
        setattr(mod, attr, val)
        applied[key] = val
    return applied


def _load_spectrum(path: str) -> MainSpectrum:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected an object with a 'points' list")
    return MainSpectrum.from_json(data)


def _emit(text: str, out: str | None) -> None:
    if out:
        io.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _params(args):
    params = compute_params(_load_spectrum(args.spectrum))
    if args.base is not None:
        params = periodize(params, args.base)
    return params


def cmd_params(args) -> int:
    _emit(io.dumps(_params(args).to_json()), args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    params = _params(args)
    t1 = args.t1
    if t1 is None:
        T = period_of(params)
        if T is None:
            raise InputError("no time period: give --t1 or --base")
        t1 = args.t0 + T
    wave = sample_waveform(params, args.t0, t1, args.n, args.z, endpoint=not args.open)
    _emit(wave.to_csv(), args.out)
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    rep = roundtrip_report(_load_spectrum(args.spectrum), args.n, base=args.base, period=args.period)
    _emit(io.dumps(rep.to_json()), args.out)
    if args.max_error is not None and not rep.max_error <= args.max_error:
        raise ValidationFailure(f"max error {rep.max_error:.3e} exceeds {args.max_error:g}")
    return EXIT_OK


def _parse_hex_symbols(text: str) -> list[int]:
    out = []
    for tok in text.replace(",", " ").split():
        try:
            v = int(tok, 16)
        except ValueError as exc:
            raise InputError(f"bad hex symbol {tok!r}") from exc
        if not 0 <= v < 256:
            raise InputError(f"symbol {tok!r} out of range 00..ff")
        out.append(v)
    if not out:
        raise InputError("empty symbol list")
    return out


def cmd_nfam_sim(args) -> int:
    cfg = NfamConfig(samples_per_period=args.samples_per_period)
    link = LinkConfig(distance_km=args.distance_km, noise=args.noise, dz=args.dz,
                      rx_cutoff=args.rx_cutoff if args.rx_cutoff > 0 else None,
                      prefix_periods=args.prefix_periods)
    symbols = None
    if args.symbols:
        symbols = _parse_hex_symbols(args.symbols)
    elif args.all_symbols:
        symbols = list(range(256))
    n = len(symbols) if symbols is not None else args.n_symbols
    const = build_constellation(cfg, symbols, args.cache_dir) if symbols is not None else None
    rep = simulate_nfam(n, link, cfg, seed=args.seed, symbols=symbols, const=const, cache_dir=args.cache_dir)
    _emit(io.dumps(rep.to_json()), args.out)
    if args.max_ber is not None and not rep.ber <= args.max_ber:
        raise ValidationFailure(f"BER {rep.ber:.3e} exceeds {args.max_ber:g}")
    return EXIT_OK


def cmd_genus_demo(args) -> int:
    rows = genus_demo(args.g_max, args.n, args.base)
    counts = [r.maxima for r in rows]
    out = {"base": args.base, "rows": [asdict(r) for r in rows],
           "maxima_nondecreasing": all(b >= a for a, b in zip(counts, counts[1:]))}
    _emit(io.dumps(out), args.out)
    return EXIT_OK


def cmd_channel(args) -> int:
    fiber = FiberParams(alpha_db_km=args.alpha, beta2_ps2_km=args.beta2, gamma_w_km=args.gamma,
                        span_length_km=args.span_km, noise_figure_db=args.nf, spans=args.spans)
    cfg = NfamConfig()
    units = UnitMap.from_period(args.period_s, cfg.period, fiber)
    out = {
        "fiber": fiber.to_json(),
        "gamma_eff": gamma_eff(fiber),
        "cyclic_prefix_s": cyclic_prefix_duration(fiber.total_length_km, args.bandwidth_hz, fiber.beta2_ps2_km),
        "units": units.to_json(),
        "dimensionless_length": units.distance(fiber.total_length_km),
    }
    if args.input:
        try:
            t, q = io.read_waveform_csv(args.input)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read waveform {args.input}: {exc}") from exc
        wave = Waveform(t, q)
        res = propagate_dimensionless(wave, args.distance, args.dz)
        e0, e1 = energy(wave), energy(res)
        out["propagation"] = {"distance": args.distance, "dz": args.dz, "energy_in": e0, "energy_out": e1}
        if args.wave_out:
            io.atomic_write(args.wave_out, res.to_csv())
    _emit(io.dumps(out), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finitegap", description="Finite-gap NLSE synthesis and NFAM link toolkit.",
                                epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spectrum=True):
        if spectrum:
            sp.add_argument("spectrum", help="JSON file {\"points\": [{\"re\": .., \"im\": ..}, ...]}")
        sp.add_argument("-o", "--out", help="output file (default stdout); written atomically")

    sp = sub.add_parser("params", help="theta parameters of a spectrum", epilog=_EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    common(sp)
    sp.add_argument("--base", type=float, help="snap omega to multiples of this frequency")
    sp.set_defaults(func=cmd_params)

    sp = sub.add_parser("synth", help="sample q(t, z) to CSV", epilog=_EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    common(sp)
    sp.add_argument("--base", type=float)
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--t1", type=float, help="default: t0 plus one period")
    sp.add_argument("-n", type=int, default=512)
    sp.add_argument("--z", type=float, default=0.0)
    sp.add_argument("--open", action="store_true", help="exclude the endpoint t1")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("roundtrip", help="synthesize one period and recover the spectrum", epilog=_EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    common(sp)
    sp.add_argument("-n", type=int, default=2048, help="samples per period")
    sp.add_argument("--base", type=float)
    sp.add_argument("--period", type=float)
    sp.add_argument("--max-error", type=float, help="exit 4 if the largest point error exceeds this")
    sp.set_defaults(func=cmd_roundtrip)

    sp = sub.add_parser("nfam-sim", help="NFAM link simulation and BER", epilog=_EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    common(sp, spectrum=False)
    sp.add_argument("--n-symbols", type=int, default=64)
    sp.add_argument("--symbols", help="explicit symbols as hex bytes, e.g. 'a5,3c'")
    sp.add_argument("--all-symbols", action="store_true", help="send each of the 256 symbols once")
    sp.add_argument("--distance-km", type=float, default=0.0)
    sp.add_argument("--noise", action="store_true", help="amplifier noise after each span")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dz", type=float, default=1e-5)
    sp.add_argument("--rx-cutoff", type=float, default=600.0, help="receiver low-pass (0 disables)")
    sp.add_argument("--prefix-periods", type=int, default=3)
    sp.add_argument("--samples-per-period", type=int, default=512)
    sp.add_argument("--cache-dir", help="constellation cache directory")
    sp.add_argument("--max-ber", type=float, help="exit 4 if the BER exceeds this")
    sp.set_defaults(func=cmd_nfam_sim)

    sp = sub.add_parser("genus-demo", help="genus-modulation waveforms and maxima counts", epilog=_EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    common(sp, spectrum=False)
    sp.add_argument("--g-max", type=int, default=5)
    sp.add_argument("-n", type=int, default=1024)
    sp.add_argument("--base", type=float, default=40.0)
    sp.set_defaults(func=cmd_genus_demo)

    sp = sub.add_parser("channel", help="fiber scales, cyclic prefix and optional propagation", epilog=_EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    common(sp, spectrum=False)
    d = FiberParams()
    sp.add_argument("--alpha", type=float, default=d.alpha_db_km, help="dB/km")
    sp.add_argument("--beta2", type=float, default=d.beta2_ps2_km, help="ps^2/km")
    sp.add_argument("--gamma", type=float, default=d.gamma_w_km, help="1/W/km")
    sp.add_argument("--span-km", type=float, default=d.span_length_km)
    sp.add_argument("--nf", type=float, default=d.noise_figure_db, help="noise figure, dB")
    sp.add_argument("--spans", type=int, default=20)
    sp.add_argument("--bandwidth-hz", type=float, default=8e9)
    sp.add_argument("--period-s", type=float, default=0.5e-9, help="physical symbol period")
    sp.add_argument("--input", help="waveform CSV to propagate (dimensionless)")
    sp.add_argument("--distance", type=float, default=0.0, help="dimensionless distance for --input")
    sp.add_argument("--dz", type=float, default=1e-4)
    sp.add_argument("--wave-out", help="CSV for the propagated waveform")
    sp.set_defaults(func=cmd_channel)
    return p


def _error(kind: str, exc: BaseException, code: int) -> int:
    rec = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(rec) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        apply_env_overrides()
        with np.errstate(over="ignore", under="ignore"):
            return args.func(args)
    except (InputError, SpectrumError) as exc:
        return _error("input", exc, EXIT_INPUT)
    except ValidationFailure as exc:
        return _error("validation", exc, EXIT_VALIDATION)
    except FiniteGapError as exc:
        return _error("numerical", exc, EXIT_NUMERIC)
    except (ValueError, TypeError) as exc:
        return _error("input", exc, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
