"""Finite-gap solutions of the focusing NLSE from their main spectrum, with a forward-transform
check, NFAM and genus-modulation constellations, and a split-step fiber channel."""

from __future__ import annotations

from .errors import FiniteGapError
from .forward_nft import find_main_spectrum, monodromy, roundtrip_report
from .modulation import NfamConfig, nfam_demap, nfam_encode, simulate_nfam
from .surface import MainSpectrum
from .synthesis import ThetaParams, Waveform, compute_params, eval_q, periodize, sample_period, sample_waveform

__version__ = "0.1.0"

__all__ = [
    "FiniteGapError", "MainSpectrum", "NfamConfig", "ThetaParams", "Waveform", "compute_params",
    "eval_q", "find_main_spectrum", "monodromy", "nfam_demap", "nfam_encode", "periodize",
    "roundtrip_report", "sample_period", "sample_waveform", "simulate_nfam",
]
