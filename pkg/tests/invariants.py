"""Structural checks of a homology basis and its period data, shared by several test files."""

from __future__ import annotations

import numpy as np

from finitegap.contour import compute_period_data, path_moments, period_matrices
from finitegap.homology import homology_basis, intersection_number, winding_number
from finitegap.meromorphic import normalize_meromorphic
from finitegap.surface import MainSpectrum, sort_spectrum

REF_GENUS2 = MainSpectrum((-1 + 3j, 5j, 1 + 3j))
REF_GENUS3 = MainSpectrum((-30 + 5j, -10 + 7j, 10 + 7j, 30 + 5j))
GENUS_ONE = MainSpectrum((1j, 1 + 1j))


def structural_report(spec: MainSpectrum) -> dict[str, float | bool]:
    """Each entry is True when the invariant holds (floats are the measured defects)."""
    ordered = sort_spectrum(spec)
    basis = homology_basis(ordered)
    periods = compute_period_data(ordered, basis)
    g = ordered.genus
    pts = ordered.points

    winding_ok = True
    for j in range(1, g + 1):
        a_in = set(range(2 * j))
        b_in = {2 * j - 1, 2 * j}
        for cyc, inside in ((basis.a_cycles[j - 1], a_in), (basis.b_cycles[j - 1], b_in)):
            for m, p in enumerate(pts):
                w = abs(winding_number(cyc.waypoints, p))
                winding_ok &= w == (1 if m in inside else 0)

    inter = np.zeros((2 * g, 2 * g), dtype=int)
    cycles = list(basis.a_cycles) + list(basis.b_cycles)
    for i, p in enumerate(cycles):
        for j, q in enumerate(cycles):
            if i != j:
                inter[i, j] = intersection_number(p, q)
    J = np.block([[np.zeros((g, g), int), np.eye(g, dtype=int)], [-np.eye(g, dtype=int), np.zeros((g, g), int)]])

    parity_ok = all(c.closed and c.n_changes % 2 == 0 for c in cycles) and basis.infinity_path.n_changes % 2 == 1

    tau = periods.tau
    sym = float(np.max(np.abs(tau - tau.T)))
    min_eig = float(np.min(np.linalg.eigvalsh(tau.imag)))

    A, _ = period_matrices(ordered, basis)
    norm_defect = float(np.max(np.abs(periods.A_inv @ A - np.eye(g))))

    a_mom = [path_moments(ordered, a, g + 3) for a in basis.a_cycles]
    mero_defect = 0.0
    for ch in range(3):
        d = normalize_meromorphic(ordered, basis, periods, ch, a_mom)
        scale = max(1.0, float(np.max(np.abs(d.padded(g + 3)))))
        mero_defect = max(mero_defect, max(abs(d.integrate(m)) for m in a_mom) / scale)

    return {
        "winding": winding_ok,
        "intersection": bool(np.array_equal(inter, J)),
        "parity": parity_ok,
        "tau_symmetry": sym,
        "tau_min_imag_eig": min_eig,
        "a_normalization": norm_defect,
        "meromorphic_a_periods": mero_defect,
    }


def report_passes(rep: dict) -> bool:
    return (rep["winding"] and rep["intersection"] and rep["parity"] and rep["tau_symmetry"] < 1e-8
            and rep["tau_min_imag_eig"] > 0 and rep["a_normalization"] < 1e-9 and rep["meromorphic_a_periods"] < 1e-9)
