"""Riemann theta function by truncated lattice summation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ThetaError

DEFAULT_TOL = 1e-14
SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class TauDiagnostics:
    symmetry_defect: float
    min_imag_eigenvalue: float

    @property
    def symmetric(self) -> bool:
        return self.symmetry_defect <= SYMMETRY_TOL

    @property
    def positive_definite(self) -> bool:
        return self.min_imag_eigenvalue > 0

    @property
    def valid(self) -> bool:
        return self.symmetric and self.positive_definite


def validate_tau(tau) -> TauDiagnostics:
    tau = np.atleast_2d(np.asarray(tau, dtype=complex))
    if tau.shape[0] != tau.shape[1]:
        raise ThetaError("period matrix must be square")
    defect = float(np.max(np.abs(tau - tau.T))) if tau.size else 0.0
    Y = 0.5 * (tau.imag + tau.imag.T)
    lam_min = float(np.min(np.linalg.eigvalsh(Y))) if tau.size else math.inf
    return TauDiagnostics(defect, lam_min)


class ThetaSeries:
    """Theta function for a fixed period matrix.

    With Y = Im(tau) and c = Y^-1 Im(x), the term for m has modulus
    exp(-pi (m+c)^T Y (m+c)) up to a factor common to all terms. The sum is
    taken over the lattice points n + s with s = round(-c) and
    n^T Y n <= (R + rho)^2, where rho bounds the Y-length of the rounding
    offset; every omitted term then has Y-distance above R from -c, so its
    relative size is below exp(-pi R^2).
    """

    _CHUNK = 256

    def __init__(self, tau, tol: float | None = None):
        tol = DEFAULT_TOL if tol is None else tol
        tau = np.atleast_2d(np.asarray(tau, dtype=complex))
        diag = validate_tau(tau)
        if not diag.positive_definite:
            raise ThetaError(f"Im(tau) is not positive definite (min eigenvalue {diag.min_imag_eigenvalue:.3e})")
        if not diag.symmetric:
            raise ThetaError(f"tau is not symmetric (defect {diag.symmetry_defect:.3e})")
        if not 0 < tol < 1:
            raise ThetaError("tolerance must lie in (0, 1)")
        self.tau = 0.5 * (tau + tau.T)
        self.g = tau.shape[0]
        self.tol = tol
        Y = self.tau.imag
        self._Yinv = np.linalg.inv(Y)
        # +1 absorbs the growth of the number of lattice points with radius
        self.radius = math.sqrt(-math.log(tol) / math.pi) + 1.0
        rho = 0.5 * math.sqrt(float(np.sum(np.abs(Y))))
        r_tot = self.radius + rho
        half = np.ceil(r_tot * np.sqrt(np.diag(self._Yinv))).astype(int)
        ranges = [np.arange(-h, h + 1) for h in half]
        grid = np.array(np.meshgrid(*ranges, indexing="ij")).reshape(self.g, -1).T
        norm = np.einsum("ni,ij,nj->n", grid, Y, grid)
        base = grid[norm <= r_tot ** 2]
        self._base = base
        self._quad = np.exp(1j * np.pi * np.einsum("ni,ij,nj->n", base, self.tau, base))
        self._ks = [np.arange(-h, h + 1) for h in half]
        self._idx = [base[:, j] + half[j] for j in range(self.g)]

    @property
    def n_terms(self) -> int:
        return self._base.shape[0]

    def __call__(self, x) -> np.ndarray | complex:
        """theta(x | tau) for x of shape (g,) or (n, g)."""
        x = np.asarray(x, dtype=complex)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[1] != self.g:
            raise ThetaError(f"argument has dimension {X.shape[1]}, expected {self.g}")
        # theta(x) = exp(pi i s.tau.s + 2 pi i s.x) * sum_n exp(pi i n.tau.n + 2 pi i n.(x + tau s))
        s = np.round(-X.imag @ self._Yinv).astype(float)
        Xs = X + s @ self.tau
        log_pref = 1j * np.pi * np.einsum("ni,ij,nj->n", s, self.tau, s) + 2j * np.pi * np.sum(s * X, axis=1)
        out = np.empty(X.shape[0], dtype=complex)
        for c0 in range(0, X.shape[0], self._CHUNK):
            r = slice(c0, c0 + self._CHUNK)
            acc = np.broadcast_to(self._quad, (Xs[r].shape[0], self._quad.size)).copy()
            for j in range(self.g):
                pw = np.exp(2j * np.pi * Xs[r, j, None] * self._ks[j][None, :])
                acc *= pw[:, self._idx[j]]
            out[r] = acc.sum(axis=1) * np.exp(log_pref[r])
        return out[0] if single else out


def theta(x, tau, tol: float | None = None):
    return ThetaSeries(tau, tol)(x)
