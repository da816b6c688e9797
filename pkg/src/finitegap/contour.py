"""Abelian integrals f(lambda)/P(lambda) d lambda over sheeted paths, and the period data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quadrature
from .errors import PeriodError, QuadratureError
from .homology import HomologyBasis, SheetedPath
from .surface import OrderedSpectrum, curve_squared, principal_sqrt

REALITY_TOL = 1e-8
_SERIES_TERMS = 64


@dataclass(frozen=True)
class RationalDifferential:
    """f(lambda)/P(lambda) d lambda with f given by ascending coefficients."""

    numerator_coeffs: tuple[complex, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "numerator_coeffs", tuple(complex(c) for c in self.numerator_coeffs))

    @property
    def degree(self) -> int:
        nz = [i for i, c in enumerate(self.numerator_coeffs) if c != 0]
        return nz[-1] if nz else -1

    def padded(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=complex)
        c = np.asarray(self.numerator_coeffs, dtype=complex)
        out[: c.size] = c
        return out

    @classmethod
    def monomial(cls, power: int) -> "RationalDifferential":
        return cls(tuple([0.0] * power + [1.0]))

    def integrate(self, moments: np.ndarray) -> complex:
        """Integral given the monomial moments int lambda^m / P over the same path."""
        c = np.asarray(self.numerator_coeffs, dtype=complex)
        if c.size > moments.size:
            raise ValueError("not enough moments for this numerator")
        return complex(np.dot(c, moments[: c.size]))


def path_moments(spec: OrderedSpectrum, path: SheetedPath, n_moments: int | None = None) -> np.ndarray:
    """int_path lambda^m / P(lambda) d lambda for m = 0 .. n_moments-1.

    Each straight piece between sheet changes is integrated with the
    principal branch times the running sheet sign.
    """
    if n_moments is None:
        n_moments = spec.genus + 3
    pts = spec.points
    powers = np.arange(n_moments)
    total = np.zeros(n_moments, dtype=complex)
    for k, (a, b, sheet, changes) in enumerate(path.segments()):
        nodes = [a, *changes, b]
        for piece, (z0, z1) in enumerate(zip(nodes[:-1], nodes[1:])):
            if z0 == z1:
                continue
            d = z1 - z0
            sgn = sheet * (-1) ** piece

            def integrand(s, z0=z0, d=d, sgn=sgn):
                lam = z0 + s * d
                p = principal_sqrt(curve_squared(pts, lam))
                return (lam[:, None] ** powers[None, :]) / (sgn * p)[:, None] * d

            try:
                total += quadrature.integrate(integrand, 0.0, 1.0)
            except QuadratureError as exc:
                raise QuadratureError(f"segment {k} ({a} -> {b}): {exc}") from exc
    return total


def integrate_path(diff: RationalDifferential, path: SheetedPath, spec: OrderedSpectrum) -> complex:
    n = max(diff.degree + 1, 1)
    return diff.integrate(path_moments(spec, path, n))


def _inverse_sqrt_series(points, X: float, n_terms: int) -> np.ndarray:
    """Taylor coefficients of 1/sqrt(prod(1 - lambda_k u / X)) in u."""
    x = np.asarray(points, dtype=complex) / X
    p = np.array([np.sum(x ** n) for n in range(n_terms)])
    # log of the series: sum_n p_n u^n / (2 n)
    f = np.zeros(n_terms, dtype=complex)
    f[1:] = p[1:] / (2.0 * np.arange(1, n_terms))
    s = np.zeros(n_terms, dtype=complex)
    s[0] = 1.0
    for n in range(1, n_terms):
        kk = np.arange(1, n + 1)
        s[n] = np.sum(kk * f[kk] * s[n - kk]) / n
    return s


def real_tail(spec: OrderedSpectrum, coeffs, X: float, lead: float = 0.0) -> complex:
    """int_X^inf (f(lambda)/|P(lambda)| - lead * lambda^(K-1)) d lambda on the real axis.

    K = max(deg f - g, 0). The integrand decays like lambda^-2 once the
    leading growth is removed. With u = X / lambda the piece near u = 0 is
    integrated term by term from the Laurent expansion, the rest by
    quadrature, so no large cancelling terms are ever formed.
    """
    pts = spec.points
    g = spec.genus
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    if c.size == 0:
        return 0j
    deg = c.size - 1
    K = max(deg - g, 0)
    rmax = max(abs(p) for p in pts) / X
    u0 = min(0.5, 0.25 / rmax)
    series = _inverse_sqrt_series(pts, X, _SERIES_TERMS)
    # Q(u) = sum_m c_m X^(m-g-K) u^(g+K-m)
    q = np.zeros(g + K + 1, dtype=complex)
    for m, cm in enumerate(c):
        q[g + K - m] += cm * X ** (m - g - K)
    e = np.convolve(q, series)[:_SERIES_TERMS]
    e[0] -= lead
    head = e[: K + 1]
    if np.max(np.abs(head)) > 1e-8 * max(1.0, np.max(np.abs(e))):
        raise PeriodError(f"integrand does not decay at infinity (residual leading terms {head})")
    n = np.arange(K + 1, _SERIES_TERMS)
    near = X ** K * np.sum(e[K + 1:] * u0 ** (n - K) / (n - K))

    def integrand(u):
        lam = X / u
        absP = principal_sqrt(curve_squared(pts, lam))
        f = np.polyval(c[::-1], lam)
        val = (f / absP - lead * lam ** (K - 1)) * X / u ** 2
        return val[:, None]

    far = quadrature.integrate(integrand, u0, 1.0)[0]
    return complex(near + far)


def real_segment(spec: OrderedSpectrum, coeffs, x0: float, x1: float, sheet: int = 1) -> complex:
    """int_{x0}^{x1} f/P on the real axis (no sheet changes there)."""
    if x1 == x0:
        return 0j
    c = np.asarray(coeffs, dtype=complex)
    pts = spec.points

    def integrand(s):
        lam = x0 + s * (x1 - x0) + 0j
        p = sheet * principal_sqrt(curve_squared(pts, lam))
        return (np.polyval(c[::-1], lam) / p * (x1 - x0))[:, None]

    return complex(quadrature.integrate(integrand, 0.0, 1.0)[0])


@dataclass(frozen=True)
class PeriodData:
    A: np.ndarray
    B: np.ndarray
    tau: np.ndarray
    omega: np.ndarray
    k: np.ndarray
    delta_diff: np.ndarray
    A_inv: np.ndarray
    omega_imag: float = 0.0
    k_imag: float = 0.0
    tau_shift: np.ndarray | None = None


_REDUCE_SLACK = 1e-9


def reduce_tau(tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Shift Re(tau) by an integer matrix N with even diagonal, leaving theta unchanged.

    Off-diagonal real parts land in [-1/2, 1/2), diagonal ones in [-1, 1),
    both up to a small slack so values sitting on the boundary are stable.
    Equivalent to replacing b_k by b_k - sum_j N_jk a_j.
    """
    re = tau.real
    N = np.floor(re + 0.5 + _REDUCE_SLACK)
    d = np.diag(re)
    np.fill_diagonal(N, 2.0 * np.floor(0.5 * (d + 1.0 + _REDUCE_SLACK)))
    return tau - N, N.astype(int)


def _realify(v: np.ndarray, name: str, tol: float | None = None) -> tuple[np.ndarray, float]:
    tol = REALITY_TOL if tol is None else tol
    resid = float(np.max(np.abs(v.imag))) if v.size else 0.0
    if resid > tol:
        raise PeriodError(f"{name} has imaginary residue {resid:.3e} > {tol:g}")
    return v.real.copy(), resid


def period_matrices(spec: OrderedSpectrum, basis: HomologyBasis):
    """A_jk = int_{a_k} dU_j and B_jk = int_{b_k} dU_j with dU_j = lambda^(j-1)/P."""
    g = spec.genus
    A = np.zeros((g, g), dtype=complex)
    B = np.zeros((g, g), dtype=complex)
    for k in range(g):
        A[:, k] = path_moments(spec, basis.a_cycles[k], g)
        B[:, k] = path_moments(spec, basis.b_cycles[k], g)
    return A, B


def compute_period_data(spec: OrderedSpectrum, basis: HomologyBasis) -> PeriodData:
    g = spec.genus
    if g == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return PeriodData(empty, empty, empty, np.zeros(0), np.zeros(0), np.zeros(0, dtype=complex), empty)
    A, B = period_matrices(spec, basis)
    if np.linalg.cond(A) > 1e12:
        raise PeriodError("matrix of a-periods is singular; homology basis is defective")
    A_inv = np.linalg.inv(A)
    tau, shift = reduce_tau(A_inv @ B)
    B = A @ tau
    sum_pts = complex(np.sum(spec.array))
    omega = -4j * np.pi * A_inv[:, g - 1]
    col_prev = A_inv[:, g - 2] if g >= 2 else np.zeros(g, dtype=complex)
    k = -8j * np.pi * (col_prev + 0.5 * A_inv[:, g - 1] * sum_pts)
    omega, om_im = _realify(omega, "omega")
    k, k_im = _realify(k, "k")
    delta = compute_delta_diff(spec, basis, A_inv)
    return PeriodData(A, B, tau, omega, k, delta, A_inv, om_im, k_im, shift)


def compute_delta_diff(spec: OrderedSpectrum, basis: HomologyBasis, A_inv: np.ndarray) -> np.ndarray:
    """delta^+ - delta^- = 2 pi int_{inf^-}^{inf^+} d psi, d psi = A^-1 dU.

    The path runs along the real axis from infinity to M on the lower sheet,
    around the last branch point, and back out on the upper sheet; both real
    pieces contribute the same amount. The real piece is split at max(M, 1).
    """
    g = spec.genus
    mid = path_moments(spec, basis.infinity_path, g)
    # the tail substitution u = X / lambda needs X > 0
    X = max(basis.M, 1.0)
    tails = np.array([real_tail(spec, np.eye(g)[m], X) for m in range(g)])
    if X > basis.M:
        tails += np.array([real_segment(spec, np.eye(g)[m], basis.M, X) for m in range(g)])
    dU = mid + 2.0 * tails
    return 2 * np.pi * (A_inv @ dU)
