"""Canonical homology basis on the curve, built by the rectangle cut-out procedure.

Paths are polylines in the lambda-plane. Which sheet a path is on is tracked
by recording where the principal square root of P^2 jumps, i.e. where P^2
crosses the negative real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HomologyError
from .surface import OrderedSpectrum, curve_squared, epsilon

# Per-cycle drawing scale: cycle number i (a1, b1, a2, b2, ...) uses 1 - SHRINK_STEP * (i + 1).
SHRINK_STEP = 0.01
_ROOT_IMAG_TOL = 1e-7
_ENDPOINT_S = 1e-6  # roots this close to an on-cut waypoint belong to the waypoint
_CUT_TOL = 1e-9
# a-cycles start on the lower sheet; with a_j o b_j = +1 this fixes the overall
# sign of all periods (and so of omega, k and delta) to the published one.
A_CYCLE_SHEET = -1


@dataclass(frozen=True)
class SheetedPath:
    """Polyline with the sheet-change positions on each of its segments."""

    waypoints: tuple[complex, ...]
    initial_sheet: int
    sheet_changes: tuple[tuple[complex, ...], ...] = field(default=())

    @property
    def closed(self) -> bool:
        return len(self.waypoints) > 1 and self.waypoints[0] == self.waypoints[-1]

    @property
    def n_changes(self) -> int:
        return sum(len(c) for c in self.sheet_changes)

    @property
    def final_sheet(self) -> int:
        return self.initial_sheet * (-1) ** self.n_changes

    def segments(self):
        """Yield (start, end, sheet at start, change positions) per segment."""
        sheet = self.initial_sheet
        for k in range(len(self.waypoints) - 1):
            changes = self.sheet_changes[k]
            yield self.waypoints[k], self.waypoints[k + 1], sheet, changes
            sheet *= (-1) ** len(changes)

    def sheet_at(self, k: int, t: float) -> int:
        """Sheet on segment k at fractional position t."""
        sheet = self.initial_sheet * (-1) ** sum(len(c) for c in self.sheet_changes[:k])
        a, b = self.waypoints[k], self.waypoints[k + 1]
        d = b - a
        for z in self.sheet_changes[k]:
            if ((z - a) / d).real < t:
                sheet = -sheet
        return sheet

    def flipped(self) -> "SheetedPath":
        return SheetedPath(self.waypoints, -self.initial_sheet, self.sheet_changes)

    def to_json(self) -> dict:
        return {
            "waypoints": [[w.real, w.imag] for w in self.waypoints],
            "initial_sheet": self.initial_sheet,
            "sheet_changes": [[[z.real, z.imag] for z in seg] for seg in self.sheet_changes],
        }


@dataclass(frozen=True)
class HomologyBasis:
    a_cycles: tuple[SheetedPath, ...]
    b_cycles: tuple[SheetedPath, ...]
    infinity_path: SheetedPath
    M: float
    eps: float

    @property
    def genus(self) -> int:
        return len(self.a_cycles)

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "epsilon": self.eps,
            "a_cycles": [c.to_json() for c in self.a_cycles],
            "b_cycles": [c.to_json() for c in self.b_cycles],
            "infinity_path": self.infinity_path.to_json(),
        }


def _segment_poly(points, a: complex, b: complex) -> np.ndarray:
    """Coefficients (highest first) of P^2(a + s (b - a)) as a polynomial in s."""
    d = b - a
    coeffs = np.array([1.0 + 0j])
    for p in points:
        coeffs = np.convolve(coeffs, np.array([d, a - p]))
    return coeffs


def find_sheet_changes(spec: OrderedSpectrum, a: complex, b: complex, entry_sheet: int = 1, *,
                       skip_start: bool = False, skip_end: bool = False):
    """Positions on [a, b] where the principal branch of P jumps, and the exit sheet.

    ``skip_start`` / ``skip_end`` drop crossings at that endpoint; make_path
    decides those itself when a waypoint lies on the cut.

    Im(P^2) restricted to the segment is a real polynomial in the segment
    parameter, so its zeros are found as polynomial roots and polished by
    Newton steps on the exact product.
    """
    if a == b:
        return (), entry_sheet
    pts = spec.points
    coeffs = _segment_poly(pts, a, b)
    im_coeffs = coeffs.imag
    scale = np.max(np.abs(coeffs))
    if np.max(np.abs(im_coeffs)) <= 1e-14 * scale:
        # P^2 is real along the whole segment; it must not run along the cut
        mid = curve_squared(pts, 0.5 * (a + b))
        if mid.real < 0:
            raise HomologyError(f"segment {a}->{b} runs along a branch cut")
        return (), entry_sheet
    nz = np.flatnonzero(np.abs(im_coeffs) > 1e-14 * scale)
    roots = np.roots(im_coeffs[nz[0]:]) if nz.size else np.array([])
    dpoly = np.polyder(coeffs)
    found: list[float] = []
    for r in roots:
        if abs(r.imag) > _ROOT_IMAG_TOL * max(1.0, abs(r)):
            continue
        s = r.real
        if s < -1e-6 or s > 1 + 1e-6:
            continue
        # Newton polish on Im(P^2(s)) using the full complex polynomial
        for _ in range(50):
            val = np.polyval(coeffs, s).imag
            der = np.polyval(dpoly, s).imag
            if der == 0.0:
                break
            step = val / der
            s -= step
            if abs(step) < 1e-15:
                break
        if not (0.0 < s < 1.0):
            continue
        if (skip_start and s < _ENDPOINT_S) or (skip_end and s > 1.0 - _ENDPOINT_S):
            continue
        found.append(s)
    found.sort()
    changes: list[complex] = []
    last = -1.0
    for s in found:
        if s - last < 1e-12:
            continue
        w = np.polyval(coeffs, s)
        if w.real >= 0:
            continue
        h = 1e-7 * max(1e-3, min(s, 1.0 - s))
        left = np.polyval(coeffs, s - h)
        right = np.polyval(coeffs, s + h)
        if np.sign(left.imag) == np.sign(right.imag):
            continue  # touches the negative axis without crossing
        changes.append(a + s * (b - a))
        last = s
    return tuple(changes), entry_sheet * (-1) ** len(changes)


def make_path(spec: OrderedSpectrum, waypoints, initial_sheet: int = 1) -> SheetedPath:
    """Attach sheet-change positions to a polyline."""
    wps: list[complex] = []
    for w in waypoints:
        w = complex(w)
        if not wps or abs(w - wps[-1]) > 1e-13:
            wps.append(w)
    if len(wps) == 1:
        wps.append(wps[0])
    closed = len(wps) > 2 and abs(wps[0] - wps[-1]) <= 1e-13
    n = len(wps)
    cut = [_on_cut(spec.points, w) for w in wps]
    if closed:
        cut[0] = cut[-1] = cut[0] or cut[-1]
    # a waypoint on the cut: compare the sides of the incoming and outgoing segments
    at_wp = [False] * n
    for k in range(n):
        if not cut[k]:
            continue
        prev = wps[k - 1] if k > 0 else (wps[-2] if closed else None)
        nxt = wps[k + 1] if k < n - 1 else (wps[1] if closed else None)
        if prev is not None and nxt is not None:
            at_wp[k] = _crosses_at(spec.points, prev, wps[k], nxt)
    sheet = initial_sheet
    changes = []
    for k in range(n - 1):
        c, sheet = find_sheet_changes(spec, wps[k], wps[k + 1], sheet,
                                      skip_start=cut[k], skip_end=cut[k + 1])
        if at_wp[k] and k > 0:
            c = (wps[k], *c)
            sheet = -sheet
        changes.append(c)
    if closed and at_wp[0]:
        # crossing at the start point of a closed path: record it as the final step
        changes[-1] = (*changes[-1], wps[-1])
    return SheetedPath(tuple(wps), initial_sheet, tuple(changes))


def _on_cut(points, w: complex) -> bool:
    v = curve_squared(points, w)
    return v.real < 0 and abs(v.imag) <= _CUT_TOL * abs(v)


def _crosses_at(points, prev: complex, w: complex, nxt: complex) -> bool:
    h = 1e-7 * min(abs(prev - w), abs(nxt - w))
    before = curve_squared(points, w + h * (prev - w) / abs(prev - w))
    after = curve_squared(points, w + h * (nxt - w) / abs(nxt - w))
    return np.sign(before.imag) != np.sign(after.imag)


def reverse_path(spec: OrderedSpectrum, path: SheetedPath) -> SheetedPath:
    # sheet just before the end point, so a change recorded on the end point is not double counted
    return make_path(spec, path.waypoints[::-1], path.sheet_at(len(path.waypoints) - 2, 1.0))


def get_cycle(inside, all_points, eps: float, shrink: float = 1.0) -> list[complex]:
    """Closed rectangle-with-notches polyline enclosing exactly ``inside``.

    ``eps`` decides which outside points get a notch; ``shrink * eps`` is
    the drawing margin. Traversal is clockwise from the top-left corner.
    """
    inside = [complex(p) for p in inside]
    if not inside:
        raise HomologyError("cycle needs at least one enclosed point")
    if not 0 < shrink <= 1:
        raise ValueError("shrink must be in (0, 1]")
    pts = [complex(p) for p in all_points]
    e = shrink * eps
    h_r = max(p.real for p in pts) + e
    l_r = min(p.real for p in pts) - e
    h_i = max(p.imag for p in inside) + e
    l_i = min(p.imag for p in inside) - e

    def is_inside(p):
        return any(abs(p - q) < 1e-12 for q in inside)

    xtop, xbot = [], []
    for p in pts:
        if is_inside(p):
            continue
        if h_i - eps <= p.imag <= h_i + eps:
            xtop.append(p)
        elif l_i - eps <= p.imag <= l_i + eps:
            xbot.append(p)
    xtop.sort(key=lambda p: p.real)
    xbot.sort(key=lambda p: -p.real)

    cycle = [complex(l_r, h_i)]
    for p in xtop:
        depth = p.imag - e
        if depth <= l_i + 1e-9 * max(1.0, abs(l_i)):
            # notch would reach the bottom edge; stop halfway between
            depth = 0.5 * (p.imag + l_i)
        cycle += [complex(p.real - e, h_i), complex(p.real - e, depth)]
        cycle += [complex(p.real + e, depth), complex(p.real + e, h_i)]
    cycle += [complex(h_r, h_i), complex(h_r, l_i)]
    for p in xbot:
        height = p.imag + e
        if height >= h_i - 1e-9 * max(1.0, abs(h_i)):
            height = 0.5 * (p.imag + h_i)
        cycle += [complex(p.real + e, l_i), complex(p.real + e, height)]
        cycle += [complex(p.real - e, height), complex(p.real - e, l_i)]
    cycle += [complex(l_r, l_i), complex(l_r, h_i)]
    return cycle


def winding_number(polygon, point: complex) -> int:
    poly = np.asarray(polygon, dtype=complex) - point
    angles = np.angle(poly[1:] / poly[:-1])
    return int(round(float(np.sum(angles)) / (2 * math.pi)))


def path_to_M(spec: OrderedSpectrum, eps: float | None = None) -> tuple[SheetedPath, float]:
    """Open path from M on one sheet around the last branch point back to M on the other.

    The path starts on sheet -1 so that it runs from M^- to M^+.
    """
    pts = spec.points
    e = epsilon(spec) if eps is None else eps
    M = max(p.real for p in pts) + e
    top = pts[-1]
    s = 1.0 if top.imag > 0 else -1.0
    R, I = top.real, top.imag
    wps = [
        complex(M, 0.0),
        complex(M, I + s * e),
        complex(R - e, I + s * e),
        complex(R - e, I - s * e),
        complex(R + e, I - s * e),
        complex(R + e, I + s * e),
        complex(M, I + s * e),
        complex(M, 0.0),
    ]
    path = make_path(spec, wps, initial_sheet=-1)
    if path.n_changes % 2 != 1:
        raise HomologyError("path to infinity must change sheet an odd number of times")
    return path, M


def _crossings(p: SheetedPath, q: SheetedPath):
    """Transversal crossings of two polylines as (point, sign, same_sheet)."""
    out = []
    pw, qw = p.waypoints, q.waypoints
    for k in range(len(pw) - 1):
        a0, a1 = pw[k], pw[k + 1]
        da = a1 - a0
        if da == 0:
            continue
        for m in range(len(qw) - 1):
            b0, b1 = qw[m], qw[m + 1]
            db = b1 - b0
            if db == 0:
                continue
            cross = (da.conjugate() * db).imag
            if abs(cross) < 1e-14 * abs(da) * abs(db):
                continue
            w = b0 - a0
            t = (w.conjugate() * db).imag / cross
            u = (w.conjugate() * da).imag / cross
            if 0.0 <= t < 1.0 and 0.0 <= u < 1.0:
                pt = a0 + t * da
                same = p.sheet_at(k, t) == q.sheet_at(m, u)
                out.append((pt, 1 if cross > 0 else -1, same))
    return out


def intersection_number(p: SheetedPath, q: SheetedPath) -> int:
    """Sum of crossing signs over points where both paths are on the same sheet."""
    return sum(sign for _, sign, same in _crossings(p, q) if same)


def orient_canonical(spec: OrderedSpectrum, a_cycles, b_cycles):
    """Fix sheets and direction of each b_j so that a_j o b_j = +1."""
    out = []
    for j, (a, b) in enumerate(zip(a_cycles, b_cycles)):
        cr = _crossings(a, b)
        if not cr:
            raise HomologyError(f"a_{j + 1} and b_{j + 1} do not meet")
        same = sum(s for _, s, sm in cr if sm)
        diff = sum(s for _, s, sm in cr if not sm)
        if same == 0 and diff != 0:
            b = b.flipped()
            same = diff
        if same == -1:
            b = reverse_path(spec, b)
            same = intersection_number(a, b)
        if same != 1:
            raise HomologyError(f"cannot orient b_{j + 1}: intersection number {same}")
        out.append(b)
    return tuple(out)


def shrink_factor(index: int) -> float:
    return 1.0 - SHRINK_STEP * (index + 1)


def homology_basis(spec: OrderedSpectrum) -> HomologyBasis:
    """a_j around points 1..2j, b_j around points 2j, 2j+1 (1-based), plus the path to infinity."""
    pts = spec.points
    g = spec.genus
    eps = epsilon(spec)
    a_cycles, b_cycles = [], []
    for j in range(1, g + 1):
        a_in = pts[: 2 * j]
        b_in = pts[2 * j - 1: 2 * j + 1]
        a_wp = get_cycle(a_in, pts, eps, shrink_factor(2 * (j - 1)))
        b_wp = get_cycle(b_in, pts, eps, shrink_factor(2 * (j - 1) + 1))
        for name, wp, members in (("a", a_wp, a_in), ("b", b_wp, b_in)):
            for p in pts:
                w = winding_number(wp, p)
                want = p in members
                if abs(w) != int(want):
                    raise HomologyError(f"{name}_{j} winds {w} times around {p}")
        a = make_path(spec, a_wp, A_CYCLE_SHEET)
        b = make_path(spec, b_wp, 1)
        for name, c in (("a", a), ("b", b)):
            if c.n_changes % 2:
                raise HomologyError(f"{name}_{j} does not close on its initial sheet")
        a_cycles.append(a)
        b_cycles.append(b)
    b_oriented = orient_canonical(spec, a_cycles, b_cycles)
    inf_path, M = path_to_M(spec, eps)
    return HomologyBasis(tuple(a_cycles), b_oriented, inf_path, M, eps)
