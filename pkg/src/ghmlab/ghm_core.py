"""Generalized Henon map: exact iteration and linear analysis.

The planar map is

    T(x, y) = (y, M - B*x - y**2 - R*x*y).

Fixed points lie on the diagonal x = y and solve

    (1 + R)*x**2 + (1 + B)*x - M = 0.

The Jacobian at (x, y) is [[0, 1], [-B - R*y, -2*y - R*x]], so
det DT = B + R*y everywhere, and at a fixed point the multipliers have
trace -(2 + R)*x and determinant B + R*x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_ESCAPE_RADIUS = 1.0e6

# moduli within this band of the unit circle count as non-hyperbolic
UNIT_TOL = 1e-9

_EPS = float(np.finfo(float).eps)


class DegenerateLineError(ValueError):
    """R = -1 and B = -1: the fixed-point equation degenerates to 0 = M."""


@dataclass(frozen=True)
class GhmParams:
    """Parameter triple (M, B, R) of the map."""

    M: float
    B: float
    R: float = 0.0

    def __post_init__(self):
        for name in ("M", "B", "R"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"parameter {name} must be finite, got {v!r}")


@dataclass(frozen=True)
class State2:
    """Phase point of the return plane."""

    x: float
    y: float

    @property
    def escaped(self) -> bool:
        # non-finite coordinates mark an orbit that left every bounded set
        return not (math.isfinite(self.x) and math.isfinite(self.y))


@dataclass(frozen=True)
class FixedPointReport:
    point: State2
    multipliers: tuple[complex, complex]
    stability: str  # attracting | repelling | saddle | non-hyperbolic


@dataclass(frozen=True)
class OrbitRecord:
    points: np.ndarray  # (k, 2); points[0] is the initial state
    escaped: bool
    escape_step: int | None


def step(p: GhmParams, s: State2) -> State2:
    """One application of the map. Overflow propagates as inf/nan, never raises."""
    x, y = s.x, s.y
    return State2(y, p.M - p.B * x - y * y - p.R * x * y)


def jacobian(p: GhmParams, s: State2) -> np.ndarray:
    return np.array([[0.0, 1.0], [-p.B - p.R * s.y, -2.0 * s.y - p.R * s.x]])


def eig2(tr: float, det: float) -> tuple[complex, complex]:
    """Eigenvalue pair of a 2x2 matrix given trace and determinant.

    The discriminant is clamped to zero inside its roundoff band so that
    structurally double multipliers (saddle-node and period-doubling loci,
    codimension-2 points) come out exactly equal instead of carrying
    sqrt(eps) noise. Ordered by (modulus, argument) descending.
    """
    disc = tr * tr - 4.0 * det
    scale = max(tr * tr, 4.0 * abs(det), 1.0)
    if abs(disc) <= 64.0 * _EPS * scale:
        m = tr / 2.0
        return (complex(m), complex(m))
    if disc > 0.0:
        sq = math.sqrt(disc)
        if tr == 0.0:
            # exact +-r pair; keep the moduli bit-identical so the angle
            # tie-break below stays deterministic
            pair = (complex(sq / 2.0), complex(-sq / 2.0))
        else:
            m1 = (tr + sq) / 2.0 if tr > 0.0 else (tr - sq) / 2.0
            m2 = det / m1  # larger-modulus root first avoids cancellation
            pair = (complex(m1), complex(m2))
    else:
        im = math.sqrt(-disc) / 2.0
        pair = (complex(tr / 2.0, im), complex(tr / 2.0, -im))
    return tuple(sorted(pair, key=lambda m: (-abs(m), -np.angle(m))))


def multipliers_at(p: GhmParams, x: float) -> tuple[complex, complex]:
    """Multipliers of the fixed point (x, x), ordered by (modulus, argument) desc."""
    tr = -(2.0 + p.R) * x
    det = p.B + p.R * x
    return eig2(tr, det)


def _stability_tag(mults: tuple[complex, complex]) -> str:
    a1, a2 = abs(mults[0]), abs(mults[1])
    if abs(a1 - 1.0) <= UNIT_TOL or abs(a2 - 1.0) <= UNIT_TOL:
        return "non-hyperbolic"
    if a1 < 1.0 and a2 < 1.0:
        return "attracting"
    if a1 > 1.0 and a2 > 1.0:
        return "repelling"
    return "saddle"


def _make_report(p: GhmParams, x: float) -> FixedPointReport:
    mults = multipliers_at(p, x)
    return FixedPointReport(State2(x, x), mults, _stability_tag(mults))


def fixed_points(p: GhmParams) -> list[FixedPointReport]:
    """All fixed points, sorted by x ascending; double roots reported once.

    R = -1 degenerates the quadratic to (1+B)x = M: one root for B != -1,
    and the fully degenerate line case R = B = -1 raises DegenerateLineError
    (M = 0 gives a line of fixed points, M != 0 gives none; neither fits a
    finite report list).
    """
    a = 1.0 + p.R
    b = 1.0 + p.B
    c = -p.M
    if a == 0.0:
        if b == 0.0:
            kind = "every diagonal point is fixed" if p.M == 0.0 else "no fixed points"
            raise DegenerateLineError(
                f"R = -1 and B = -1 degenerate the fixed-point equation to 0 = M ({kind})"
            )
        return [_make_report(p, p.M / b)]
    disc = b * b - 4.0 * a * c
    scale = max(b * b, abs(4.0 * a * c), 1.0)
    if abs(disc) <= 16.0 * _EPS * scale:
        # double root at the vertex; the merged point sits on the fold locus
        return [_make_report(p, -b / (2.0 * a))]
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    q = -(b + math.copysign(sq, b)) / 2.0
    roots = [q / a, c / q]
    polished = []
    for x in roots:
        d = 2.0 * a * x + b
        if d != 0.0:
            x -= (a * x * x + b * x + c) / d  # one Newton step cleans the residual
        polished.append(x)
    polished.sort()
    return [_make_report(p, x) for x in polished]


def orbit(
    p: GhmParams,
    s0: State2,
    count: int,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
) -> OrbitRecord:
    """Iterate, recording up to `count` states (the initial one included).

    Stops at the first state with sup-norm beyond escape_radius or with a
    non-finite coordinate; that state is kept and its index recorded.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not escape_radius > 0.0:
        raise ValueError("escape_radius must be positive")
    pts = np.empty((count, 2))
    x, y = s0.x, s0.y
    pts[0] = (x, y)
    if not (math.isfinite(x) and math.isfinite(y)) or max(abs(x), abs(y)) > escape_radius:
        return OrbitRecord(pts[:1].copy(), True, 0)
    M, B, R = p.M, p.B, p.R
    for k in range(1, count):
        x, y = y, M - B * x - y * y - R * x * y
        pts[k] = (x, y)
        if not (math.isfinite(x) and math.isfinite(y)) or max(abs(x), abs(y)) > escape_radius:
            return OrbitRecord(pts[: k + 1].copy(), True, k)
    return OrbitRecord(pts, False, None)
