"""Empirical long-run attractor classification for the map.

classify() runs one orbit through a decision tree: escape -> divergent;
short period verified by cycle multipliers -> sink; otherwise Lyapunov
exponents split chaotic / circle-candidate / undecided, and circle
candidates must pass a polygonal invariance test to be reported as
invariant circles. sweep() evaluates a full (M, B) grid with the same
tree, batched over cells; its output is a pure function of the grid
spec, independent of the thread count.

Exponent convention: lambda_1 from tangent-vector growth with per-step
renormalization, lambda_2 = <ln|det DT|> - lambda_1 (exact in 2D, same
numbers as the two-vector QR scheme).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ghm_core import DegenerateLineError, GhmParams, State2, eig2, fixed_points

VERDICTS = ("sink", "circle", "chaotic", "divergent", "undecided")

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_BLOCK = 2048  # sweep cells per work unit; fixed so output ignores threading


class OrbitEscapedError(RuntimeError):
    """Orbit left the escape radius; carries the 1-based step index."""

    def __init__(self, step: int):
        super().__init__(f"orbit escaped at step {step}")
        self.step = step


class NotACircleError(ValueError):
    """Sample's angular coverage has gaps; it does not trace a single loop."""


@dataclass(frozen=True)
class ClassifyOptions:
    burn_in: int = 10_000
    span: int = 100_000
    max_period: int = 64
    period_tol: float = 1e-8
    escape_radius: float = 1.0e6
    eps_lyap: float = 2e-4  # nats/iterate; weak NS circles sit near |l2| ~ 1e-3
    circle_points: int = 8192
    circle_bins: int = 256
    gap_limit_deg: float = 10.0
    # deterministic seed: offset from the chosen fixed point (see classify)
    seed_offset: tuple[float, float] = (1e-3, 2e-3)


@dataclass(frozen=True)
class AttractorClass:
    verdict: str
    period: int | None = None
    lyapunov: tuple[float, float] | None = None
    rotation_number: float | None = None
    evidence: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class CircleReport:
    center: tuple[float, float]
    mean_radius: float
    radial_deviation: float
    rotation_number: float
    invariance_residual: float | None
    vertices: np.ndarray = field(compare=False, repr=False, default=None)
    map_power: int = 1


@dataclass(frozen=True)
class SweepGrid:
    m_min: float
    m_max: float
    b_min: float
    b_max: float
    nx: int
    ny: int
    R: float
    cells: tuple[AttractorClass, ...]  # row-major, index = ib * nx + im

    def params_at(self, im: int, ib: int) -> GhmParams:
        M = np.linspace(self.m_min, self.m_max, self.nx)[im]
        B = np.linspace(self.b_min, self.b_max, self.ny)[ib]
        return GhmParams(float(M), float(B), self.R)


def _as_xy(tail) -> np.ndarray:
    if not isinstance(tail, np.ndarray) and len(tail) and isinstance(tail[0], State2):
        a = np.array([(s.x, s.y) for s in tail], float)
    else:
        a = np.asarray(tail, float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise ValueError("orbit tail must be an (n, 2) array of phase points")
    return a


# ---------------------------------------------------------------------------
# scalar building blocks


def lyapunov_exponents(
    p: GhmParams,
    s0: State2,
    burn_in: int,
    span: int,
    escape_radius: float = 1.0e6,
) -> tuple[float, float]:
    """Both Lyapunov exponents in nats/iterate along the orbit of s0.

    Raises OrbitEscapedError if the orbit leaves escape_radius during
    burn_in + span. A tangent vector annihilated exactly (superstable
    orbit) short-circuits to (-inf, -inf).
    """
    if span < 1000:
        raise ValueError("span must be >= 1000 for a meaningful average")
    M, B, R = p.M, p.B, p.R
    x, y = s0.x, s0.y
    for k in range(burn_in):
        x, y = y, M - B * x - y * y - R * x * y
        if not (math.isfinite(x) and math.isfinite(y)) or max(abs(x), abs(y)) > escape_radius:
            raise OrbitEscapedError(k + 1)
    v1, v2 = _INV_SQRT2, _INV_SQRT2
    slog = 0.0
    sdet = 0.0
    for k in range(span):
        j21 = -B - R * y
        w1, w2 = v2, j21 * v1 + (-2.0 * y - R * x) * v2
        nrm = math.hypot(w1, w2)
        if nrm == 0.0:
            return (-math.inf, -math.inf)
        slog += math.log(nrm)
        v1, v2 = w1 / nrm, w2 / nrm
        det = B + R * y
        sdet += math.log(abs(det)) if det != 0.0 else -math.inf
        x, y = y, M - B * x - y * y - R * x * y
        if not (math.isfinite(x) and math.isfinite(y)) or max(abs(x), abs(y)) > escape_radius:
            raise OrbitEscapedError(burn_in + k + 1)
    l1 = slog / span
    s = sdet / span
    if l1 < s - l1:  # tangent alignment cannot beat the sum rule in 2D
        l1 = s - l1
    return (l1, s - l1)


def detect_period(orbit_tail, max_period: int, tol: float) -> int | None:
    """Smallest k <= max_period with sup-norm recurrence < tol over the whole tail."""
    pts = _as_xy(orbit_tail)
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    if len(pts) < 4 * max_period:
        raise ValueError("tail must hold at least 4*max_period points")
    for k in range(1, max_period + 1):
        if np.abs(pts[k:] - pts[:-k]).max() < tol:
            return k
    return None


def _dist_to_polygon(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Distance from each point to the closed polygon through verts."""
    a = verts
    ab = np.roll(verts, -1, axis=0) - a  # (k, 2)
    denom = (ab * ab).sum(axis=1)
    denom[denom == 0.0] = 1.0
    aq = points[:, None, :] - a[None, :, :]  # (m, k, 2)
    t = np.clip((aq * ab[None, :, :]).sum(axis=2) / denom[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = np.linalg.norm(points[:, None, :] - proj, axis=2)
    return d.min(axis=1)


def fit_invariant_circle(
    orbit_tail,
    p: GhmParams | None = None,
    map_power: int = 1,
    bins: int = 256,
    gap_limit_deg: float = 10.0,
) -> CircleReport:
    """Fit a closed polygonal curve to a bounded non-periodic tail.

    Points are sorted by angle about their centroid and averaged in angular
    bins; the polygon through the bin means is the curve estimate. Angular
    gaps beyond gap_limit_deg raise NotACircleError. When p is given, the
    invariance residual is the largest distance from the map image of a
    polygon vertex (map applied map_power times) back to the polygon.
    The rotation number is the mean wrapped angular increment per time step,
    folded into (0, 0.5).
    """
    pts = _as_xy(orbit_tail)
    if len(pts) < 2000:
        raise ValueError("need at least 2000 tail points to fit a circle")
    center = pts.mean(axis=0)
    rel = pts - center
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    rad = np.hypot(rel[:, 0], rel[:, 1])

    srt = np.sort(ang)
    gaps = np.diff(srt)
    wrap_gap = srt[0] + 2.0 * math.pi - srt[-1]
    max_gap = max(gaps.max() if len(gaps) else 2 * math.pi, wrap_gap)
    if max_gap > math.radians(gap_limit_deg):
        raise NotACircleError(f"angular gap {math.degrees(max_gap):.2f} deg exceeds limit")

    idx = np.minimum((bins * (ang + math.pi) / (2.0 * math.pi)).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    sx = np.bincount(idx, weights=pts[:, 0], minlength=bins)
    sy = np.bincount(idx, weights=pts[:, 1], minlength=bins)
    nonempty = counts > 0
    verts = np.column_stack([sx[nonempty] / counts[nonempty], sy[nonempty] / counts[nonempty]])

    dth = np.diff(ang)
    dth = (dth + math.pi) % (2.0 * math.pi) - math.pi
    rho = abs(dth.mean()) / (2.0 * math.pi)
    if rho > 0.5:
        rho = 1.0 - rho

    residual = None
    if p is not None:
        img = verts.copy()
        for _ in range(map_power):
            img = np.column_stack(
                [img[:, 1], p.M - p.B * img[:, 0] - img[:, 1] ** 2 - p.R * img[:, 0] * img[:, 1]]
            )
        residual = float(_dist_to_polygon(img, verts).max())

    return CircleReport(
        center=(float(center[0]), float(center[1])),
        mean_radius=float(rad.mean()),
        radial_deviation=float(rad.std()),
        rotation_number=float(rho),
        invariance_residual=residual,
        vertices=verts,
        map_power=map_power,
    )


# ---------------------------------------------------------------------------
# classification


def _seed_point(p: GhmParams, opts: ClassifyOptions) -> State2:
    """Deterministic initial condition: near an attracting fixed point when one
    exists, else near the fixed point of smallest |x|, else the origin."""
    try:
        reports = fixed_points(p)
    except DegenerateLineError:
        reports = []
    if not reports:
        return State2(0.0, 0.0)
    att = [r for r in reports if r.stability == "attracting"]
    rep = att[0] if att else min(reports, key=lambda r: abs(r.point.x))
    dx, dy = opts.seed_offset
    return State2(rep.point.x + dx, rep.point.y + dy)


def _verify_cycle(p: GhmParams, cycle: np.ndarray) -> tuple[bool, tuple[float, float]]:
    """Check the detected k-cycle is linearly attracting; per-iterate exponents."""
    k = len(cycle)
    m11, m12, m21, m22 = 1.0, 0.0, 0.0, 1.0
    det = 1.0
    for x, y in cycle:
        j21 = -p.B - p.R * y
        j22 = -2.0 * y - p.R * x
        # left-multiply by [[0, 1], [j21, j22]]
        m11, m12, m21, m22 = m21, m22, j21 * m11 + j22 * m21, j21 * m12 + j22 * m22
        det *= p.B + p.R * y
    e1, e2 = eig2(m11 + m22, det)
    mods = sorted((abs(e1), abs(e2)), reverse=True)
    lams = tuple((math.log(m) if m > 0.0 else -math.inf) / k for m in mods)
    return mods[0] < 1.0, lams


def classify(p: GhmParams, opts: ClassifyOptions | None = None, s0: State2 | None = None) -> AttractorClass:
    """Long-run attractor verdict at parameter p. Undecided is a verdict."""
    opts = opts or ClassifyOptions()
    if s0 is None:
        s0 = _seed_point(p, opts)
    M, B, R = p.M, p.B, p.R
    rad = opts.escape_radius
    x, y = s0.x, s0.y
    for k in range(opts.burn_in):
        x, y = y, M - B * x - y * y - R * x * y
        if not (math.isfinite(x) and math.isfinite(y)) or max(abs(x), abs(y)) > rad:
            return AttractorClass("divergent", evidence={"escape_step": k + 1})

    tail_len = max(4 * opts.max_period, 3 * opts.circle_points)
    tail = np.empty((tail_len, 2))
    for k in range(tail_len):
        x, y = y, M - B * x - y * y - R * x * y
        if not (math.isfinite(x) and math.isfinite(y)) or max(abs(x), abs(y)) > rad:
            return AttractorClass("divergent", evidence={"escape_step": opts.burn_in + k + 1})
        tail[k] = (x, y)

    per = detect_period(tail[-4 * opts.max_period :], opts.max_period, opts.period_tol)
    if per is not None:
        ok, lams = _verify_cycle(p, tail[-per:])
        if ok and lams[0] < -opts.eps_lyap:
            return AttractorClass("sink", period=per, lyapunov=lams,
                                  evidence={"cycle_multiplier_check": True})
        # neutral or weakly attracting cycle: fall through to the exponent tests

    try:
        l1, l2 = lyapunov_exponents(p, State2(x, y), 0, opts.span, rad)
    except OrbitEscapedError as e:
        return AttractorClass("divergent", evidence={"escape_step": opts.burn_in + tail_len + e.step})

    eps = opts.eps_lyap
    if l1 > eps:
        return AttractorClass("chaotic", lyapunov=(l1, l2))
    if l1 < -eps:
        # contracting but no short period found: likely a long-period sink
        return AttractorClass("undecided", lyapunov=(l1, l2),
                              evidence={"note": "contracting, period > max_period?"})
    if l2 < -eps:
        # neutral along the orbit, contracting transversally: circle candidate.
        # A flip-symmetric pair of loops needs decimation before the fit.
        fails = {}
        for q in (1, 2, 3):
            sub = tail[:: q] if q > 1 else tail
            sub = sub[-opts.circle_points :] if len(sub) >= opts.circle_points else sub
            if len(sub) < 2000:
                continue
            try:
                rep = fit_invariant_circle(sub, p=p, map_power=q,
                                           bins=opts.circle_bins,
                                           gap_limit_deg=opts.gap_limit_deg)
            except NotACircleError as err:
                fails[q] = str(err)
                continue
            if rep.invariance_residual < 1e-3 * rep.mean_radius:
                return AttractorClass(
                    "circle",
                    lyapunov=(l1, l2),
                    rotation_number=rep.rotation_number,
                    evidence={
                        "invariance_residual": rep.invariance_residual,
                        "mean_radius": rep.mean_radius,
                        "map_power": q,
                    },
                )
            fails[q] = f"residual {rep.invariance_residual:.3e} vs radius {rep.mean_radius:.3e}"
        return AttractorClass("undecided", lyapunov=(l1, l2), evidence={"circle_fit": fails})
    return AttractorClass("undecided", lyapunov=(l1, l2))


# ---------------------------------------------------------------------------
# grid sweep (batched, deterministic)


def _largest_modulus(tr, det):
    dm = tr * tr - 4.0 * det
    real = dm >= 0.0
    sq = np.sqrt(np.where(real, np.maximum(dm, 0.0), 0.0))
    return np.where(real, 0.5 * (np.abs(tr) + sq), np.sqrt(np.maximum(det, 0.0)))


def _sweep_block(Ms, Bs, nx, R, i0, i1, opts: ClassifyOptions) -> list[AttractorClass]:
    idxs = np.arange(i0, i1)
    M = Ms[idxs % nx].copy()
    B = Bs[idxs // nx].copy()
    n = len(idxs)
    rad = opts.escape_radius

    # seeding, same policy as classify: attracting fixed point if any,
    # else smallest |x| fixed point, else the origin
    a = 1.0 + R
    b1 = 1.0 + B
    with np.errstate(invalid="ignore", divide="ignore"):
        if a != 0.0:
            disc = b1 * b1 + 4.0 * a * M
            hasfp = disc >= 0.0
            sq = np.sqrt(np.where(hasfp, np.maximum(disc, 0.0), 0.0))
            x1 = (-b1 + sq) / (2.0 * a)
            x2 = (-b1 - sq) / (2.0 * a)
        else:
            hasfp = b1 != 0.0
            x1 = x2 = np.where(hasfp, M / np.where(hasfp, b1, 1.0), 0.0)
        att1 = _largest_modulus(-(2.0 + R) * x1, B + R * x1) < 1.0
        att2 = _largest_modulus(-(2.0 + R) * x2, B + R * x2) < 1.0
    xs = np.where(att1, x1, np.where(att2, x2, np.where(np.abs(x1) <= np.abs(x2), x1, x2)))
    dx, dy = opts.seed_offset
    x = np.where(hasfp, xs + dx, 0.0)
    y = np.where(hasfp, xs + dy, 0.0)

    verdict = np.full(n, -1, dtype=np.int8)  # -1 pending, 0 divergent
    escape_step = np.zeros(n, dtype=np.int64)
    period = np.zeros(n, dtype=np.int32)
    l1 = np.full(n, np.nan)
    l2 = np.full(n, np.nan)
    rotation: dict[int, float] = {}  # block-local cell index -> rotation number
    evid: dict[int, dict] = {}

    live = np.arange(n)
    step_no = 0

    def _cull(bad):
        # bad is a mask over live; record divergence and compact
        nonlocal live, x, y, M, B
        if bad.any():
            verdict[live[bad]] = 0
            escape_step[live[bad]] = step_no
            keep = ~bad
            live, x, y, M, B = live[keep], x[keep], y[keep], M[keep], B[keep]
        return live.size > 0

    with np.errstate(all="ignore"):
        for _ in range(opts.burn_in):
            step_no += 1
            x, y = y, M - B * x - y * y - R * x * y
            bad = ~(np.isfinite(x) & np.isfinite(y)) | (np.abs(x) > rad) | (np.abs(y) > rad)
            if bad.any() and not _cull(bad):
                break

        tail_len = 4 * opts.max_period
        tails = np.empty((live.size, tail_len, 2)) if live.size else None
        if live.size:
            for k in range(tail_len):
                step_no += 1
                x, y = y, M - B * x - y * y - R * x * y
                bad = ~(np.isfinite(x) & np.isfinite(y)) | (np.abs(x) > rad) | (np.abs(y) > rad)
                if bad.any():
                    tails[:, k, 0] = x
                    tails[:, k, 1] = y
                    tails = tails[~bad]
                    if not _cull(bad):
                        break
                else:
                    tails[:, k, 0] = x
                    tails[:, k, 1] = y

    if live.size:
        # vectorized period scan, then scalar multiplier verification per hit
        undet = np.ones(live.size, bool)
        for k in range(1, opts.max_period + 1):
            if not undet.any():
                break
            sel = np.flatnonzero(undet)
            d = np.abs(tails[sel, k:, :] - tails[sel, :-k, :]).reshape(len(sel), -1).max(axis=1)
            hit = d < opts.period_tol
            if hit.any():
                rows = sel[hit]
                period[live[rows]] = k
                undet[rows] = False

        lyap_rows = []
        for row in range(live.size):
            k = period[live[row]]
            if k == 0:
                lyap_rows.append(row)
                continue
            p_cell = GhmParams(float(M[row]), float(B[row]), R)
            ok, lams = _verify_cycle(p_cell, tails[row, -k:])
            if ok and lams[0] < -opts.eps_lyap:
                verdict[live[row]] = 1  # sink
                l1[live[row]], l2[live[row]] = lams
            else:
                period[live[row]] = 0
                lyap_rows.append(row)

        if lyap_rows:
            rows = np.array(lyap_rows, dtype=int)
            lx, ly = x[rows].copy(), y[rows].copy()
            lM, lB = M[rows].copy(), B[rows].copy()
            gids = live[rows]
            v1 = np.full(rows.size, _INV_SQRT2)
            v2 = np.full(rows.size, _INV_SQRT2)
            slog = np.zeros(rows.size)
            sdet = np.zeros(rows.size)
            alive = np.ones(rows.size, bool)
            # escape is checked every 16 steps: dead cells run on as zeros and
            # their accumulators are reset, so nan never reaches a live sum
            with np.errstate(all="ignore"):
                s = 0
                while s < opts.span and alive.any():
                    m = min(16, opts.span - s)
                    for _ in range(m):
                        w2 = (-lB - R * ly) * v1 + (-2.0 * ly - R * lx) * v2
                        nrm = np.hypot(v2, w2)
                        z = nrm == 0.0
                        if z.any():
                            slog[z] = -np.inf  # sticky: later finite adds keep it
                            nrm = np.where(z, 1.0, nrm)
                        slog += np.log(nrm)
                        v1, v2 = v2 / nrm, w2 / nrm
                        if z.any():
                            v1[z] = 1.0
                            v2[z] = 0.0
                        sdet += np.log(np.abs(lB + R * ly))
                        lx, ly = ly, lM - lB * lx - ly * ly - R * lx * ly
                    s += m
                    bad = alive & ~(
                        np.isfinite(lx) & np.isfinite(ly) & (np.abs(lx) <= rad) & (np.abs(ly) <= rad)
                    )
                    if bad.any():
                        verdict[gids[bad]] = 0
                        escape_step[gids[bad]] = step_no + s
                        alive &= ~bad
                        lx[bad] = 0.0
                        ly[bad] = 0.0
                        v1[bad] = _INV_SQRT2
                        v2[bad] = _INV_SQRT2
                        slog[bad] = 0.0
                        sdet[bad] = 0.0
            g1 = slog / opts.span
            gs = sdet / opts.span
            g1 = np.maximum(g1, gs - g1)
            g2 = gs - g1
            l1[gids[alive]] = g1[alive]
            l2[gids[alive]] = g2[alive]

            eps = opts.eps_lyap
            cha = alive & (g1 > eps)
            verdict[gids[cha]] = 2  # chaotic
            und = alive & (g1 < -eps)
            verdict[gids[und]] = 4  # undecided (contracting, long period)
            cand = alive & ~cha & ~und
            circ_rows = np.flatnonzero(cand & (g2 < -eps))
            und2 = np.flatnonzero(cand & ~(g2 < -eps))
            verdict[gids[und2]] = 4

            # circle-candidate tails are recorded in small chunks: 3*circle_points
            # doubles per cell would be ~0.4 MB each, and a block can hold 2048
            for c0 in range(0, circ_rows.size, 64):
                chunk = circ_rows[c0 : c0 + 64]
                m_tail = 3 * opts.circle_points
                ct = np.empty((chunk.size, m_tail, 2))
                cx, cy = lx[chunk].copy(), ly[chunk].copy()
                cM, cB = lM[chunk].copy(), lB[chunk].copy()
                calive = np.ones(chunk.size, bool)
                with np.errstate(all="ignore"):
                    for s in range(m_tail):
                        cx, cy = cy, cM - cB * cx - cy * cy - R * cx * cy
                        bad = calive & (~(np.isfinite(cx) & np.isfinite(cy)) | (np.abs(cx) > rad) | (np.abs(cy) > rad))
                        if bad.any():
                            verdict[gids[chunk[bad]]] = 0
                            escape_step[gids[chunk[bad]]] = step_no + opts.span + s + 1
                            calive &= ~bad
                            cx[~calive] = 0.0
                            cy[~calive] = 0.0
                        ct[:, s, 0] = cx
                        ct[:, s, 1] = cy
                for j in np.flatnonzero(calive):
                    gid = gids[chunk[j]]
                    p_cell = GhmParams(float(cM[j]), float(cB[j]), R)
                    got = None
                    fails = {}
                    for q in (1, 2, 3):
                        sub = ct[j, ::q] if q > 1 else ct[j]
                        sub = sub[-opts.circle_points :]
                        if len(sub) < 2000:
                            continue
                        try:
                            rep = fit_invariant_circle(sub, p=p_cell, map_power=q,
                                                       bins=opts.circle_bins,
                                                       gap_limit_deg=opts.gap_limit_deg)
                        except NotACircleError as err:
                            fails[q] = str(err)
                            continue
                        if rep.invariance_residual < 1e-3 * rep.mean_radius:
                            got = (q, rep)
                            break
                        fails[q] = f"residual {rep.invariance_residual:.3e}"
                    if got is not None:
                        verdict[gid] = 3  # circle
                        rotation[gid] = got[1].rotation_number
                        evid[gid] = {
                            "invariance_residual": got[1].invariance_residual,
                            "mean_radius": got[1].mean_radius,
                            "map_power": got[0],
                        }
                    else:
                        verdict[gid] = 4
                        evid[gid] = {"circle_fit": fails}

    out = []
    names = {0: "divergent", 1: "sink", 2: "chaotic", 3: "circle", 4: "undecided"}
    for j in range(n):
        v = int(verdict[j])
        if v == -1:  # unreachable: every cell is resolved by one branch above
            v = 4
        name = names[v]
        lam = None if (name == "divergent" or math.isnan(l1[j])) else (float(l1[j]), float(l2[j]))
        ev = evid.get(j, {})
        if name == "divergent":
            ev = {"escape_step": int(escape_step[j])}
        out.append(
            AttractorClass(
                name,
                period=int(period[j]) if name == "sink" else None,
                lyapunov=lam,
                rotation_number=rotation.get(j),
                evidence=ev,
            )
        )
    return out


def sweep(
    m_min: float,
    m_max: float,
    b_min: float,
    b_max: float,
    nx: int,
    ny: int,
    R: float,
    opts: ClassifyOptions | None = None,
    threads: int = 1,
) -> SweepGrid:
    """Classify every cell of the inclusive (M, B) grid; row-major by B then M.

    Cells are processed in fixed index blocks; the result is byte-for-byte
    independent of the thread count.
    """
    if nx < 2 or ny < 2:
        raise ValueError("grid must be at least 2x2")
    opts = opts or ClassifyOptions()
    Ms = np.linspace(m_min, m_max, nx)
    Bs = np.linspace(b_min, b_max, ny)
    total = nx * ny
    blocks = [(i, min(i + _BLOCK, total)) for i in range(0, total, _BLOCK)]

    def work(blk):
        return _sweep_block(Ms, Bs, nx, R, blk[0], blk[1], opts)

    if threads <= 1 or len(blocks) == 1:
        parts = [work(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, blocks))
    cells = tuple(c for part in parts for c in part)
    return SweepGrid(m_min, m_max, b_min, b_max, nx, ny, R, cells)
