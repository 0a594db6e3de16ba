"""Return-map laboratory for a 3D diffeomorphism with a homoclinic tangency.

The model is split into a linear local map T0 (saddle with stable plane
multipliers lam*exp(+-i*phi) and unstable multiplier gamma) and an
affine-plus-quadratic global map T1 carrying a quadratic tangency of the
invariant manifolds. The first-return map T_n = T1 o T0^n acts on a thin
slice sigma_n; rescaling its y-component produces, for large n, the planar
quadratic map x' = y, y' = M - B x - y^2 - R x y. This module constructs
T_n numerically, evaluates the leading-order parameter asymptotics
(M, B, R as functions of mu, phi, n), inverts them over a parameter window,
and fits the quadratic map to actual return-map data so the two can be
compared.

Gauge conventions: the leading-order formulas treat the model's coefficient
amplitude, rotation phase, and tangency offset mu0_n as 1, 0, 0 (the usual
normal-form normalizations). mount_window realizes a requested (M, B) window
inside the concrete model by solving the exact amplitude/phase/offset
relations, so fitted parameters are comparable with the leading-order ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .attractor_classifier import AttractorClass, ClassifyOptions, classify
from .ghm_core import GhmParams

EXCLUDED_RADIUS = 0.25  # parameter-plane ball around the origin where B ~ 0
SIGMA_HALF_HEIGHT = 0.25  # half-height h of the exit box in raw y
U_ESCAPE = 50.0  # rescaled-coordinate escape bound for fit orbits


class SigmaDomainError(ValueError):
    """Input state is outside the sigma_n slice of the return map."""


class FitError(RuntimeError):
    """Return-map data cannot support the quadratic fit."""


def _vec2(v, name):
    a = np.asarray(v, dtype=float)
    if a.shape != (2,) or not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be a finite 2-vector")
    return a


def rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class SaddleSpectrum:
    """Multiplier data of the (2,1) saddle: lam*e^{+-i*phi0} stable, gamma unstable."""

    lam: float
    phi0: float
    gamma: float

    def __post_init__(self):
        if not (0.0 < self.lam < 1.0 < self.gamma):
            raise ValueError("need 0 < lam < 1 < gamma")
        if not (self.lam * self.lam * self.gamma < 1.0 < self.lam * self.gamma):
            raise ValueError(
                "saddle spectrum requires lambda^2*gamma < 1 < lambda*gamma "
                f"(got lambda^2*gamma={self.lam**2 * self.gamma:.6g}, "
                f"lambda*gamma={self.lam * self.gamma:.6g})"
            )
        if not (0.0 < self.phi0 < math.pi):
            raise ValueError("phi0 must lie strictly inside (0, pi)")


@dataclass(frozen=True, eq=False)
class GlobalMapCoeffs:
    """Affine-plus-quadratic global map along the homoclinic excursion.

    x' = x_plus + A x + b (y - y_minus);  y' = mu + c.x + d (y - y_minus)^2.
    (0, 0, y_minus) is the tangency preimage; at mu = 0 it lands on the
    stable plane at (x_plus, 0).
    """

    x_plus: np.ndarray
    y_minus: float
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float
    mu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x_plus", _vec2(self.x_plus, "x_plus"))
        object.__setattr__(self, "b", _vec2(self.b, "b"))
        object.__setattr__(self, "c", _vec2(self.c, "c"))
        a = np.asarray(self.A, dtype=float)
        if a.shape != (2, 2) or not np.all(np.isfinite(a)):
            raise ValueError("A must be a finite 2x2 matrix")
        object.__setattr__(self, "A", a)
        if self.d == 0.0 or not math.isfinite(self.d):
            raise ValueError("d must be nonzero (quadratic tangency)")
        if not (math.isfinite(self.y_minus) and math.isfinite(self.mu)):
            raise ValueError("y_minus and mu must be finite")


DEFAULT_SPECTRUM = SaddleSpectrum(lam=0.7, phi0=math.pi / 3, gamma=1.8)

DEFAULT_COEFFS = GlobalMapCoeffs(
    x_plus=(0.3, 0.0),
    y_minus=0.5,
    A=((0.9, 0.1), (-0.1, 0.8)),
    b=(0.2, 0.1),
    c=(1.0, 0.3),
    d=1.0,
)


@dataclass(frozen=True)
class ReturnMapConfig:
    """One first-return map: spectrum + global coefficients + (n, phi).

    phi is the perturbed rotation angle of the local map (the unfolding
    coordinate); coeffs.mu is the splitting parameter. h is the half-height
    of the exit box, fixing the sigma_n slice.
    """

    spectrum: SaddleSpectrum
    coeffs: GlobalMapCoeffs
    n: int
    phi: float
    h: float = SIGMA_HALF_HEIGHT

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("return index n must be >= 1")
        if not (0.0 < self.phi < math.pi):
            raise ValueError("phi must lie strictly inside (0, pi)")
        if not (0.0 < self.h):
            raise ValueError("box half-height h must be positive")

    @property
    def sigma_center(self) -> float:
        return self.spectrum.gamma ** (-self.n) * self.coeffs.y_minus

    @property
    def sigma_halfwidth(self) -> float:
        return self.spectrum.gamma ** (-self.n) * self.h


@dataclass(frozen=True)
class RescaledParams:
    """(M, B, R) of the rescaled return map, asymptotic or fitted."""

    M: float
    B: float
    R: float
    provenance: str
    residual: float | None = None

    def __post_init__(self):
        if self.provenance not in ("asymptotic", "fitted"):
            raise ValueError("provenance must be 'asymptotic' or 'fitted'")
        if not all(math.isfinite(v) for v in (self.M, self.B, self.R)):
            raise ValueError("rescaled parameters must be finite")

    def as_ghm(self) -> GhmParams:
        return GhmParams(self.M, self.B, self.R)


# ---------------------------------------------------------------------------
# the model maps


def local_map(spectrum: SaddleSpectrum, phi: float):
    """Linear saddle step: returns f(x1, x2, y) -> (x1', x2', y')."""
    m = spectrum.lam * rot(phi)
    g = spectrum.gamma

    def f(x1, x2, y):
        return (m[0, 0] * x1 + m[0, 1] * x2, m[1, 0] * x1 + m[1, 1] * x2, g * y)

    return f


def global_map(coeffs: GlobalMapCoeffs):
    """Homoclinic excursion step: returns f(x1, x2, y) -> (x1', x2', y')."""
    cf = coeffs

    def f(x1, x2, y):
        w = y - cf.y_minus
        xp1 = cf.x_plus[0] + cf.A[0, 0] * x1 + cf.A[0, 1] * x2 + cf.b[0] * w
        xp2 = cf.x_plus[1] + cf.A[1, 0] * x1 + cf.A[1, 1] * x2 + cf.b[1] * w
        yp = cf.mu + cf.c[0] * x1 + cf.c[1] * x2 + cf.d * w * w
        return (xp1, xp2, yp)

    return f


def tangency_jacobian(coeffs: GlobalMapCoeffs) -> float:
    """det of the 3x3 differential of the global map at the tangency preimage.

    The y-row degenerates there (d(y')/dy = 0), so the determinant reduces to
    the bordered form det [[A, b], [c, 0]]. Its sign is the J1 that fixes the
    sign of the rescaled R.
    """
    m = np.zeros((3, 3))
    m[:2, :2] = coeffs.A
    m[:2, 2] = coeffs.b
    m[2, :2] = coeffs.c
    return float(np.linalg.det(m))


class ReturnMap:
    """T_n = T1 o T0^n restricted to the sigma_n slice.

    sigma_n membership is checked on the y-coordinate only:
    |y - gamma^-n y_minus| <= gamma^-n h. T0^n is applied in closed form
    (lam^n Rot(n phi), gamma^n); the composition is exact, not n substeps.
    """

    def __init__(self, config: ReturnMapConfig):
        self.config = config
        sp, cf = config.spectrum, config.coeffs
        self.n = config.n
        self._xfm = sp.lam**config.n * rot(config.n * config.phi)
        self._gn = sp.gamma**config.n
        self.sigma_center = config.sigma_center
        self.sigma_halfwidth = config.sigma_halfwidth
        self._cf = cf

    def in_sigma(self, y: float) -> bool:
        return abs(y - self.sigma_center) <= self.sigma_halfwidth

    def __call__(self, x1, x2, y):
        if not self.in_sigma(y):
            raise SigmaDomainError(
                f"y={y!r} outside sigma_{self.n} "
                f"(center {self.sigma_center!r}, half-width {self.sigma_halfwidth!r})"
            )
        cf = self._cf
        u1 = self._xfm[0, 0] * x1 + self._xfm[0, 1] * x2
        u2 = self._xfm[1, 0] * x1 + self._xfm[1, 1] * x2
        w = self._gn * y - cf.y_minus
        xp1 = cf.x_plus[0] + cf.A[0, 0] * u1 + cf.A[0, 1] * u2 + cf.b[0] * w
        xp2 = cf.x_plus[1] + cf.A[1, 0] * u1 + cf.A[1, 1] * u2 + cf.b[1] * w
        yp = cf.mu + cf.c[0] * u1 + cf.c[1] * u2 + cf.d * w * w
        return (xp1, xp2, yp)


def return_map(config: ReturnMapConfig) -> ReturnMap:
    return ReturnMap(config)


# ---------------------------------------------------------------------------
# window asymptotics


def _cb_phase(coeffs: GlobalMapCoeffs) -> tuple[float, float]:
    # c^T Rot(t) b = K cos(t - chi)
    dot = float(coeffs.c @ coeffs.b)
    cross = coeffs.c[1] * coeffs.b[0] - coeffs.c[0] * coeffs.b[1]
    return math.hypot(dot, cross), math.atan2(cross, dot)


def window_base_mu(spectrum: SaddleSpectrum, coeffs: GlobalMapCoeffs, n: int, phi: float) -> float:
    """Splitting value mu0_n at which the n-th return window is centered.

    mu0_n = gamma^-n y_minus - lam^n c.Rot(n phi).Xc with Xc the fixed point
    of the x-recursion, Xc = (I - lam^n A Rot(n phi))^-1 x_plus.
    """
    lamn = spectrum.lam**n
    rn = rot(n * phi)
    xc = np.linalg.solve(np.eye(2) - lamn * (coeffs.A @ rn), coeffs.x_plus)
    return spectrum.gamma ** (-n) * coeffs.y_minus - lamn * float(coeffs.c @ (rn @ xc))


def asymptotic_params(
    spectrum: SaddleSpectrum,
    mu: float,
    phi: float,
    n: int,
    j1: float,
    excluded_radius: float = EXCLUDED_RADIUS,
) -> RescaledParams:
    """Leading-order rescaled parameters of the n-th return window.

    M = gamma^2n mu, B = (lam gamma)^n cos(n phi), R = 2 j1 (lam^2 gamma)^n / B.
    All suppressed correction terms are dropped. Rejected when |B| falls
    inside the excluded ball where the R formula degenerates.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    g, lg, l2g = spectrum.gamma, spectrum.lam * spectrum.gamma, spectrum.lam**2 * spectrum.gamma
    M = g ** (2 * n) * mu
    B = lg**n * math.cos(n * phi)
    if abs(B) < excluded_radius:
        raise ValueError(
            f"|B|={abs(B):.6g} inside the excluded ball (radius {excluded_radius:g}); "
            "the R asymptotics degenerate near B=0"
        )
    R = 2.0 * j1 * l2g**n / B
    return RescaledParams(M, B, R, "asymptotic")


def window_invert(
    spectrum: SaddleSpectrum,
    n: int,
    target: tuple[float, float],
    excluded_radius: float = EXCLUDED_RADIUS,
) -> tuple[float, float]:
    """Leading-order inverse of the window map: (M, B) -> (mu, phi).

    mu = M gamma^-2n; phi solves B = (lam gamma)^n cos(n phi) on the branch
    with n phi nearest pi/2. Valid on (-10,10)^2 minus the excluded ball.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    M, B = float(target[0]), float(target[1])
    if not (abs(M) < 10.0 and abs(B) < 10.0):
        raise ValueError("target must lie in (-10, 10)^2")
    if math.hypot(M, B) < excluded_radius:
        raise ValueError(f"target inside the excluded ball of radius {excluded_radius:g}")
    v = B * (spectrum.lam * spectrum.gamma) ** (-n)
    if abs(v) > 1.0:
        raise ValueError(
            f"|B|={abs(B):.6g} exceeds (lam*gamma)^n={(spectrum.lam * spectrum.gamma) ** n:.6g}; "
            f"unreachable at n={n}"
        )
    # acos lands in [0, pi], which is exactly the branch nearest pi/2
    phi = math.acos(v) / n
    mu = M * spectrum.gamma ** (-2 * n)
    return (mu, phi)


def mount_window(
    spectrum: SaddleSpectrum,
    coeffs: GlobalMapCoeffs,
    n: int,
    target: tuple[float, float],
    h: float = SIGMA_HALF_HEIGHT,
    excluded_radius: float = EXCLUDED_RADIUS,
) -> ReturnMapConfig:
    """Realize a window target (M, B) inside the concrete model.

    window_invert solves the normalized leading-order relations; this mount
    solves the same relations with the model's actual coefficient amplitude,
    rotation phase, and window offset mu0_n, so that the fitted parameters of
    the mounted return map approach the requested target. The normalizations
    the asymptotic formulas assume (amplitude 1, phase 0, offset 0, positive
    orientation) are thereby realized rather than ignored.
    """
    window_invert(spectrum, n, target, excluded_radius)  # shared validation
    M_t, B_t = float(target[0]), float(target[1])
    K, chi = _cb_phase(coeffs)
    lg = spectrum.lam * spectrum.gamma
    v = -B_t / (K * lg**n)
    if abs(v) > 1.0:
        raise ValueError(
            f"|B|={abs(B_t):.6g} exceeds the model amplitude K*(lam*gamma)^n="
            f"{K * lg**n:.6g}; unreachable at n={n}"
        )
    a = math.acos(v)
    cands = [chi + s * a + 2.0 * math.pi * k for s in (1.0, -1.0) for k in (-1, 0, 1)]
    cands = [t for t in cands if 0.0 < t / n < math.pi]
    if not cands:
        raise ValueError(f"no admissible rotation angle for target B={B_t:g} at n={n}")
    theta = min(cands, key=lambda t: abs(t - math.pi / 2.0))
    phi = theta / n
    mu0 = window_base_mu(spectrum, coeffs, n, phi)
    mu = mu0 - M_t / (coeffs.d * spectrum.gamma ** (2 * n))
    return ReturnMapConfig(spectrum, replace(coeffs, mu=mu), n, phi, h)


# ---------------------------------------------------------------------------
# fitting the rescaled map


def _fit_triples(u0: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> tuple[float, float, float, float]:
    """Quadratic regression u2 = f(u0, u1) reduced to the normalized gauge.

    Fits the full quadratic f = a0 + a1 u0 + a2 u1 + q u1^2 + r u0 u1 + p u0^2,
    then applies the affine change u = s (y - y_c) with s = -q and
    y_c = -a2 / (2q + r), which makes the quadratic coefficient -1 and kills
    the linear-in-current term. The u0^2 coefficient has no slot in the target
    family; it acts on the map's Jacobian exactly like a cross term of twice
    its size at equal arguments, so the reported R is r/q + 2 p/q. On exact
    planar-map data (r, p pure) this reduces to the literal coefficients.
    """
    if len(u0) < 50:
        raise FitError(f"need at least 50 sample triples, got {len(u0)}")
    # standardized chart for conditioning; the normalized gauge below is
    # invariant under affine reparametrization, so the chart drops out
    pool = np.concatenate([u0, u1, u2])
    m0, s0 = float(pool.mean()), float(pool.std())
    if s0 == 0.0:
        raise FitError("sample triples are constant; no excitation to fit")
    z0, z1, z2 = (u0 - m0) / s0, (u1 - m0) / s0, (u2 - m0) / s0
    X = np.column_stack([np.ones_like(z0), z0, z1, z1 * z1, z0 * z1, z0 * z0])
    coef, _, rank, _ = np.linalg.lstsq(X, z2, rcond=None)
    if rank < 6:
        raise FitError(f"fit matrix rank-deficient (rank {rank} < 6)")
    a0, a1, a2, q, r, p = (float(v) for v in coef)
    if abs(q) < 1e-10:
        raise FitError("no quadratic term in the fitted return relation")
    if abs(2.0 * q + r) < 1e-10:
        raise FitError("degenerate normalization: 2q + r ~ 0")
    s = -q
    y_c = -a2 / (2.0 * q + r)
    M = s * (a0 + (a1 + a2) * y_c + (q + r + p) * y_c * y_c - y_c)
    B = -(a1 + (r + 2.0 * p) * y_c)
    R = r / q + 2.0 * p / q
    rms = float(np.sqrt(np.mean((X @ coef - z2) ** 2)))
    return M, B, R, abs(s) * rms  # residual in the normalized gauge


def fit_ghm_series(series) -> RescaledParams:
    """Fit the planar quadratic map to a scalar series by delay embedding.

    The series is read as consecutive iterates of the rescaled coordinate;
    triples (u_k, u_k+1, u_k+2) feed the normalized quadratic regression.
    Exact planar-map data is recovered to roundoff with zero residual.
    """
    u = np.asarray(series, dtype=float).ravel()
    if len(u) < 52:
        raise ValueError("series too short: need at least 52 consecutive values")
    if not np.all(np.isfinite(u)):
        raise ValueError("series contains non-finite values")
    M, B, R, res = _fit_triples(u[:-2], u[1:-1], u[2:])
    return RescaledParams(M, B, R, "fitted", residual=res)


def _run_return_orbits(config: ReturnMapConfig, X0: np.ndarray, W0: np.ndarray, returns: int):
    """Iterate T_n from a batch of sigma_n seeds in (x, w) coordinates.

    w = gamma^n y - y_minus is the exit-box coordinate; |w| <= h is the
    sigma_n condition. Returns the u-history (u = -d gamma^n w) and the
    number of valid returns per orbit (first exit from sigma_n or from the
    rescaled window |u| <= U_ESCAPE truncates the orbit).
    """
    sp, cf, n = config.spectrum, config.coeffs, config.n
    lamn, gn = sp.lam**n, sp.gamma**n
    rn = rot(n * config.phi)
    E = lamn * (cf.A @ rn)  # x-recursion matrix
    crow = cf.c @ rn
    scale = -cf.d * gn

    m = len(W0)
    X = X0.copy()
    w = W0.copy()
    u_hist = np.full((m, returns + 1), np.nan)
    u_hist[:, 0] = scale * w
    valid = np.full(m, returns, dtype=int)
    alive = np.ones(m, dtype=bool)
    for k in range(returns):
        if not alive.any():
            break
        wn = gn * cf.mu - cf.y_minus + gn * lamn * (X @ crow) + gn * cf.d * w * w
        Xn = cf.x_plus[None, :] + X @ E.T + w[:, None] * cf.b[None, :]
        X, w = Xn, wn
        u = scale * w
        u_hist[alive, k + 1] = u[alive]
        out = alive & ((np.abs(w) > config.h) | (np.abs(u) > U_ESCAPE) | ~np.isfinite(w))
        if out.any():
            valid[out] = k + 1
            alive &= ~out
        if not alive.all():
            # re-park dead orbits every step: (0,0) is not invariant, and a
            # parked w re-excited through gn*mu - y_minus would overflow w*w
            X[~alive] = 0.0
            w[~alive] = 0.0
    return u_hist, valid


def fit_ghm(
    config: ReturnMapConfig,
    sample_grid=None,
    returns: int = 64,
    discard: int = 4,
) -> RescaledParams:
    """Fit the rescaled planar map to orbits of the actual return map T_n.

    Seeds are placed on the attracting 2D manifold of T_n inside sigma_n:
    by default a 5x41 grid in the rescaled delay pair (u_prev, u_now), with
    the x-component set to the constant-w manifold point
    (I - lam^n A Rot(n phi))^-1 (x_plus + b w_prev). A caller-provided
    sample_grid of raw (x1, x2, y) states inside sigma_n overrides it.
    Each seed is iterated `returns` times; the first `discard` returns are
    dropped (transversal collapse onto the manifold is one factor lam^n per
    return, so a handful suffices; long discards would drain the transient
    excitation the fit needs at sink windows). Orbits leaving sigma_n or the
    rescaled window are truncated at the exit.
    """
    sp, cf, n = config.spectrum, config.coeffs, config.n
    if returns - discard < 10:
        raise ValueError("need at least 10 recorded returns after the discard")
    gn = sp.gamma**n
    lamn = sp.lam**n
    rn = rot(n * config.phi)
    res_m = np.eye(2) - lamn * (cf.A @ rn)

    if sample_grid is None:
        u_prev = np.linspace(-0.5, 1.0, 5)
        u_now = np.linspace(-0.75, 1.25, 41)
        UP, UN = np.meshgrid(u_prev, u_now, indexing="ij")
        up, un = UP.ravel(), UN.ravel()
        w_prev = -up / (cf.d * gn)
        W0 = -un / (cf.d * gn)
        rhs = cf.x_plus[None, :] + w_prev[:, None] * cf.b[None, :]
        X0 = np.linalg.solve(res_m, rhs.T).T
    else:
        g = np.asarray(sample_grid, dtype=float)
        if g.ndim != 2 or g.shape[1] != 3:
            raise ValueError("sample_grid must be an (m, 3) array of (x1, x2, y) states")
        W0 = gn * g[:, 2] - cf.y_minus
        if np.any(np.abs(W0) > config.h):
            raise SigmaDomainError("sample_grid contains states outside the sigma_n slice")
        X0 = g[:, :2].copy()
    if len(W0) < 200:
        raise ValueError("need a seed grid of at least 200 states in sigma_n")

    u_hist, valid = _run_return_orbits(config, X0, W0, returns)

    rows0, rows1, rows2 = [], [], []
    for i in range(len(W0)):
        # valid[i] < returns marks the exit index; the exit value itself
        # already lies outside sigma_n and is excluded
        hi = valid[i] if valid[i] == returns else valid[i] - 1
        if hi - discard >= 2:
            seg = u_hist[i, discard : hi + 1]
            rows0.append(seg[:-2])
            rows1.append(seg[1:-1])
            rows2.append(seg[2:])
    if not rows0:
        raise FitError("every sample orbit left the return window before the discard ended")
    u0 = np.concatenate(rows0)
    u1 = np.concatenate(rows1)
    u2 = np.concatenate(rows2)
    if len(u0) < 200:
        raise FitError(f"only {len(u0)} in-window sample triples; need at least 200")
    M, B, R, res = _fit_triples(u0, u1, u2)
    return RescaledParams(M, B, R, "fitted", residual=res)


def fit_ghm_series_triples(u0, u1, u2) -> RescaledParams:
    """Fit from explicit delay triples (advanced entry point)."""
    M, B, R, res = _fit_triples(
        np.asarray(u0, float), np.asarray(u1, float), np.asarray(u2, float)
    )
    return RescaledParams(M, B, R, "fitted", residual=res)


# ---------------------------------------------------------------------------
# coexistence search

# Committed coexistence model. Relative to DEFAULT_COEFFS: c is flipped so
# J1 = +0.183 > 0 (circle born stable), x_plus is scaled down so the surviving
# phi cluster carries a y_minus of sane size, and y_minus solves
# mu0_10(phi*) = mu0_14(phi*) in closed form at a committed point phi* of the
# default CoexistenceBox scan grid (phi* ~ 1.6825091, B_10 ~ -0.654,
# B_14 ~ 0.977; birth rotation number ~ 0.310, clear of every p/q, q <= 7).
# Without that alignment |M_sink| = O(gamma^20 |mu0_10 - mu0_14|) blows out of
# the stability domain for every phi in the box.
COEX_COEFFS = GlobalMapCoeffs(
    x_plus=(0.06, 0.0),
    y_minus=0.42635210520844996,
    A=((0.9, 0.1), (-0.1, 0.8)),
    b=(0.2, 0.1),
    c=(-1.0, -0.3),
    d=1.0,
)


@dataclass(frozen=True)
class CoexistenceBox:
    """Search region and acceptance filters for coexistence_search."""

    phi_lo: float = 0.05
    phi_hi: float = math.pi - 0.05
    phi_steps: int = 160_000
    b_sink_max: float = 0.9
    b_circle_lo: float = 0.945
    b_circle_hi: float = 1.055
    m_sink_max: float = 0.5
    m_circle_offset: float = 0.03  # past birth; transversal contraction ~ -1e-3
    lphi_band_margin: float = 0.9


@dataclass(frozen=True)
class CoexistenceHit:
    """One parameter with verified coexisting attractors at two return indices."""

    mu: float
    phi: float
    n_sink: int
    n_circle: int
    fit_sink: RescaledParams
    fit_circle: RescaledParams
    verdict_sink: AttractorClass
    verdict_circle: AttractorClass
    sigma_center_sink: float
    sigma_center_circle: float
    evidence: dict = field(default_factory=dict, compare=False)


def _vector_base_mu(spectrum, coeffs, n, phis):
    """window_base_mu over a phi array (closed-form 2x2 resolvent)."""
    lamn = spectrum.lam**n
    th = n * phis
    ct, st = np.cos(th), np.sin(th)
    A = coeffs.A
    # E = lamn * A @ Rot(th), entrywise in phi
    e11 = lamn * (A[0, 0] * ct + A[0, 1] * st)
    e12 = lamn * (-A[0, 0] * st + A[0, 1] * ct)
    e21 = lamn * (A[1, 0] * ct + A[1, 1] * st)
    e22 = lamn * (-A[1, 0] * st + A[1, 1] * ct)
    m11, m12, m21, m22 = 1.0 - e11, -e12, -e21, 1.0 - e22
    det = m11 * m22 - m12 * m21
    x1 = (m22 * coeffs.x_plus[0] - m12 * coeffs.x_plus[1]) / det
    x2 = (-m21 * coeffs.x_plus[0] + m11 * coeffs.x_plus[1]) / det
    c1 = coeffs.c[0] * ct + coeffs.c[1] * st  # c @ Rot(th)
    c2 = -coeffs.c[0] * st + coeffs.c[1] * ct
    return spectrum.gamma ** (-n) * coeffs.y_minus - lamn * (c1 * x1 + c2 * x2)


def _confirm_sink_orbit(config: ReturnMapConfig, u_fp_guess: float = 0.0) -> bool:
    """Direct check: the T_n orbit seeded in sigma_n settles to a fixed return."""
    u_hist, valid = _run_return_orbits(
        config,
        _manifold_seed(config, np.array([u_fp_guess])),
        np.array([-u_fp_guess / (config.coeffs.d * config.spectrum.gamma**config.n)]),
        400,
    )
    if valid[0] < 400:
        return False
    tail = u_hist[0, -20:]
    return bool(np.max(np.abs(np.diff(tail))) < 1e-8)


def _manifold_seed(config: ReturnMapConfig, u_prev: np.ndarray) -> np.ndarray:
    sp, cf, n = config.spectrum, config.coeffs, config.n
    lamn = sp.lam**n
    rn = rot(n * config.phi)
    res_m = np.eye(2) - lamn * (cf.A @ rn)
    w_prev = -u_prev / (cf.d * sp.gamma**n)
    rhs = cf.x_plus[None, :] + w_prev[:, None] * cf.b[None, :]
    return np.linalg.solve(res_m, rhs.T).T


def _confirm_circle_orbit(config: ReturnMapConfig, min_returns: int = 1000) -> bool:
    """Direct check: a T_n orbit stays in sigma_n >= min_returns without locking."""
    u_hist, valid = _run_return_orbits(
        config,
        _manifold_seed(config, np.array([0.0])),
        np.array([0.0]),
        min_returns,
    )
    if valid[0] < min_returns:
        return False
    tail = u_hist[0, -64:]
    return bool(np.max(np.abs(np.diff(tail))) > 1e-6)  # not collapsed to a point


def coexistence_search(
    spectrum: SaddleSpectrum,
    coeffs: GlobalMapCoeffs,
    n_sink: int,
    n_circle: int,
    box: CoexistenceBox | None = None,
    probe_log: list | None = None,
) -> CoexistenceHit | None:
    """Hunt for one (mu, phi) whose return maps at two indices carry a sink
    and an invariant circle simultaneously.

    The scan walks phi in ascending order; for each phi the closed-form window
    coefficients give the two effective (M, B) pairs sharing the single mu.
    mu is pinned by placing the n_circle window just past the circle-birth
    curve; phi survives only if the n_sink window then lands inside the
    stability domain. Survivors are verified by fitting both return maps and
    classifying the fitted planar maps, plus direct orbit checks on T_n.
    The first fully verified probe in scan order wins (deterministic).
    """
    if n_sink == n_circle:
        raise ValueError("n_sink and n_circle must differ")
    if box is None:
        box = CoexistenceBox()
    sp, cf = spectrum, coeffs
    j1 = tangency_jacobian(cf)
    lg, l2g = sp.lam * sp.gamma, sp.lam**2 * sp.gamma
    ns, nc = n_sink, n_circle

    phis = np.linspace(box.phi_lo, box.phi_hi, box.phi_steps)
    dot = float(cf.c @ cf.b)
    cross = cf.c[1] * cf.b[0] - cf.c[0] * cf.b[1]

    def b_eff(n):
        th = n * phis
        return -(lg**n) * (dot * np.cos(th) + cross * np.sin(th))

    B_s, B_c = b_eff(ns), b_eff(nc)
    R_c = np.where(B_c != 0.0, 2.0 * j1 * l2g**nc / np.where(B_c == 0.0, 1.0, B_c), np.inf)

    # circle side: inside the Lphi band (|B-1| strictly within the band the
    # cross term R carves out), born stable only when R > 0
    band = box.lphi_band_margin * np.abs(R_c) / np.abs(1.0 + R_c / 2.0)
    ok = (
        (np.abs(B_s) <= box.b_sink_max)
        & (B_c >= box.b_circle_lo)
        & (B_c <= box.b_circle_hi)
        & (R_c > 0.0)
        & (np.abs(B_c - 1.0) <= band)
    )
    if not ok.any():
        return None

    mu0_s = _vector_base_mu(sp, cf, ns, phis)
    mu0_c = _vector_base_mu(sp, cf, nc, phis)

    # circle-birth curve of the planar family at (B_c, R_c), then offset
    hh = 1.0 + R_c / 2.0
    cw = np.where(ok, (B_c - 1.0) * hh / np.where(R_c == 0.0, 1.0, R_c), 0.0)
    M_lphi = (cw * cw - cw * (2.0 + R_c)) / (hh * hh)
    M_c = M_lphi + box.m_circle_offset
    mu_cand = mu0_c - M_c / (cf.d * sp.gamma ** (2 * nc))
    M_s = -cf.d * sp.gamma ** (2 * ns) * (mu_cand - mu0_s)
    ok &= np.abs(M_s) <= box.m_sink_max

    from .bifurcation_atlas import in_stability_domain  # local import, no cycle

    R_s = 2.0 * j1 * l2g**ns / np.where(B_s == 0.0, np.inf, B_s)
    # weak-NS circles: transversal contraction is ~ -1e-3 per iterate and the
    # curve is visibly deformed, so the verdicts get a slow burn and fine bins
    vopts = ClassifyOptions(burn_in=60_000, circle_points=16384, circle_bins=512)
    idxs = np.flatnonzero(ok)
    for i in idxs:
        phi = float(phis[i])
        rec = {
            "phi": phi,
            "mu": float(mu_cand[i]),
            "M_sink": float(M_s[i]),
            "B_sink": float(B_s[i]),
            "M_circle": float(M_c[i]),
            "B_circle": float(B_c[i]),
            "R_circle": float(R_c[i]),
        }
        try:
            if not in_stability_domain(GhmParams(float(M_s[i]), float(B_s[i]), float(R_s[i]))):
                rec["reject"] = "sink window outside stability domain"
                continue
            # Newton on mu pins the FITTED circle-window M at birth + offset,
            # cancelling the fit-gauge bias in M; dM_fit/dmu = -d*gamma^(2 nc)
            # exactly, since mu enters the second-return value additively
            mu_i = float(mu_cand[i])
            fit_c = None
            dM = math.inf
            for _ in range(4):
                cfg_c = ReturnMapConfig(sp, replace(cf, mu=mu_i), nc, phi)
                fit_c = fit_ghm(cfg_c)
                if not (math.isfinite(fit_c.R) and fit_c.R > 0.0):
                    break
                xb = (1.0 - fit_c.B) / fit_c.R
                m_birth = (1.0 + fit_c.R) * xb * xb + (1.0 + fit_c.B) * xb
                dM = (m_birth + box.m_circle_offset) - fit_c.M
                if abs(dM) < 1e-3:
                    break
                mu_i -= dM / (cf.d * sp.gamma ** (2 * nc))
            rec["mu"] = mu_i
            if not (math.isfinite(dM) and abs(dM) < 1e-3 and fit_c.R > 0.0):
                rec["reject"] = "circle window could not be pinned past birth"
                continue
            cfg_s = ReturnMapConfig(sp, replace(cf, mu=mu_i), ns, phi)
            fit_s = fit_ghm(cfg_s)
            verdict_s = classify(fit_s.as_ghm(), vopts)
            verdict_c = classify(fit_c.as_ghm(), vopts)
            rec["verdict_sink"] = verdict_s.verdict
            rec["verdict_circle"] = verdict_c.verdict
            if verdict_s.verdict != "sink" or verdict_c.verdict != "circle":
                rec["reject"] = "verdict mismatch"
                continue
            if not _confirm_sink_orbit(cfg_s):
                rec["reject"] = "direct sink orbit check failed"
                continue
            if not _confirm_circle_orbit(cfg_c):
                rec["reject"] = "direct circle orbit check failed"
                continue
        except (FitError, SigmaDomainError, ValueError) as err:
            rec["reject"] = f"{type(err).__name__}: {err}"
            continue
        finally:
            if probe_log is not None:
                probe_log.append(rec)
        return CoexistenceHit(
            mu=mu_i,
            phi=phi,
            n_sink=ns,
            n_circle=nc,
            fit_sink=fit_s,
            fit_circle=fit_c,
            verdict_sink=verdict_s,
            verdict_circle=verdict_c,
            sigma_center_sink=cfg_s.sigma_center,
            sigma_center_circle=cfg_c.sigma_center,
            evidence=rec,
        )
    return None
