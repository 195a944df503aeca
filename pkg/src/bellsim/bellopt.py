"""CHSH observables, Bell-operator evaluation and maximization.

Local observables live in the x-z plane of the Bloch sphere,
``O(a) = cos(2a) sigma_z + sin(2a) sigma_x``.  The restricted family fixes
``A0 = sigma_z`` and parameterizes the rest by two angles::

    A0 = O(0), A1 = O(theta), B0 = O(phi), B1 = O(phi - theta)

Two independent routes to the optimum are provided: a numerical search
(coarse grid + Nelder-Mead) and the closed-form Horodecki bound from the
singular values of the Pauli correlation matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .qcore import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    as_state,
    colored_state,
    mixed_noise_state,
    tensor,
    werner_state,
)

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)

HALF_PI = 0.5 * math.pi


def wrap_angle(a: float) -> float:
    """Map an analyzer angle onto its canonical range [-pi/2, pi/2)."""
    return (a + HALF_PI) % math.pi - HALF_PI


@dataclass(frozen=True)
class ChshSettings:
    """Four analyzer angles (radians); ``theta``/``phi`` are set in restricted mode."""

    a0: float
    a1: float
    b0: float
    b1: float
    theta: float | None = None
    phi: float | None = None

    @classmethod
    def restricted(cls, theta: float, phi: float) -> "ChshSettings":
        theta, phi = float(theta), float(phi)
        return cls(0.0, theta, phi, phi - theta, theta, phi)

    @classmethod
    def general(cls, a0: float, a1: float, b0: float, b1: float) -> "ChshSettings":
        return cls(float(a0), float(a1), float(b0), float(b1))

    @property
    def is_restricted(self) -> bool:
        return self.theta is not None

    @property
    def angles(self) -> tuple[float, float, float, float]:
        return (self.a0, self.a1, self.b0, self.b1)

    def normalized(self) -> "ChshSettings":
        if self.is_restricted:
            return ChshSettings.restricted(wrap_angle(self.theta), wrap_angle(self.phi))
        return ChshSettings.general(*(wrap_angle(a) for a in self.angles))

    def pairs(self):
        """(a, b, sign) for the four CHSH terms."""
        return (
            (self.a0, self.b0, 1.0),
            (self.a0, self.b1, 1.0),
            (self.a1, self.b0, 1.0),
            (self.a1, self.b1, -1.0),
        )


@dataclass(frozen=True)
class BellResult:
    value: float
    settings: ChshSettings
    violation: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "violation", abs(self.value) > CLASSICAL_BOUND)

    @property
    def abs_value(self) -> float:
        return abs(self.value)


def observable(angle: float) -> np.ndarray:
    """cos(2a) sigma_z + sin(2a) sigma_x."""
    return math.cos(2 * angle) * SIGMA_Z + math.sin(2 * angle) * SIGMA_X


def correlation(rho, a: float, b: float) -> float:
    """<O(a) (x) O(b)> for the state ``rho``."""
    rho = as_state(rho)
    return rho.expect(tensor(observable(a), observable(b)))


def bell_value(rho, settings: ChshSettings) -> BellResult:
    """CHSH value <A0B0> + <A0B1> + <A1B0> - <A1B1> by direct traces."""
    rho = as_state(rho)
    value = sum(sign * correlation(rho, a, b) for a, b, sign in settings.pairs())
    return BellResult(float(value), settings)


def beta_analytic(p: float, theta, phi):
    """Closed-form CHSH value of the colored-noise state in the restricted family.

    Broadcasts over array-valued ``p``, ``theta`` and ``phi``.
    """
    p = np.asarray(p, dtype=float)
    if not np.all((p >= 0.0) & (p <= 1.0)):
        raise ValueError(f"p must lie in [0, 1], got {float(p.flat[np.argmin((p >= 0) & (p <= 1))])!r}")
    c2t, s2t = np.cos(2 * np.asarray(theta)), np.sin(2 * np.asarray(theta))
    c2f, s2f = np.cos(2 * np.asarray(phi)), np.sin(2 * np.asarray(phi))
    out = c2f * ((1 + p) * s2t**2 + 2 * c2t) + s2f * (1 + p) * s2t * (1 - c2t)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# correlation matrix / Horodecki oracle


def correlation_matrix(rho) -> np.ndarray:
    """T_ij = tr(rho sigma_i (x) sigma_j), i, j over (x, y, z)."""
    rho = as_state(rho)
    paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)
    return np.array([[rho.expect(tensor(si, sj)) for sj in paulis] for si in paulis])


def _top_two_singular(t: np.ndarray) -> tuple[float, float]:
    s = np.linalg.svd(np.asarray(t, dtype=float), compute_uv=False)
    return float(s[0]), float(s[1])


def horodecki_bound_from_t(t: np.ndarray) -> float:
    t1, t2 = _top_two_singular(t)
    return 2.0 * math.sqrt(t1 * t1 + t2 * t2)


def horodecki_bound(rho) -> float:
    """Maximum CHSH value over all projective qubit measurements: 2 sqrt(t1^2 + t2^2)."""
    return horodecki_bound_from_t(correlation_matrix(rho))


def chsh_margin(rho) -> float:
    """t1^2 + t2^2 - 1; positive iff the state can violate CHSH.

    Written as (t1 - 1)(t1 + 1) + t2^2 so that a tiny t2 is not swallowed by
    rounding when t1 == 1.
    """
    t1, t2 = _top_two_singular(correlation_matrix(rho))
    return (t1 - 1.0) * (t1 + 1.0) + t2 * t2


def violation_threshold(family: str = "colored", w: float = 1.0, tol: float = 1e-9) -> float:
    """Smallest Bell-state weight p at which the family starts violating CHSH.

    ``family`` is "colored", "white" or "mixed" (with colored weight ``w``).
    Returns ``nan`` if the family never violates on [0, 1].
    """
    family = family.lower()
    if family == "colored":
        make = colored_state
    elif family == "white":
        make = werner_state
    elif family == "mixed":
        def make(p):
            return mixed_noise_state(p, w)
    else:
        raise ValueError(f"unknown noise family {family!r}")

    lo, hi = 0.0, 1.0
    if chsh_margin(make(hi)) <= 0.0:
        return math.nan
    if chsh_margin(make(lo)) > 0.0:
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if chsh_margin(make(mid)) > 0.0:
            hi = mid
        else:
            lo = mid
    if lo == 0.0:
        # every probe violated: the threshold is the bracket's lower end
        return 0.0
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# numerical maximization


@dataclass(frozen=True)
class OptimizerOptions:
    grid_points: int = 181
    xatol: float = 1e-10
    fatol: float = 1e-10
    n_starts: int = 4
    maxiter: int = 4000
    tie_tol: float = 1e-12


def _canonical_grid(n: int) -> np.ndarray:
    return -HALF_PI + math.pi * np.arange(n) / n


def _nelder_mead(fun, x0, opts: OptimizerOptions):
    res = minimize(
        lambda x: -fun(x),
        np.asarray(x0, dtype=float),
        method="Nelder-Mead",
        options={"xatol": opts.xatol, "fatol": opts.fatol, "maxiter": opts.maxiter, "maxfev": 4 * opts.maxiter},
    )
    return res.x, -res.fun


def _top_starts(values: np.ndarray, k: int) -> np.ndarray:
    flat = values.ravel()
    k = min(k, flat.size)
    idx = np.argpartition(-flat, k - 1)[:k]
    idx = idx[np.argsort(-flat[idx], kind="stable")]
    return np.column_stack(np.unravel_index(idx, values.shape))


def _maximize_theta_phi(grid_fun, point_fun, opts: OptimizerOptions):
    """Grid then simplex search over (theta, phi); returns (value, theta, phi, grid_max)."""
    g = _canonical_grid(opts.grid_points)
    values = grid_fun(g[:, None], g[None, :])
    grid_max = float(values.max())

    candidates = [(point_fun(np.zeros(2)), 0.0, 0.0)]
    for i, j in _top_starts(values, opts.n_starts):
        x, v = _nelder_mead(point_fun, (g[i], g[j]), opts)
        candidates.append((float(v), float(x[0]), float(x[1])))

    best = max(c[0] for c in candidates)
    ties = []
    for v, th, ph in candidates:
        if v < best - opts.tie_tol:
            continue
        th, ph = wrap_angle(th), wrap_angle(ph)
        # beta is even under (theta, phi) -> (-theta, -phi); report theta >= 0
        if th < 0 or (th == 0 and ph < 0):
            th, ph = wrap_angle(-th), wrap_angle(-ph)
        ties.append((abs(th), abs(ph), th, ph, v))
    _, _, th, ph, v = min(ties)
    return v, th, ph, grid_max


def maximize_restricted(p: float, opts: OptimizerOptions | None = None) -> BellResult:
    """Maximize the closed-form colored-noise Bell value over (theta, phi)."""
    opts = opts or OptimizerOptions()
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    value, th, ph, _ = _maximize_theta_phi(
        lambda t, f: beta_analytic(p, t, f),
        lambda x: beta_analytic(p, x[0], x[1]),
        opts,
    )
    return BellResult(value, ChshSettings.restricted(th, ph))


def _xz_block(rho) -> tuple[float, float, float, float]:
    t = correlation_matrix(rho)
    return t[2, 2], t[2, 0], t[0, 2], t[0, 0]  # zz, zx, xz, xx


def _corr_xz(tzz, tzx, txz, txx, a, b):
    ca, sa = np.cos(2 * a), np.sin(2 * a)
    cb, sb = np.cos(2 * b), np.sin(2 * b)
    return ca * cb * tzz + ca * sb * tzx + sa * cb * txz + sa * sb * txx


def maximize_state_restricted(rho, opts: OptimizerOptions | None = None) -> BellResult:
    """Like :func:`maximize_restricted` but for an arbitrary state (trace route)."""
    opts = opts or OptimizerOptions()
    rho = as_state(rho)
    tzz, tzx, txz, txx = _xz_block(rho)

    def beta(th, ph):
        def e(a, b):
            return _corr_xz(tzz, tzx, txz, txx, a, b)
        return e(0.0, ph) + e(0.0, ph - th) + e(th, ph) - e(th, ph - th)

    value, th, ph, _ = _maximize_theta_phi(beta, lambda x: float(beta(x[0], x[1])), opts)
    settings = ChshSettings.restricted(th, ph)
    return BellResult(bell_value(rho, settings).value, settings)


def maximize_general(rho, opts: OptimizerOptions | None = None, grid_points: int = 16) -> BellResult:
    """Maximize the CHSH value over four independent x-z-plane analyzer angles.

    The coarse stage uses a ``grid_points**4`` lattice; the refinement
    re-evaluates through the same x-z correlation block, and the reported value
    comes from :func:`bell_value`.
    """
    opts = opts or OptimizerOptions()
    rho = as_state(rho)
    tzz, tzx, txz, txx = _xz_block(rho)

    def beta(a0, a1, b0, b1):
        def e(a, b):
            return _corr_xz(tzz, tzx, txz, txx, a, b)
        return e(a0, b0) + e(a0, b1) + e(a1, b0) - e(a1, b1)

    g = _canonical_grid(grid_points)
    a0, a1, b0, b1 = np.meshgrid(g, g, g, g, indexing="ij", sparse=True)
    values = beta(a0, a1, b0, b1)

    best_x, best_v = np.zeros(4), float(beta(0.0, 0.0, 0.0, 0.0))
    for idx in _top_starts(values, opts.n_starts):
        x, v = _nelder_mead(lambda x: float(beta(*x)), g[idx], opts)
        if v > best_v:
            best_x, best_v = x, v
    settings = ChshSettings.general(*(wrap_angle(a) for a in best_x))
    return bell_value(rho, settings)


def beta_surface(p: float, theta_grid, phi_grid) -> np.ndarray:
    """Closed-form Bell values on a (theta x phi) grid; rows follow ``theta_grid``."""
    theta_grid = np.asarray(theta_grid, dtype=float)
    phi_grid = np.asarray(phi_grid, dtype=float)
    for name, grid in (("theta_grid", theta_grid), ("phi_grid", phi_grid)):
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError(f"{name} must be a non-empty 1-D sequence")
        if np.any(np.diff(grid) <= 0):
            raise ValueError(f"{name} must be strictly increasing")
    return beta_analytic(p, theta_grid[:, None], phi_grid[None, :])


__all__ = [
    "CLASSICAL_BOUND",
    "TSIRELSON_BOUND",
    "BellResult",
    "ChshSettings",
    "DensityMatrix",
    "OptimizerOptions",
    "beta_analytic",
    "beta_surface",
    "bell_value",
    "chsh_margin",
    "correlation",
    "correlation_matrix",
    "horodecki_bound",
    "horodecki_bound_from_t",
    "maximize_general",
    "maximize_restricted",
    "maximize_state_restricted",
    "observable",
    "violation_threshold",
    "wrap_angle",
]
