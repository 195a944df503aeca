"""Coincidence-counting measurement chain.

Each arm projects onto ``|s> = cos(a)|o> + sin(a)|e>`` (outcome +) or
``|s_perp> = sin(a)|o> - cos(a)|e>`` (outcome -).  Joint outcome
probabilities are drawn as a multinomial over the four detector pairs at a
fixed total per setting, and correlations are estimated from the normalized
counts.

Seeding: a master seed and a setting index are hashed into a child seed with
``numpy.random.SeedSequence([seed, index]).generate_state(1)[0]`` (a uint32).
Passing ``shots=None`` (or ``math.inf``) selects exact mode: no sampling,
expected counts are used as-is.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bellopt import (
    BellResult,
    ChshSettings,
    beta_analytic,
    bell_value,
    maximize_restricted,
)
from .qcore import SIGMA_I, SIGMA_Y, as_state, colored_state, mixed_noise_state, tensor
from .sourcemodel import SourceParams, p_of_tau

PROB_TOL = 1e-9


class Circular(enum.Enum):
    """Marker for a circular-polarization analyzer (sigma_y eigenbasis)."""

    R = "circular"

    def __repr__(self):
        return "CIRCULAR"


CIRCULAR = Circular.R


@dataclass(frozen=True)
class AnalyzerSetting:
    """Analyzer angles for arm 1 (``alpha``) and arm 2 (``beta_angle``), radians."""

    alpha: float | Circular
    beta_angle: float | Circular

    def __post_init__(self):
        for a in (self.alpha, self.beta_angle):
            if a is not CIRCULAR and not math.isfinite(a):
                raise ValueError(f"analyzer angle must be finite, got {a!r}")


@dataclass(frozen=True)
class CountRecord:
    """Coincidence counts (n_pp, n_pm, n_mp, n_mm); floats only in exact mode."""

    n_pp: float
    n_pm: float
    n_mp: float
    n_mm: float
    setting: AnalyzerSetting | None = None
    seed: int | None = None

    @property
    def counts(self) -> tuple:
        return (self.n_pp, self.n_pm, self.n_mp, self.n_mm)

    @property
    def total(self):
        return sum(self.counts)


@dataclass(frozen=True)
class CorrelationEstimate:
    e_hat: float
    std_err: float
    total: float


def is_exact(shots) -> bool:
    return shots is None or (isinstance(shots, float) and math.isinf(shots))


def child_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def analyzer_projectors(angle) -> tuple[np.ndarray, np.ndarray]:
    """(P_plus, P_minus) for a linear analyzer at ``angle`` or the circular marker."""
    if angle is CIRCULAR:
        return 0.5 * (SIGMA_I + SIGMA_Y), 0.5 * (SIGMA_I - SIGMA_Y)
    c, s = math.cos(angle), math.sin(angle)
    plus = np.array([c, s], dtype=complex)
    minus = np.array([s, -c], dtype=complex)
    return np.outer(plus, plus.conj()), np.outer(minus, minus.conj())


def coincidence_probs(rho, setting: AnalyzerSetting) -> tuple[float, float, float, float]:
    """(p_pp, p_pm, p_mp, p_mm) for one analyzer pair."""
    rho = as_state(rho)
    pa = analyzer_projectors(setting.alpha)
    pb = analyzer_projectors(setting.beta_angle)
    probs = np.array([rho.expect(tensor(x, y)) for x in pa for y in pb])
    # roundoff can leave -1e-17 on structurally zero outcomes
    probs = np.clip(probs, 0.0, None)
    return tuple(float(v) for v in probs / probs.sum())


def _check_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.shape != (4,) or not np.all(np.isfinite(p)):
        raise ValueError(f"expected four finite probabilities, got {probs!r}")
    if np.any(p < -PROB_TOL) or abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"probabilities must be non-negative and sum to 1, got {probs!r}")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_counts(probs, n_total: int, seed: int, setting: AnalyzerSetting | None = None) -> CountRecord:
    """Multinomial draw of ``n_total`` coincidences; bit-reproducible for a given seed."""
    p = _check_probs(probs)
    n_total = int(n_total)
    if n_total <= 0:
        raise ValueError("n_total must be positive")
    counts = np.random.default_rng(seed).multinomial(n_total, p)
    return CountRecord(*(int(c) for c in counts), setting=setting, seed=int(seed))


def expected_counts(probs, n_total: float = 1.0, setting: AnalyzerSetting | None = None) -> CountRecord:
    p = _check_probs(probs)
    return CountRecord(*(float(c) for c in p * n_total), setting=setting, seed=None)


def estimate_correlation(c: CountRecord) -> CorrelationEstimate:
    """E = (N++ - N+- - N-+ + N--)/N with delta-method error sqrt((1 - E^2)/N)."""
    n = c.total
    if not n > 0:
        raise ValueError("cannot estimate a correlation from zero total counts")
    e = (c.n_pp - c.n_pm - c.n_mp + c.n_mm) / n
    e = min(1.0, max(-1.0, e))
    return CorrelationEstimate(float(e), float(math.sqrt(max(0.0, 1.0 - e * e) / n)), n)


def detector_effects(probs, efficiency: float = 1.0, accidental_fraction: float = 0.0):
    """Blend ``probs`` with uniform accidentals: ``(1 - a) probs + a / 4``.

    ``efficiency`` does not change the distribution; it only reduces the
    number of recorded pairs, see :func:`effective_shots`.
    """
    if not (0.0 < efficiency <= 1.0):
        raise ValueError(f"efficiency must lie in (0, 1], got {efficiency!r}")
    if not (0.0 <= accidental_fraction < 1.0):
        raise ValueError(f"accidental_fraction must lie in [0, 1), got {accidental_fraction!r}")
    p = _check_probs(probs)
    a = accidental_fraction
    return tuple(float(v) for v in (1.0 - a) * p + 0.25 * a)


def effective_shots(n: int, efficiency: float) -> int:
    """Pairs surviving two detectors of efficiency eta: N_eff = eta^2 N."""
    if not (0.0 < efficiency <= 1.0):
        raise ValueError(f"efficiency must lie in (0, 1], got {efficiency!r}")
    return int(round(efficiency * efficiency * n))


@dataclass(frozen=True)
class ChshMeasurement:
    beta: float
    std_err: float
    correlations: tuple[CorrelationEstimate, ...]
    records: tuple[CountRecord, ...]
    settings: ChshSettings
    exact: bool

    @property
    def abs_beta(self) -> float:
        return abs(self.beta)


def run_chsh(rho, settings: ChshSettings, shots_per_setting=None, seed: int = 0,
             accidental_fraction: float = 0.0, efficiency: float = 1.0) -> ChshMeasurement:
    """Simulate the four CHSH settings and combine them into beta_hat.

    Setting ``k`` (order A0B0, A0B1, A1B0, A1B1) is sampled with
    ``child_seed(seed, k)``.  The uncertainty is the root-sum-square of the
    four correlation standard errors.
    """
    rho = as_state(rho)
    exact = is_exact(shots_per_setting)
    if not exact:
        shots_per_setting = int(shots_per_setting)
        if shots_per_setting <= 0:
            raise ValueError("shots_per_setting must be positive")
        shots_per_setting = effective_shots(shots_per_setting, efficiency)
        if shots_per_setting <= 0:
            raise ValueError("no pairs survive the detector efficiency")

    records, estimates, beta = [], [], 0.0
    for k, (a, b, sign) in enumerate(settings.pairs()):
        setting = AnalyzerSetting(a, b)
        probs = coincidence_probs(rho, setting)
        if accidental_fraction:
            probs = detector_effects(probs, efficiency, accidental_fraction)
        if exact:
            rec = expected_counts(probs, 1.0, setting)
        else:
            rec = sample_counts(probs, shots_per_setting, child_seed(seed, k), setting)
        est = estimate_correlation(rec)
        records.append(rec)
        estimates.append(est)
        beta += sign * est.e_hat

    if exact:
        std = 0.0
        if not accidental_fraction:
            beta = bell_value(rho, settings).value
    else:
        std = math.sqrt(sum(e.std_err**2 for e in estimates))
    return ChshMeasurement(float(beta), float(std), tuple(estimates), tuple(records), settings, exact)


@dataclass(frozen=True)
class SweepRecord:
    tau_fs: float
    p_model: float
    beta_measured: float
    beta_stderr: float
    beta_model: float
    theta_deg: float
    phi_deg: float
    shots: float
    seed: int

    FIELDS = ("tau_fs", "p_model", "beta_measured", "beta_stderr", "beta_model",
              "theta_deg", "phi_deg", "shots", "seed")

    def as_row(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


def _sweep_point(i, tau, params, shots, seed, optimize, fixed, colored_weight):
    p = float(p_of_tau(tau, params))
    if optimize:
        settings = maximize_restricted(p).settings
    else:
        settings = fixed
    state = colored_state(p) if colored_weight == 1.0 else mixed_noise_state(p, colored_weight)
    m = run_chsh(state, settings, shots, child_seed(seed, i))
    return SweepRecord(
        tau_fs=float(tau),
        p_model=p,
        beta_measured=m.beta,
        beta_stderr=m.std_err,
        beta_model=float(beta_analytic(p, settings.theta, settings.phi)),
        theta_deg=math.degrees(settings.theta),
        phi_deg=math.degrees(settings.phi),
        shots=math.inf if is_exact(shots) else int(shots),
        seed=int(seed),
    )


def experiment_sweep(params: SourceParams, taus, shots=None, seed: int = 0, optimize: bool = True,
                     settings: ChshSettings | None = None, colored_weight: float = 1.0,
                     workers: int = 1) -> list[SweepRecord]:
    """Delay sweep producing one CHSH measurement per delay.

    With ``optimize`` the analyzers sit at the restricted-family optimum for
    the model ``p(tau)``; otherwise ``settings`` (restricted mode) is used at
    every delay.  ``colored_weight < 1`` measures ``mixed_noise_state``
    instead of the pure colored model while ``beta_model`` still reports the
    colored-model prediction.  Delay ``i`` uses ``child_seed(seed, i)`` as
    its master seed, so results do not depend on ``workers``.
    """
    if not optimize:
        if settings is None or not settings.is_restricted:
            raise ValueError("fixed-angle sweeps need restricted ChshSettings")
    taus = [float(t) for t in np.asarray(taus, dtype=float).reshape(-1)]
    jobs = [(i, t, params, shots, seed, optimize, settings, colored_weight) for i, t in enumerate(taus)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda j: _sweep_point(*j), jobs))
    return [_sweep_point(*j) for j in jobs]


__all__ = [
    "CIRCULAR",
    "AnalyzerSetting",
    "BellResult",
    "ChshMeasurement",
    "CorrelationEstimate",
    "CountRecord",
    "SweepRecord",
    "analyzer_projectors",
    "child_seed",
    "coincidence_probs",
    "detector_effects",
    "effective_shots",
    "estimate_correlation",
    "expected_counts",
    "experiment_sweep",
    "is_exact",
    "run_chsh",
    "sample_counts",
]
