"""Two-qubit state tomography from simulated coincidence counts.

Nine local-basis pairs {X, Y, Z} x {X, Y, Z} are measured, where Z and X are
linear analyzers at 0 and pi/4 and Y is a circular analyzer.  Each pair gives
four outcome probabilities.  The reconstruction is a Pauli-basis linear
inversion followed by eigenvalue clipping.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .countsim import (
    CIRCULAR,
    AnalyzerSetting,
    analyzer_projectors,
    child_seed,
    coincidence_probs,
    expected_counts,
    is_exact,
    sample_counts,
)
from .qcore import (
    SIGMA_I,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    StateError,
    as_state,
    colored_state,
    fidelity,
    purity,
)

AXES = ("x", "y", "z")
LOCAL_BASES = {"x": math.pi / 4, "y": CIRCULAR, "z": 0.0}
PAULI_LABELS = ("I", "X", "Y", "Z")
_PAULI4 = (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z)

FIT_GRID = np.linspace(0.0, 1.0, 1001)


@dataclass(frozen=True)
class TomoSettings:
    """The nine basis pairs keyed by axis labels, e.g. ("x", "z")."""

    labels: tuple[tuple[str, str], ...]
    basis_pairs: tuple[AnalyzerSetting, ...]

    def __len__(self):
        return len(self.basis_pairs)

    def __iter__(self):
        return iter(zip(self.labels, self.basis_pairs))


def tomo_settings() -> TomoSettings:
    labels = tuple((i, j) for i in AXES for j in AXES)
    pairs = tuple(AnalyzerSetting(LOCAL_BASES[i], LOCAL_BASES[j]) for i, j in labels)
    return TomoSettings(labels, pairs)


def design_matrix(settings: TomoSettings | None = None) -> np.ndarray:
    """36 x 16 real map from the 16 Pauli coefficients of rho to outcome probabilities."""
    settings = settings or tomo_settings()
    basis = [np.kron(a, b) for a in _PAULI4 for b in _PAULI4]
    rows = []
    for _, s in settings:
        pa = analyzer_projectors(s.alpha)
        pb = analyzer_projectors(s.beta_angle)
        for x in pa:
            for y in pb:
                proj = np.kron(x, y)
                rows.append([np.real(np.trace(proj @ b)) / 4 for b in basis])
    return np.array(rows)


def measure_probabilities(rho, settings: TomoSettings | None = None) -> dict:
    settings = settings or tomo_settings()
    return {label: coincidence_probs(rho, s) for label, s in settings}


def expectations_from_probs(records: dict, tol: float = 1e-9):
    """Correlation matrix T (3x3) and local Bloch vectors from per-basis probabilities.

    ``records`` maps (i, j) axis-label pairs to (p_pp, p_pm, p_mp, p_mm).
    Local components are averaged over the three partner bases.
    """
    t = np.zeros((3, 3))
    a = np.zeros(3)
    b = np.zeros(3)
    for ii, i in enumerate(AXES):
        for jj, j in enumerate(AXES):
            try:
                probs = np.asarray(records[(i, j)], dtype=float)
            except KeyError:
                raise ValueError(f"missing tomography record for basis pair {(i, j)}") from None
            if probs.shape != (4,) or abs(probs.sum() - 1.0) > tol or np.any(probs < -tol):
                raise ValueError(f"record for {(i, j)} is not a normalized probability vector: {probs}")
            ppp, ppm, pmp, pmm = probs
            t[ii, jj] = ppp - ppm - pmp + pmm
            a[ii] += (ppp + ppm - pmp - pmm) / 3
            b[jj] += (ppp - ppm + pmp - pmm) / 3
    return t, a, b


def linear_inversion(t, a, b) -> np.ndarray:
    """rho = (I + a.sigma (x) I + I (x) b.sigma + sum T_ij sigma_i (x) sigma_j) / 4."""
    t = np.asarray(t, dtype=float)
    paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)
    rho = np.kron(SIGMA_I, SIGMA_I).astype(complex)
    for i in range(3):
        rho += a[i] * np.kron(paulis[i], SIGMA_I)
        rho += b[i] * np.kron(SIGMA_I, paulis[i])
        for j in range(3):
            rho += t[i, j] * np.kron(paulis[i], paulis[j])
    return rho / 4


def project_physical(raw, tol: float = 1e-9) -> DensityMatrix:
    """Nearest-spectrum repair: clip negative eigenvalues and renormalize."""
    raw = np.asarray(raw, dtype=complex)
    if raw.shape != (4, 4):
        raise StateError(f"expected a 4x4 matrix, got {raw.shape}")
    herm = np.max(np.abs(raw - raw.conj().T))
    if herm > tol:
        raise StateError(f"matrix is not Hermitian (defect {herm:.3g})")
    if abs(np.trace(raw) - 1.0) > tol:
        raise StateError(f"trace differs from 1 by {abs(np.trace(raw) - 1.0):.3g}")
    w, v = np.linalg.eigh(0.5 * (raw + raw.conj().T))
    if w.min() >= 0.0:
        out = 0.5 * (raw + raw.conj().T)
        return DensityMatrix(out / np.trace(out).real)
    w = np.clip(w, 0.0, None)
    w /= w.sum()
    out = (v * w) @ v.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T))


def pauli_coefficients(rho) -> dict[str, float]:
    """c_ij = tr(rho sigma_i (x) sigma_j) for i, j in I, X, Y, Z (16 reals)."""
    m = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho, dtype=complex)
    return {
        li + lj: float(np.real(np.trace(m @ np.kron(si, sj))))
        for li, si in zip(PAULI_LABELS, _PAULI4)
        for lj, sj in zip(PAULI_LABELS, _PAULI4)
    }


def fit_colored_p(rho, grid=FIT_GRID) -> tuple[float, float]:
    """Colored-noise weight p maximizing fidelity to ``rho`` over ``grid``; (p, fidelity)."""
    rho = as_state(rho)
    fids = np.array([fidelity(rho, colored_state(p)) for p in grid])
    k = int(np.argmax(fids))
    return float(grid[k]), float(fids[k])


@dataclass(frozen=True)
class TomoResult:
    rho_hat: DensityMatrix
    fidelity_to_reference: float
    purity: float
    min_eig_raw: float
    fitted_p: float
    fidelity_to_fit: float
    shots: float
    seed: int | None

    def to_dict(self) -> dict:
        return {
            "rho_hat": self.rho_hat.to_dict(),
            "fidelity": self.fidelity_to_reference,
            "purity": self.purity,
            "fitted_p": self.fitted_p,
            "fidelity_to_fit": self.fidelity_to_fit,
            "min_eig_raw": self.min_eig_raw,
            "shots": None if math.isinf(self.shots) else int(self.shots),
            "seed": self.seed,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def reconstruct(rho_true, shots_per_basis=None, seed: int = 0, fit: bool = True) -> TomoResult:
    """Simulate the nine-basis measurement of ``rho_true`` and reconstruct it.

    ``shots_per_basis=None`` is exact mode.  Basis pair ``k`` (in
    :func:`tomo_settings` order) is sampled with ``child_seed(seed, k)``.
    """
    rho_true = as_state(rho_true)
    exact = is_exact(shots_per_basis)
    settings = tomo_settings()
    records = {}
    for k, (label, s) in enumerate(settings):
        probs = coincidence_probs(rho_true, s)
        if exact:
            rec = expected_counts(probs, 1.0, s)
        else:
            rec = sample_counts(probs, int(shots_per_basis), child_seed(seed, k), s)
        records[label] = np.asarray(rec.counts, dtype=float) / rec.total
    t, a, b = expectations_from_probs(records)
    raw = linear_inversion(t, a, b)
    min_eig_raw = float(np.linalg.eigvalsh(raw).min())
    rho_hat = project_physical(raw)
    fitted_p, fid_fit = fit_colored_p(rho_hat) if fit else (math.nan, math.nan)
    return TomoResult(
        rho_hat=rho_hat,
        fidelity_to_reference=fidelity(rho_hat, rho_true),
        purity=purity(rho_hat),
        min_eig_raw=min_eig_raw,
        fitted_p=fitted_p,
        fidelity_to_fit=fid_fit,
        shots=math.inf if exact else int(shots_per_basis),
        seed=None if exact else int(seed),
    )
