"""Two-qubit state algebra.

Pauli operators, Kronecker products, the colored-noise / Werner / mixed-noise
state families and a few state diagnostics.  Every 4x4 matrix in this package
uses the fixed product-basis order ``(oo, oe, eo, ee)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

BASIS = ("oo", "oe", "eo", "ee")

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_PAULIS = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}

for _m in _PAULIS.values():
    _m.setflags(write=False)


class StateError(ValueError):
    """Raised for matrices that are not valid two-qubit density matrices."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``axis`` in {"X", "Y", "Z"} (or "I")."""
    try:
        return _PAULIS[axis.upper()]
    except (KeyError, AttributeError):
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b`` of two single-qubit operators."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"tensor expects two 2x2 matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


@dataclass(frozen=True)
class StateDiagnostics:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    purity: float

    @property
    def ok(self) -> bool:
        return (
            self.hermiticity_defect <= HERMITIAN_TOL
            and self.trace_defect <= TRACE_TOL
            and self.min_eigenvalue >= PSD_TOL
        )


def validate_state(rho) -> StateDiagnostics:
    """Report how far ``rho`` is from being a density matrix. Never raises."""
    m = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho, dtype=complex)
    herm = float(np.max(np.abs(m - m.conj().T)))
    trace_defect = float(abs(np.trace(m) - 1.0))
    hm = 0.5 * (m + m.conj().T)
    min_eig = float(np.linalg.eigvalsh(hm).min())
    purity = float(np.real(np.trace(m @ m)))
    return StateDiagnostics(herm, trace_defect, min_eig, purity)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Immutable, validated 4x4 two-qubit density matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise StateError(f"density matrix must be 4x4, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise StateError("density matrix has non-finite entries")
        diag = validate_state(m)
        if diag.hermiticity_defect > HERMITIAN_TOL:
            raise StateError(f"not Hermitian (defect {diag.hermiticity_defect:.3g})")
        if diag.trace_defect > TRACE_TOL:
            raise StateError(f"trace differs from 1 by {diag.trace_defect:.3g}")
        if diag.min_eigenvalue < PSD_TOL:
            raise StateError(f"not positive semidefinite (min eigenvalue {diag.min_eigenvalue:.3g})")
        object.__setattr__(self, "matrix", _frozen(m))

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def expect(self, op) -> float:
        """Real part of ``trace(rho @ op)``."""
        return float(np.real(np.trace(self.matrix @ np.asarray(op))))

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def allclose(self, other: "DensityMatrix", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, as_matrix(other), rtol=0.0, atol=atol))

    def to_dict(self) -> dict:
        return {
            "basis": list(BASIS),
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "DensityMatrix":
        if list(data.get("basis", BASIS)) != list(BASIS):
            raise StateError(f"unsupported basis order {data.get('basis')!r}")
        arr = np.array(data["matrix"], dtype=float)
        if arr.shape != (4, 4, 2):
            raise StateError(f"expected a 4x4 array of [re, im] pairs, got shape {arr.shape}")
        return cls(arr[..., 0] + 1j * arr[..., 1])

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        return cls.from_dict(json.loads(text))


def as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def as_state(rho) -> DensityMatrix:
    """Coerce ``rho`` to a :class:`DensityMatrix`, validating raw arrays."""
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix(np.asarray(rho, dtype=complex))


def ket_projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


_PHI_PLUS = ket_projector(np.array([1, 0, 0, 1]) / np.sqrt(2))
_DIAG_OO_EE = np.diag([0.5, 0, 0, 0.5]).astype(complex)
_MAX_MIXED = np.eye(4, dtype=complex) / 4


def phi_plus() -> DensityMatrix:
    """|Phi+><Phi+| with |Phi+> = (|oo> + |ee>)/sqrt(2)."""
    return DensityMatrix(_PHI_PLUS)


def maximally_mixed() -> DensityMatrix:
    return DensityMatrix(_MAX_MIXED)


def colored_state(p: float) -> DensityMatrix:
    """Bell state mixed with decoherence in the natural (o/e) basis.

    ``p |Phi+><Phi+| + (1 - p)/2 (|oo><oo| + |ee><ee|)``.  The diagonal stays
    at (1/2, 0, 0, 1/2) and only the oo/ee coherences scale with ``p``.
    """
    p = _check_unit_interval("p", p)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = 0.5
    m[0, 3] = m[3, 0] = 0.5 * p
    return DensityMatrix(m)


def werner_state(p: float) -> DensityMatrix:
    """White-noise family ``p |Phi+><Phi+| + (1 - p) I/4``."""
    p = _check_unit_interval("p", p)
    return DensityMatrix(p * _PHI_PLUS + (1.0 - p) * _MAX_MIXED)


def mixed_noise_state(p: float, w: float) -> DensityMatrix:
    """Colored-noise state with an extra white admixture: ``w rho_C(p) + (1 - w) I/4``."""
    p = _check_unit_interval("p", p)
    w = _check_unit_interval("w", w)
    return DensityMatrix(w * colored_state(p).matrix + (1.0 - w) * _MAX_MIXED)


def noisy_state(kind: str, p: float, w: float = 1.0) -> DensityMatrix:
    """Dispatch on noise kind: "colored", "white" or "mixed"."""
    kind = kind.lower()
    if kind == "colored":
        return colored_state(p)
    if kind == "white":
        return werner_state(p)
    if kind == "mixed":
        return mixed_noise_state(p, w)
    raise ValueError(f"unknown noise kind {kind!r}")


def purity(rho) -> float:
    m = as_matrix(rho)
    return float(np.real(np.trace(m @ m)))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann-Jozsa fidelity, squared convention: ``(tr |sqrt(rho) sqrt(sigma)|)**2``.

    With this convention ``fidelity(rho, rho) == 1`` and, for a pure ``rho``,
    the value reduces to ``<psi|sigma|psi>``.  Both arguments must be physical.
    """
    a = as_state(rho).matrix
    b = as_state(sigma).matrix
    # nuclear norm of sqrt(a) sqrt(b) avoids the sqrt-of-roundoff blowup near rank deficiency
    s = np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)
    return float(min(1.0, max(0.0, s.sum() ** 2)))
