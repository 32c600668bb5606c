"""Small dense linear-algebra kernel for two-spin operators.

Everything works on plain complex128 ndarrays: 2x2 single-spin operators
and 4x4 two-spin operators.  Propagators are built by spectral
decomposition of the (Hermitian) generator, never by Pade approximation,
so unitarity holds to machine precision for any time argument.
"""

from __future__ import annotations

import numpy as np

from .errors import NonHermitianError, NonUnitaryError

__all__ = [
    "pauli",
    "kron",
    "expm_hermitian",
    "dist_unitary",
    "dist_phase_invariant",
]

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-8

_SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_PAULI = {1: _SX, 2: _SY, 3: _SZ}


def pauli(k: int) -> np.ndarray:
    """Pauli matrix sigma_k for k in {1, 2, 3} = (x, y, z).  Returns a copy."""
    if k not in _PAULI:
        raise ValueError(f"pauli index must be 1, 2 or 3, got {k!r}")
    return _PAULI[k].copy()


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor acting on the first spin."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def expm_hermitian(hm: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(-i * scale * hm) for Hermitian hm, via eigendecomposition.

    Raises NonHermitianError (carrying the measured asymmetry) if
    max |hm - hm^dag| exceeds 1e-12.
    """
    hm = np.asarray(hm, dtype=np.complex128)
    asym = float(np.abs(hm - hm.conj().T).max())
    if asym > HERMITICITY_TOL:
        raise NonHermitianError(asym)
    w, v = np.linalg.eigh(hm)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


def dist_unitary(u: np.ndarray) -> float:
    """Deviation from unitarity: max |u^dag u - 1| entrywise."""
    u = np.asarray(u, dtype=np.complex128)
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def dist_phase_invariant(a: np.ndarray, b: np.ndarray) -> float:
    """Global-phase-invariant distance 1 - |tr(a^dag b)| / n between unitaries.

    Zero iff a and b agree up to a global phase.  Both inputs must be
    unitary; a NonUnitaryError carries the worse defect otherwise.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    defect = max(dist_unitary(a), dist_unitary(b))
    if defect > UNITARITY_TOL:
        raise NonUnitaryError(defect)
    n = a.shape[0]
    return float(1.0 - abs(np.trace(a.conj().T @ b)) / n)
