"""Driven two-qubit Heisenberg-Ising model.

The Hamiltonian (hbar = 1) couples the two spins through all three
exchange axes and drives both with a magnetic field along a single
common axis h in {1, 2, 3}:

    H = sum_k J_k sigma_k (x) sigma_k - B1 sigma_h (x) 1 - B2 1 (x) sigma_h

Computational basis ordering is |q1 q2> -> index 2*q1 + q2.  The
propagator is U(t) = exp(-i H t); negative times are rejected, inverse
evolution is expressed by the adjoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .spinlin import expm_hermitian, kron, pauli

__all__ = ["PhysicalParams", "assemble_hamiltonian", "build_hamiltonian", "evolve"]

_I2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class PhysicalParams:
    """Exchange couplings, field amplitudes, field axis and evolution time."""

    t: float
    J: tuple[float, float, float]
    B1: float
    B2: float
    h: int

    def __post_init__(self):
        object.__setattr__(self, "J", tuple(float(j) for j in self.J))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "B1", float(self.B1))
        object.__setattr__(self, "B2", float(self.B2))
        if len(self.J) != 3:
            raise ValueError("J must have exactly three components")
        if self.h not in (1, 2, 3):
            raise ValueError(f"field axis h must be 1, 2 or 3, got {self.h!r}")
        vals = (self.t, *self.J, self.B1, self.B2)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("parameters must be finite")
        if self.t < 0:
            raise ValueError("t must be nonnegative")

    def to_json(self) -> str:
        return json.dumps(
            {"t": self.t, "J": list(self.J), "B1": self.B1, "B2": self.B2, "h": self.h}
        )

    @classmethod
    def from_json(cls, text: str) -> "PhysicalParams":
        doc = json.loads(text)
        try:
            return cls(
                t=doc["t"], J=tuple(doc["J"]), B1=doc["B1"], B2=doc["B2"], h=doc["h"]
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed parameter document: {exc}") from exc


def assemble_hamiltonian(J, B1: float, B2: float, h: int) -> np.ndarray:
    """Assemble the 4x4 Hamiltonian from raw components.

    Hermitian by construction and traceless.  No range validation
    happens here; callers that need the full parameter contract go
    through PhysicalParams.
    """
    hm = np.zeros((4, 4), dtype=np.complex128)
    for k in (1, 2, 3):
        s = pauli(k)
        hm += float(J[k - 1]) * kron(s, s)
    sh = pauli(h)
    hm -= float(B1) * kron(sh, _I2)
    hm -= float(B2) * kron(_I2, sh)
    return hm


def build_hamiltonian(p: PhysicalParams) -> np.ndarray:
    """The Hamiltonian of a validated parameter set."""
    return assemble_hamiltonian(p.J, p.B1, p.B2, p.h)


def evolve(p: PhysicalParams) -> np.ndarray:
    """Propagator U = exp(-i H t) for the given parameters."""
    return expm_hermitian(build_hamiltonian(p), p.t)
