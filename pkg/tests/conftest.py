"""Shared helpers for the test suite."""

import numpy as np

from bellgate import PhysicalParams

COUPLING_RANGE = 2.0
TIME_RANGE = 4.0


def random_params(rng, h=None):
    """Draw a random parameter set with couplings in [-2, 2] and t in [0, 4]."""
    if h is None:
        h = int(rng.integers(1, 4))
    return PhysicalParams(
        t=float(rng.uniform(0.0, TIME_RANGE)),
        J=tuple(float(x) for x in rng.uniform(-COUPLING_RANGE, COUPLING_RANGE, size=3)),
        B1=float(rng.uniform(-COUPLING_RANGE, COUPLING_RANGE)),
        B2=float(rng.uniform(-COUPLING_RANGE, COUPLING_RANGE)),
        h=h,
    )


def random_unitary(rng, n=4):
    """Haar-ish unitary from the QR decomposition of a Ginibre matrix."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))
