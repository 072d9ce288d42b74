"""Shared random constructions for the test suite."""

from __future__ import annotations

import numpy as np


def random_symmetric(rng, n, scale=1.0):
    X = rng.standard_normal((n, n)) * scale
    return (X + X.T) / 2.0


def random_orthonormal(rng, n, r):
    Q, R = np.linalg.qr(rng.standard_normal((n, r)))
    return Q * np.sign(np.diag(R))
