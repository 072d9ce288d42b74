"""Dense symmetric eigendecomposition and the norm primitives built on it.

The default eigensolver is a Householder tridiagonalization followed by
implicit-shift QL (see :mod:`specpert._ql`). For matrices larger than
``QL_MAX_N`` the LAPACK driver shipped with numpy is used instead, because a
scalar QL sweep over a dense 4000 x 4000 factor is far too slow for the Monte
Carlo studies. Both paths return the same :class:`EigenSystem` contract:
descending eigenvalues, orthonormal columns, and the deterministic sign rule
implemented by :func:`normalize_signs`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse.linalg

from . import _ql
from .errors import (
    NoConvergenceError,
    NonFiniteError,
    NotSymmetricError,
    OutOfRangeError,
    RankDeficientError,
    ShapeMismatchError,
)

Ordering = Literal["descending-value", "descending-absolute", "ascending-value"]
ORDERINGS: tuple[str, ...] = ("descending-value", "descending-absolute", "ascending-value")

QL_MAX_N = 256
SWEEPS_PER_ROW = 50
SIGN_RANK_TOL = 1e-12
SIGN_TIE_TOL = 1e-9
LANCZOS_START_SEED = 20190101
LANCZOS_MAXITER_PER_ROW = 10


@dataclass(frozen=True)
class EigenSystem:
    """Full spectral decomposition with eigenvalues in descending order."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EigenWindow:
    """``r`` consecutive eigenpairs starting after ``s`` skipped ones."""

    s: int
    r: int
    values: np.ndarray
    vectors: np.ndarray
    ordering: str

    @property
    def Lambda(self) -> np.ndarray:
        return np.diag(self.values)


# ---------------------------------------------------------------------------
# validation helpers
# ---------------------------------------------------------------------------


def check_finite(M: np.ndarray, what: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise NonFiniteError(f"{what} contains NaN or Inf entries")
    return M


def as_symmetric(M, rtol: float = 1e-12) -> np.ndarray:
    """Validate a square symmetric real matrix and return an exactly symmetric copy.

    Asymmetry up to ``rtol`` times the largest entry is treated as round-off
    and removed by averaging with the transpose. Anything larger is rejected.
    """
    M = check_finite(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got shape {M.shape}")
    if M.size == 0:
        raise ShapeMismatchError("matrix must be at least 1 x 1")
    asym = np.max(np.abs(M - M.T))
    if asym == 0.0:
        return M
    scale = max(1.0, float(np.max(np.abs(M))))
    if asym > rtol * scale:
        raise NotSymmetricError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
    return 0.5 * (M + M.T)


def normalize_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive.

    Ties go to the lowest row index. Entries within a relative
    ``SIGN_TIE_TOL`` of the column maximum count as tied, so that vectors
    with equal-magnitude entries (up to rounding) get a reproducible sign.
    """
    V = np.array(V, dtype=float, copy=True)
    if V.size == 0:
        return V
    mag = np.abs(V)
    top = mag.max(axis=0)
    lead = np.argmax(mag >= top * (1.0 - SIGN_TIE_TOL), axis=0)
    flip = V[lead, np.arange(V.shape[1])] < 0
    V[:, flip] *= -1.0
    return V


# ---------------------------------------------------------------------------
# eigensolver
# ---------------------------------------------------------------------------


def _eigh_ql(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = M.shape[0]
    z, d, e = _ql.tred2(np.ascontiguousarray(M))
    zt = np.ascontiguousarray(z.T)
    sweeps = _ql.tql2(zt, d, e, SWEEPS_PER_ROW * n)
    if sweeps < 0:
        raise NoConvergenceError(f"QL iteration exceeded {SWEEPS_PER_ROW * n} sweeps")
    order = np.argsort(-d, kind="stable")
    return d[order], zt[order].T


def _eigh_lapack(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(M)
    return w[::-1].copy(), v[:, ::-1]


def eigh(M, method: Literal["auto", "ql", "lapack"] = "auto") -> EigenSystem:
    """Full eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    M : array_like, shape (n, n)
        Symmetric real matrix.
    method : {"auto", "ql", "lapack"}
        ``"ql"`` forces the in-house Householder + QL solver, ``"lapack"``
        forces ``numpy.linalg.eigh``; ``"auto"`` picks QL up to
        ``QL_MAX_N`` rows.

    Returns
    -------
    EigenSystem
        Eigenvalues sorted descending, sign-normalized eigenvectors.
    """
    M = as_symmetric(M)
    n = M.shape[0]
    if method == "auto":
        method = "ql" if n <= QL_MAX_N else "lapack"
    if method == "ql":
        w, V = _eigh_ql(M)
    elif method == "lapack":
        w, V = _eigh_lapack(M)
    else:
        raise ValueError(f"unknown method {method!r}")
    return EigenSystem(values=w, vectors=normalize_signs(V))


def eigvalsh(M) -> np.ndarray:
    """Eigenvalues only, descending. Uses LAPACK's values-only driver."""
    M = as_symmetric(M)
    return np.linalg.eigvalsh(M)[::-1].copy()


def window_order(values: np.ndarray, ordering: str) -> np.ndarray:
    """Index permutation of descending ``values`` under ``ordering``."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if ordering == "descending-value":
        return np.arange(n)
    if ordering == "ascending-value":
        return np.arange(n)[::-1]
    if ordering == "descending-absolute":
        # primary key -|lambda|, secondary key -lambda (signed value descending)
        return np.lexsort((-values, -np.abs(values)))
    raise ValueError(f"unknown ordering {ordering!r}; expected one of {ORDERINGS}")


def select_window(es: EigenSystem, ordering: str, s: int, r: int) -> EigenWindow:
    """Pick eigenpairs ``s+1 .. s+r`` (1-based) under the requested ordering."""
    if s < 0 or r < 0 or s + r > es.n:
        raise OutOfRangeError(f"window s={s}, r={r} does not fit n={es.n}")
    idx = window_order(es.values, ordering)[s : s + r]
    return EigenWindow(
        s=s,
        r=r,
        values=es.values[idx].copy(),
        vectors=es.vectors[:, idx].copy(),
        ordering=ordering,
    )


def top_eigenpairs(M, k: int, ordering: str = "descending-absolute") -> EigenWindow:
    """Shortcut for ``select_window(eigh(M), ordering, 0, k)``."""
    return select_window(eigh(M), ordering, 0, k)


def extreme_eigenpairs(M, k: int, ordering: str = "descending-absolute") -> EigenWindow:
    """First ``k`` eigenpairs under ``ordering`` without a full decomposition.

    Small matrices (up to ``QL_MAX_N``, or whenever ``2k >= n``) go through
    :func:`eigh`. Larger ones use implicitly restarted Lanczos
    (``scipy.sparse.linalg.eigsh``) with a fixed pseudo-random start vector,
    so results are deterministic. The output matches
    ``select_window(eigh(M), ordering, 0, k)`` up to round-off.
    """
    M = as_symmetric(M)
    n = M.shape[0]
    if k < 1 or k > n:
        raise OutOfRangeError(f"k={k} must lie in 1..{n}")
    if n <= QL_MAX_N or 2 * k >= n:
        return select_window(eigh(M), ordering, 0, k)
    which = {"descending-absolute": "LM", "descending-value": "LA",
             "ascending-value": "SA"}.get(ordering)
    if which is None:
        raise ValueError(f"unknown ordering {ordering!r}; expected one of {ORDERINGS}")
    v0 = np.random.default_rng(LANCZOS_START_SEED).standard_normal(n)
    try:
        w, v = scipy.sparse.linalg.eigsh(M, k=k, which=which, v0=v0, tol=0.0,
                                         maxiter=LANCZOS_MAXITER_PER_ROW * n)
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise NoConvergenceError(f"Lanczos did not converge: {exc}") from exc
    desc = np.argsort(-w, kind="stable")
    w, v = w[desc], v[:, desc]
    idx = window_order(w, ordering)[:k]
    return EigenWindow(s=0, r=k, values=w[idx].copy(),
                       vectors=normalize_signs(v[:, idx]), ordering=ordering)


# ---------------------------------------------------------------------------
# norms and small matrix functions
# ---------------------------------------------------------------------------


def _as_2d(M) -> np.ndarray:
    M = check_finite(M)
    if M.ndim == 1:
        return M[:, None]
    return M


def two_to_infty_norm(M) -> float:
    """Largest Euclidean row norm. A 1-D input is treated as a column."""
    M = _as_2d(M)
    if M.size == 0:
        return 0.0
    return float(np.sqrt(np.max(np.einsum("ij,ij->i", M, M))))


def max_norm(M) -> float:
    """Largest absolute entry."""
    M = check_finite(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M)))


def operator_norm(M, method: Literal["auto", "ql", "lapack"] = "auto") -> float:
    """Spectral norm of a symmetric matrix, ``max |lambda|`` from :func:`eigh`."""
    return float(np.max(np.abs(eigh(M, method=method).values)))


def matrix_sign(M) -> np.ndarray:
    """Orthogonal polar factor ``U V^T`` of ``M = U S V^T``.

    Raises
    ------
    RankDeficientError
        If the smallest singular value is below ``1e-12`` times the largest.
    """
    M = _as_2d(M)
    if M.shape[0] != M.shape[1] or M.size == 0:
        raise ShapeMismatchError(f"matrix_sign needs a non-empty square matrix, got {M.shape}")
    if M.shape == (1, 1):
        x = M[0, 0]
        if x == 0.0:
            raise RankDeficientError("sign of a zero scalar is undefined")
        return np.array([[1.0 if x > 0 else -1.0]])
    U, sv, Vt = np.linalg.svd(M)
    if sv[0] == 0.0 or sv[-1] < SIGN_RANK_TOL * sv[0]:
        raise RankDeficientError(
            f"singular value ratio {sv[-1] / sv[0] if sv[0] else 0.0:.3e} below {SIGN_RANK_TOL}"
        )
    return U @ Vt


def hermitian_dilation(R) -> np.ndarray:
    """Symmetric embedding ``[[0, R], [R^T, 0]]`` of an ``m x n`` matrix."""
    R = _as_2d(R)
    m, n = R.shape
    out = np.zeros((m + n, m + n))
    out[:m, m:] = R
    out[m:, :m] = R.T
    return out
