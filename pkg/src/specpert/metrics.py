"""Row-wise eigenspace distances and derived entrywise metrics.

``d2inf(U, U*)`` is reported through an explicit alignment: the polar
factor ``sign(U^T U*)`` (``sign-global``), the block-diagonal version built
from consecutive column blocks (``sign-blockwise``), or, for a single
column, the better of the two signs (``exact-r1``). The aligned value is an
upper bound on the infimum over all orthogonal matrices and equals it in the
``exact-r1`` case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import InputError, ShapeMismatchError
from .linalg import check_finite, matrix_sign, two_to_infty_norm

AlignMode = Literal["sign-global", "sign-blockwise", "exact-r1"]
_CHUNK = 512


@dataclass(frozen=True)
class Alignment:
    """Alignment scheme.

    ``partition`` lists half-open column ranges ``(start, stop)`` and is
    required for ``sign-blockwise``. The ranges must be disjoint, contiguous
    and cover ``0 .. r``.
    """

    mode: AlignMode = "sign-global"
    partition: tuple[tuple[int, int], ...] | None = None

    @classmethod
    def blockwise(cls, sizes: Sequence[int]) -> "Alignment":
        """Blockwise alignment from consecutive block sizes."""
        edges = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        return cls("sign-blockwise", tuple(zip(edges[:-1].tolist(), edges[1:].tolist())))

    def validate(self, r: int) -> None:
        if self.mode == "exact-r1":
            if r != 1:
                raise InputError("exact-r1 alignment needs a single column")
        elif self.mode == "sign-blockwise":
            if not self.partition:
                raise InputError("sign-blockwise alignment needs a partition")
            pos = 0
            for start, stop in self.partition:
                if start != pos or stop <= start:
                    raise InputError(f"partition {self.partition} is not contiguous from 0")
                pos = stop
            if pos != r:
                raise InputError(f"partition covers {pos} columns, expected {r}")
        elif self.mode != "sign-global":
            raise InputError(f"unknown alignment mode {self.mode!r}")


def _pair(U, Ustar) -> tuple[np.ndarray, np.ndarray]:
    U = check_finite(U, "U")
    Ustar = check_finite(Ustar, "Ustar")
    if U.ndim == 1:
        U = U[:, None]
    if Ustar.ndim == 1:
        Ustar = Ustar[:, None]
    if U.shape != Ustar.shape:
        raise ShapeMismatchError(f"U is {U.shape} but Ustar is {Ustar.shape}")
    return U, Ustar


def align(U, Ustar, a: Alignment = Alignment()) -> np.ndarray:
    """Orthogonal ``r x r`` matrix ``O`` used to compare ``U O`` with ``Ustar``."""
    U, Ustar = _pair(U, Ustar)
    r = U.shape[1]
    a.validate(r)
    if a.mode == "sign-global":
        return matrix_sign(U.T @ Ustar)
    if a.mode == "exact-r1":
        plus = np.max(np.abs(U[:, 0] - Ustar[:, 0]))
        minus = np.max(np.abs(U[:, 0] + Ustar[:, 0]))
        return np.array([[1.0 if plus <= minus else -1.0]])
    O = np.zeros((r, r))
    for start, stop in a.partition:
        O[start:stop, start:stop] = matrix_sign(U[:, start:stop].T @ Ustar[:, start:stop])
    return O


def d2inf(U, Ustar, a: Alignment = Alignment()) -> float:
    """Aligned distance ``||U O - U*||_{2->inf}``."""
    U, Ustar = _pair(U, Ustar)
    return two_to_infty_norm(U @ align(U, Ustar, a) - Ustar)


def d2inf_to_target(U, target, Ustar, a: Alignment = Alignment()) -> float:
    """Distance from ``U O`` to ``target``, with ``O`` defined by ``(U, Ustar)``.

    Typical targets are ``A U* (Lambda*)^{-1}`` or ``U* + V``.
    """
    U, Ustar = _pair(U, Ustar)
    target = check_finite(target, "target")
    if target.ndim == 1:
        target = target[:, None]
    if target.shape != U.shape:
        raise ShapeMismatchError(f"target is {target.shape} but U is {U.shape}")
    return two_to_infty_norm(U @ align(U, Ustar, a) - target)


def d2inf_grid_r2(U, Ustar, points: int = 1_000_000) -> float:
    """Brute-force ``min_O ||U O - U*||_{2->inf}`` over a grid on ``O(2)``.

    Half of the points are rotations and half reflections, at equally spaced
    angles. Used as an independent check on the aligned distance for
    ``r = 2``.
    """
    U, Ustar = _pair(U, Ustar)
    if U.shape[1] != 2:
        raise ShapeMismatchError("grid search is implemented for r = 2 only")
    half = points // 2
    best = np.inf
    for start in range(0, half, 100_000):
        theta = 2.0 * np.pi * np.arange(start, min(start + 100_000, half)) / half
        c, s = np.cos(theta), np.sin(theta)
        for refl in (1.0, -1.0):
            # O = [[c, -refl*s], [s, refl*c]]
            col0 = U[:, :1] * c + U[:, 1:] * s - Ustar[:, :1]
            col1 = refl * (-U[:, :1] * s + U[:, 1:] * c) - Ustar[:, 1:]
            rows = np.sqrt(col0**2 + col1**2).max(axis=0)
            best = min(best, float(rows.min()))
    return best


# ---------------------------------------------------------------------------
# projector and reconstruction metrics
# ---------------------------------------------------------------------------


def _chunked_rows(U, Ustar, scale=None, scale_star=None):
    """Yield row blocks of ``U S U^T - U* S* U*^T`` without forming it whole."""
    left = U if scale is None else U * scale
    left_star = Ustar if scale_star is None else Ustar * scale_star
    for start in range(0, U.shape[0], _CHUNK):
        stop = start + _CHUNK
        yield left[start:stop] @ U.T - left_star[start:stop] @ Ustar.T


def projection_d2inf(U, Ustar) -> float:
    """``||U U^T - U* U*^T||_{2->inf}``."""
    U, Ustar = _pair(U, Ustar)
    return max(two_to_infty_norm(block) for block in _chunked_rows(U, Ustar))


def projection_maxnorm(U, Ustar) -> float:
    """``||U U^T - U* U*^T||_max``."""
    U, Ustar = _pair(U, Ustar)
    return max(float(np.max(np.abs(block))) for block in _chunked_rows(U, Ustar))


def lowrank_recon_maxnorm(U, lam, Ustar, lam_star) -> float:
    """``||U diag(lam) U^T - U* diag(lam*) U*^T||_max``.

    ``lam`` and ``lam_star`` may be vectors or diagonal matrices.
    """
    U, Ustar = _pair(U, Ustar)
    lam, lam_star = (np.asarray(x, dtype=float) for x in (lam, lam_star))
    lam = np.diag(lam) if lam.ndim == 2 else np.atleast_1d(lam)
    lam_star = np.diag(lam_star) if lam_star.ndim == 2 else np.atleast_1d(lam_star)
    if lam.shape[0] != U.shape[1] or lam_star.shape[0] != Ustar.shape[1]:
        raise ShapeMismatchError("eigenvalue count must match the number of columns")
    return max(float(np.max(np.abs(block)))
               for block in _chunked_rows(U, Ustar, lam, lam_star))
