"""Closed-form perturbation bounds and their ingredients.

Everything here is a deterministic formula evaluation. Quantities hidden
behind "up to a universal constant" statements are exposed through
:class:`Constants`; those constants default to 1 except where a concrete
value is known (72 and 136 for the generic theorems, 5 for the Theta
estimate, 10 for the block-count multiplier).

Conventions
-----------
* Spectra are sorted in descending order; windows are 1-based index ranges
  ``s + 1 .. s + r`` of that order.
* ``lambda_min`` is the smallest absolute eigenvalue in the window.
* All logarithms are natural except the ``log2`` in the block-count term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateWeightsError,
    DomainError,
    InputError,
    NotMonotoneError,
    OutOfRangeError,
    ThetaUndefinedError,
    ZeroEigenvalueError,
)
from .linalg import eigh, max_norm, select_window, two_to_infty_norm

# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constants:
    """Multiplicative constants used by the bound calculators.

    Attributes
    ----------
    condition : float
        Constant in the eigengap conditions of the binary-matrix theorems.
    bound : float
        Prefactor of the binary-matrix bounds (adjacency and Laplacian).
    corollary : float
        Constant in the simplification tests for the two corollaries.
    generic : float
        Prefactor of the generic bounds.
    surgery : float
        Prefactor of the diagonal-surgery bounds.
    theta : float
        Factor turning Theta* into a high-probability Theta.
    theta_gap : float
        Required multiple of M(delta) in the Theta* gap condition.
    blocks : float
        Multiplier in the failure-probability count B(r).
    """

    condition: float = 1.0
    bound: float = 1.0
    corollary: float = 1.0
    generic: float = 72.0
    surgery: float = 136.0
    theta: float = 5.0
    theta_gap: float = 5.0
    blocks: float = 10.0

    def override(self, **values: float) -> "Constants":
        known = {f.name for f in fields(self)}
        unknown = set(values) - known
        if unknown:
            raise InputError(f"unknown constants: {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in values.items()})


# ---------------------------------------------------------------------------
# spectral quantities
# ---------------------------------------------------------------------------


def _desc(eigvals) -> np.ndarray:
    vals = np.asarray(eigvals, dtype=float).ravel()
    if not np.all(np.isfinite(vals)):
        raise DomainError("eigenvalues must be finite")
    return np.sort(vals)[::-1]


def _window(vals: np.ndarray, s: int, r: int) -> np.ndarray:
    n = vals.shape[0]
    if s < 0 or r < 1 or s + r > n:
        raise OutOfRangeError(f"window s={s}, r={r} does not fit a spectrum of size {n}")
    return vals[s : s + r]


def separation(eigvals_star, s: int, r: int) -> float:
    """``min(lambda_s - lambda_{s+1}, lambda_{s+r} - lambda_{s+r+1})`` with infinite ends."""
    vals = _desc(eigvals_star)
    win = _window(vals, s, r)
    upper = np.inf if s == 0 else vals[s - 1] - win[0]
    lower = np.inf if s + r == vals.shape[0] else win[-1] - vals[s + r]
    return float(min(upper, lower))


def lambda_min(window) -> float:
    return float(np.min(np.abs(np.asarray(window, dtype=float))))


def effective_gap(eigvals_star, s: int, r: int) -> float:
    """Effective eigengap: the smaller of the window separation and ``lambda_min``."""
    vals = _desc(eigvals_star)
    return float(min(separation(vals, s, r), lambda_min(_window(vals, s, r))))


def condition_number(window) -> float:
    """``max |lambda| / min |lambda|`` over the window."""
    a = np.abs(np.asarray(window, dtype=float))
    if a.size == 0:
        raise OutOfRangeError("empty window")
    if np.min(a) == 0.0:
        raise ZeroEigenvalueError("window contains a zero eigenvalue")
    return float(np.max(a) / np.min(a))


def effective_condition(window, r: int | None = None) -> float:
    """Condition number capped at ``2 r``."""
    window = np.atleast_1d(np.asarray(window, dtype=float))
    r = window.shape[0] if r is None else int(r)
    return float(min(condition_number(window), 2 * r))


def block_count(r: int, kappa: float, multiplier: float = 10.0) -> float:
    """``B(r) = 10 min(r, 1 + log2 kappa)``, the failure-probability multiplier."""
    return float(multiplier * min(r, 1.0 + math.log2(kappa)))


# ---------------------------------------------------------------------------
# eigen-partition
# ---------------------------------------------------------------------------


def _partition_positive(lam: np.ndarray, s: int, r: int) -> list[tuple[int, ...]]:
    """Partition of window ``s+1 .. s+r`` of a descending spectrum with positive window.

    ``lam`` is 1-based padded: ``lam[t]`` is the t-th eigenvalue and
    ``lam[n + 1]`` is ``-inf``.
    """
    def gap(t: int) -> float:
        return lam[t] - max(lam[t + 1], 0.0)

    blocks = []
    prev = s + r
    while prev > s:
        nxt = s
        for t in range(prev - 1, s, -1):
            if gap(t) > 2.0 * gap(prev) and lam[t] > 2.0 * lam[prev]:
                nxt = t
                break
        blocks.append(tuple(range(prev, nxt, -1)))
        prev = nxt
    return blocks


def eigen_partition(eigvals_star, s: int, r: int) -> list[tuple[int, ...]]:
    """Split window ``s+1 .. s+r`` into contiguous, well-conditioned blocks.

    Returns blocks of 1-based eigenvalue indices, each listed from the
    largest index down. Windows with both signs are split at zero first; the
    negative part is partitioned on the negated, re-sorted spectrum.
    """
    vals = _desc(eigvals_star)
    n = vals.shape[0]
    win = _window(vals, s, r)
    if np.any(win == 0.0):
        raise ZeroEigenvalueError("window contains a zero eigenvalue")

    n_pos = int(np.sum(win > 0))
    blocks: list[tuple[int, ...]] = []
    if n_pos:
        lam = np.concatenate([[np.inf], vals, [-np.inf]])
        blocks += _partition_positive(lam, s, n_pos)
    n_neg = r - n_pos
    if n_neg:
        neg = -vals[::-1]
        lam = np.concatenate([[np.inf], neg, [-np.inf]])
        s_neg = n - (s + r)
        for blk in _partition_positive(lam, s_neg, n_neg):
            blocks.append(tuple(sorted((n + 1 - t for t in blk), reverse=True)))
    return blocks


# ---------------------------------------------------------------------------
# scalar helper functions
# ---------------------------------------------------------------------------


def H_func(gamma: float, gamma_prime: float) -> float:
    """Summation constant for geometric block sums.

    ``a = 1 - 2**-(gamma + gamma')``; returns ``1/a + 1`` when ``gamma' = 0``
    and ``1/a + gamma/(gamma+gamma') * (a gamma'/(gamma+gamma'))**(gamma'/gamma)``
    otherwise.
    """
    if gamma <= 0 or gamma_prime < 0:
        raise DomainError("H needs gamma > 0 and gamma' >= 0")
    a = 1.0 - 2.0 ** (-(gamma + gamma_prime))
    if gamma_prime == 0:
        return 1.0 / a + 1.0
    tot = gamma + gamma_prime
    return 1.0 / a + (gamma / tot) * (a * gamma_prime / tot) ** (gamma_prime / gamma)


def F(x: float) -> float:
    """``x**2 * exp(x)`` for ``x >= 0``."""
    if x < 0:
        raise DomainError("F is defined for x >= 0")
    return x * x * math.exp(x)


def F_inv(y: float) -> float:
    """Inverse of :func:`F` by bisection.

    The bracket comes from elementary bounds on the inverse: below by
    ``max(0, log y / 2, log y - 2 log log y)`` and above by ``sqrt(y)`` for
    ``y <= e`` or ``log y`` for ``y > e``.
    """
    if not y > 0 or not math.isfinite(y):
        raise DomainError("F_inv needs a finite y > 0")
    if y <= math.e:
        lo, hi = 0.0, math.sqrt(y)
    else:
        ly = math.log(y)
        lo = max(ly / 2.0, ly - 2.0 * math.log(ly))
        hi = ly
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if F(mid) < y:
            lo = mid
        else:
            hi = mid
    # pick the endpoint with the smaller residual
    return lo if abs(F(lo) - y) <= abs(F(hi) - y) else hi


def bernoulli_tail_bound(w, p, delta: float, gamma: float | None = None) -> float:
    """High-probability upper bound on ``sum_i w_i (X_i - p_i)``.

    With ``Omega = ||w||_inf^2 / sum_i p_i w_i^2`` the bound is
    ``2 log(1/delta) / F_inv(2 Omega log(1/delta)) * ||w||_inf`` and holds
    with probability at least ``1 - delta``. When ``gamma`` is given the
    gamma-parametrized form is returned instead:
    ``2 log(1/delta) / F_inv(2 gamma log(1/delta)) *
    (||w||_inf + min(sqrt(gamma p*) ||w||_2, sqrt(gamma n pbar) ||w||_inf))``.

    Raises
    ------
    DegenerateWeightsError
        If ``sum_i p_i w_i^2 = 0``; the sum is then identically zero and the
        bound carries no information.
    """
    w = np.asarray(w, dtype=float).ravel()
    p = np.broadcast_to(np.asarray(p, dtype=float), w.shape)
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if np.any(p < 0) or np.any(p > 1):
        raise DomainError("probabilities must lie in [0, 1]")
    winf = float(np.max(np.abs(w))) if w.size else 0.0
    var = float(np.sum(p * w * w))
    if var == 0.0 or winf == 0.0:
        raise DegenerateWeightsError("sum p_i w_i^2 is zero; the bound is vacuous")
    L = math.log(1.0 / delta)
    if gamma is None:
        omega = winf**2 / var
        return 2.0 * L / F_inv(2.0 * omega * L) * winf
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    pstar = float(np.max(p))
    pbar = float(np.mean(p))
    extra = min(math.sqrt(gamma * pstar) * float(np.linalg.norm(w)),
                math.sqrt(gamma * w.size * pbar) * winf)
    return 2.0 * L / F_inv(2.0 * gamma * L) * (winf + extra)


def delta_star_floor(n: int, p: float, C: float = 1.0) -> float:
    """``exp(-n p log(n p) / (2 C))``, the smallest usable failure probability."""
    np_ = n * p
    if np_ <= 1:
        raise DomainError("delta_star_floor needs n p > 1")
    return math.exp(-np_ * math.log(np_) / (2.0 * C))


def variance_scale(n: int, p: float) -> float:
    """``p (1 + (log n)^4 / (n p)^4)``: the order of ``Var ||A||_op``."""
    return p * (1.0 + (math.log(n) / (n * p)) ** 4)


def tail_scale(n: int, p: float) -> float:
    """``sqrt(p) (1 + (log n)^2 / (n p)^2)``: sub-Gaussian scale of ``||A||_op``."""
    return math.sqrt(p) * (1.0 + (math.log(n) / (n * p)) ** 2)


def tail_probability_bound(t: float, sigma: float, C1: float = 1.0) -> float:
    """``min(1, exp(1 - t^2 / (C1 sigma^2)))``."""
    return min(1.0, math.exp(1.0 - t * t / (C1 * sigma * sigma)))


# ---------------------------------------------------------------------------
# inputs and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundInputs:
    """Deterministic ingredients of the binary-matrix bounds.

    ``eigvals_star`` is the spectrum of the expectation (of ``A`` or ``L``)
    and ``(s, r)`` the window in descending order. ``pstar``, ``pbar_star``
    and ``pbar`` are the max entry, max row mean and off-diagonal mean of
    the edge-probability matrix.
    """

    eigvals_star: np.ndarray
    s: int
    r: int
    n: int
    pstar: float
    pbar_star: float
    delta: float
    alpha: float
    mnorm_Ustar: float
    pbar: float = 0.0
    mnorm_Ubar_star: float = math.inf
    mnorm_Astar: float = math.inf
    maxnorm_Astar: float = math.inf
    psd: bool = False
    constants: Constants = field(default_factory=Constants)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise DomainError("delta must lie in (0, 1)")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        for name in ("pstar", "pbar_star", "pbar"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise DomainError(f"{name} must lie in [0, 1]")

    @property
    def window(self) -> np.ndarray:
        return _window(_desc(self.eigvals_star), self.s, self.r)

    @classmethod
    def from_probabilities(cls, Pstar, s: int, r: int, delta: float, alpha: float,
                           operator: str = "adjacency",
                           constants: Constants | None = None) -> "BoundInputs":
        """Compute every ingredient from an edge-probability matrix.

        ``operator="laplacian"`` takes the spectrum and eigenvectors from the
        expected Laplacian while the density figures still come from
        ``Pstar``.
        """
        from .models import laplacian

        P = np.asarray(Pstar, dtype=float)
        n = P.shape[0]
        M = laplacian(P) if operator == "laplacian" else P
        if operator not in ("adjacency", "laplacian"):
            raise InputError(f"unknown operator {operator!r}")
        es = eigh(M)
        win = select_window(es, "descending-value", s, r)
        scale = max(1.0, float(np.max(np.abs(es.values))))
        nonzero = np.abs(es.values) > 1e-10 * scale
        off = P[~np.eye(n, dtype=bool)]
        return cls(
            eigvals_star=es.values,
            s=s,
            r=r,
            n=n,
            pstar=float(np.max(P)),
            pbar_star=float(np.max(P.mean(axis=1))),
            pbar=float(off.mean()) if off.size else 0.0,
            delta=delta,
            alpha=alpha,
            mnorm_Ustar=two_to_infty_norm(win.vectors),
            mnorm_Ubar_star=two_to_infty_norm(es.vectors[:, nonzero]),
            mnorm_Astar=two_to_infty_norm(M),
            maxnorm_Astar=max_norm(M),
            psd=bool(np.min(es.values) >= -1e-10 * scale),
            constants=constants or Constants(),
        )


@dataclass
class BoundReport:
    """Named ledger of bound terms. ``terms`` holds every intermediate value."""

    delta_star_gap: float
    kappa_bar: float
    lambda_min_star: float
    R: float = math.nan
    g: float = math.nan
    M: float = math.nan
    eta: float = math.nan
    sigma: float = math.nan
    xi1: float = math.nan
    xi2: float = math.nan
    xi3: float = math.nan
    theta_star: float | None = None
    condition_A4_satisfied: bool = False
    condition_margin: float = math.nan
    bound_d2inf_surrogate: float = math.nan
    bound_d2inf: float = math.nan
    terms: dict[str, float] = field(default_factory=dict)

    def as_items(self) -> list[tuple[str, float | bool | None]]:
        """Flatten into ``(key, value)`` pairs: headline fields first, then ``terms``."""
        head = [(f.name, getattr(self, f.name)) for f in fields(self) if f.name != "terms"]
        return head + sorted(self.terms.items())


# ---------------------------------------------------------------------------
# binary-matrix bounds
# ---------------------------------------------------------------------------


def quantities_from(n: int, r: int, delta: float, alpha: float, pbar_star: float
                    ) -> tuple[float, float, float]:
    """Return ``(R, g, M)``.

    ``R = log(n/delta) + r``,
    ``g = sqrt(n pbar*) + R / (alpha log R)``,
    ``M = sqrt(n pbar* log(n/delta)) + log(n/delta)``.
    """
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    lnd = math.log(n / delta)
    R = lnd + r
    if R <= 1:
        raise DomainError(f"R(delta) = {R} must exceed 1")
    g = math.sqrt(n * pbar_star) + R / (alpha * math.log(R))
    M = math.sqrt(n * pbar_star * lnd) + lnd
    return R, g, M


def quantities(inputs: BoundInputs) -> tuple[float, float, float]:
    """``(R, g, M)`` for a :class:`BoundInputs`; see :func:`quantities_from`."""
    return quantities_from(inputs.n, inputs.r, inputs.delta, inputs.alpha, inputs.pbar_star)


def _base_report(inputs: BoundInputs) -> BoundReport:
    win = inputs.window
    lam_min = lambda_min(win)
    if lam_min == 0.0:
        raise ZeroEigenvalueError("window contains a zero eigenvalue")
    R, g, M = quantities(inputs)
    rep = BoundReport(
        delta_star_gap=effective_gap(inputs.eigvals_star, inputs.s, inputs.r),
        kappa_bar=effective_condition(win, inputs.r),
        lambda_min_star=lam_min,
        R=R,
        g=g,
        M=M,
    )
    kappa = condition_number(win)
    B = block_count(inputs.r, kappa, inputs.constants.blocks)
    rep.terms.update(kappa=kappa, B_r=B, failure_probability=(B + 1.0) * inputs.delta,
                     log_n_over_delta=math.log(inputs.n / inputs.delta))
    return rep


def binary_bound_adjacency(inputs: BoundInputs) -> BoundReport:
    """Bounds for binary matrices with independent entries (adjacency form).

    Reports the condition ``Delta* >= C kappa_bar g`` (as a flag, never an
    error), the bound towards ``A U* (Lambda*)^{-1}`` in
    ``bound_d2inf_surrogate``, the bound towards ``U*`` in ``bound_d2inf``,
    and both corollary simplifications in ``terms``.
    """
    c = inputs.constants
    rep = _base_report(inputs)
    D, kb, lm, R, g = rep.delta_star_gap, rep.kappa_bar, rep.lambda_min_star, rep.R, rep.g
    n, a = inputs.n, inputs.alpha
    pstar, pbs, U = inputs.pstar, inputs.pbar_star, inputs.mnorm_Ustar

    rep.xi1 = inputs.mnorm_Astar / lm
    rep.xi2 = math.sqrt(inputs.maxnorm_Astar) / math.sqrt(lm) if inputs.psd else math.inf
    rep.xi3 = inputs.mnorm_Ubar_star
    m1 = rep.xi1
    m2 = math.sqrt(kb * pstar / lm) if inputs.psd else math.inf
    m3 = kb * rep.xi3
    min_term = min(x for x in (m1, m2, m3))
    lead = (math.sqrt(n * pbs) + math.sqrt(math.log(n / inputs.delta))) / D

    logR = math.log(R)
    sq_rp = math.sqrt(R * pstar)
    dense = math.sqrt(n * pbs * R**a) / (a * logR)

    surr_main = (kb * g * (1.0 + R / lm) * U + sq_rp / lm * (kb * g + dense)) / D
    u_main = (kb * g / D + R / lm) * U + sq_rp / lm * (1.0 + dense / D)
    rep.bound_d2inf_surrogate = c.bound * (surr_main + lead * min_term)
    rep.bound_d2inf = c.bound * (u_main + lead * min_term)

    need = c.condition * kb * g
    rep.condition_A4_satisfied = D >= need
    rep.condition_margin = D - need

    cor_full = inputs.mnorm_Ubar_star <= c.corollary * U
    cor_typ = lm >= c.corollary * n * pstar / (math.sqrt(n) * U) if U > 0 else False
    rep.terms.update(
        min_term_xi1=m1,
        min_term_xi2=m2,
        min_term_xi3=m3,
        min_term=min_term,
        min_term_prefactor=lead,
        corollary_full_applies=float(cor_full),
        corollary_full_surrogate=c.bound * surr_main,
        corollary_full_d2inf=c.bound * u_main,
        corollary_typical_applies=float(cor_typ),
        corollary_typical_surrogate=c.bound * kb * g / D * (1.0 + R / lm) * U,
        corollary_typical_d2inf=c.bound * ((kb * g / D + R / lm) * U + sq_rp / lm),
    )
    return rep


def theta_star(window, Lstar_diag) -> float:
    """``min_j |Lambda_j| / min_{j,k} |Lambda_j - L*_kk|``.

    Raises
    ------
    ThetaUndefinedError
        If some window eigenvalue coincides with a diagonal entry.
    """
    lam = np.atleast_1d(np.asarray(window, dtype=float))
    diag = np.atleast_1d(np.asarray(Lstar_diag, dtype=float))
    denom = float(np.min(np.abs(lam[:, None] - diag[None, :])))
    if denom == 0.0:
        raise ThetaUndefinedError("a window eigenvalue equals a diagonal entry of L*")
    return float(np.min(np.abs(lam))) / denom


def binary_bound_laplacian(inputs: BoundInputs, Lstar_diag) -> BoundReport:
    """Bounds for the unnormalized Laplacian via diagonal surgery.

    ``Theta = theta * Theta*`` is used in the condition and bounds; the flag
    ``theta_estimate_valid`` in ``terms`` records whether the gap condition
    ``min |Lambda_j - L*_kk| >= theta_gap * M`` that justifies it holds.
    ``bound_d2inf_surrogate`` is the bound towards ``U* + V``.
    """
    c = inputs.constants
    rep = _base_report(inputs)
    D, kb, lm, R, g, M = (rep.delta_star_gap, rep.kappa_bar, rep.lambda_min_star,
                          rep.R, rep.g, rep.M)
    n, a, r = inputs.n, inputs.alpha, inputs.r
    pstar, pbs, U = inputs.pstar, inputs.pbar_star, inputs.mnorm_Ustar

    win = inputs.window
    diag = np.atleast_1d(np.asarray(Lstar_diag, dtype=float))
    th_star = theta_star(win, diag)
    min_sep = float(np.min(np.abs(win[:, None] - diag[None, :])))
    th = c.theta * th_star
    rep.theta_star = th_star
    kprime = kb + n * pbs / lm
    logR = math.log(R)
    sq_rp = math.sqrt(R * pstar)

    lead = M**2 / D**2 + th * (kprime * g + M) / D
    tail = th * M * math.sqrt(pstar) / (D * lm) * (
        math.sqrt(n * pbs) + math.sqrt(R ** (1.0 + a)) / (a * logR))
    rep.bound_d2inf_surrogate = c.bound * (
        lead * ((1.0 + th * r / lm) * U + th * sq_rp / lm) + tail)
    rep.bound_d2inf = c.bound * ((lead + th * r / lm) * U + th * sq_rp / lm + tail)

    need = c.condition * (th * kprime * g + (th + 1.0) * M)
    rep.condition_A4_satisfied = D >= need
    rep.condition_margin = D - need
    rep.terms.update(
        theta=th,
        kappa_prime=kprime,
        min_window_diag_separation=min_sep,
        theta_estimate_valid=float(min_sep >= c.theta_gap * M),
    )
    return rep


# ---------------------------------------------------------------------------
# generic bounds
# ---------------------------------------------------------------------------


def independent_plugins(mnorm_Astar: float, E_inf: float, lambda_minus: float,
                        lambda_min_star: float, m: int = 1) -> tuple[float, float, float]:
    """``(L1, L2, L3)`` for independent (``m = 1``) or ``m``-dependent rows."""
    L1 = math.sqrt(2.0 * m) * (mnorm_Astar + E_inf)
    L2 = float(m)
    L3 = m * (E_inf + lambda_minus + mnorm_Astar) / lambda_min_star
    return L1, L2, L3


def generic_bound_terms(*, L1: float, L2: float, L3: float, lambda_minus: float,
                        E_plus: float, Ebar_plus: float, E_inf: float, b_inf: float,
                        b2: float, eigvals_star, s: int, r: int, mnorm_Ustar: float,
                        mnorm_EUstar: float, mnorm_Astar: float, maxnorm_Astar: float,
                        mnorm_Ubar_star: float, psd: bool,
                        constants: Constants | None = None) -> BoundReport:
    """Evaluate the generic bounds from high-probability plug-ins.

    ``eta = E_inf + b_inf + b2`` and
    ``sigma = (kappa_bar L2 + L3 + 1) eta + E_plus``. The eigengap condition
    is ``Delta* >= 4 (sigma + L1 + lambda_minus)``; its margin is reported.
    ``bound_d2inf_surrogate`` bounds the distance to ``A U* (Lambda*)^{-1}``
    and ``bound_d2inf`` the distance to ``U*``.
    """
    c = constants or Constants()
    vals = _desc(eigvals_star)
    win = _window(vals, s, r)
    lm = lambda_min(win)
    if lm == 0.0:
        raise ZeroEigenvalueError("window contains a zero eigenvalue")
    D = effective_gap(vals, s, r)
    kb = effective_condition(win, r)
    eta = E_inf + b_inf + b2
    sigma = (kb * L2 + L3 + 1.0) * eta + E_plus

    xi1 = mnorm_Astar / lm
    xi2 = math.sqrt(maxnorm_Astar) / math.sqrt(lm) if psd else math.inf
    xi3 = mnorm_Ubar_star
    mins = (E_plus * xi1, Ebar_plus * math.sqrt(kb) * xi2 if psd else math.inf,
            Ebar_plus * kb * xi3)
    min_term = min(mins)
    common = E_plus * b2 / lm + min_term
    surrogate = c.generic / D * (sigma * (mnorm_Ustar + mnorm_EUstar / lm) + common)
    to_u = c.generic * mnorm_EUstar / lm + c.generic / D * (sigma * mnorm_Ustar + common)

    margin = D - 4.0 * (sigma + L1 + lambda_minus)
    kappa = condition_number(win)
    B = block_count(r, kappa, c.blocks)
    return BoundReport(
        delta_star_gap=D,
        kappa_bar=kb,
        lambda_min_star=lm,
        eta=eta,
        sigma=sigma,
        xi1=xi1,
        xi2=xi2,
        xi3=xi3,
        condition_A4_satisfied=margin >= 0,
        condition_margin=margin,
        bound_d2inf_surrogate=surrogate,
        bound_d2inf=to_u,
        terms={"min_term_xi1": mins[0], "min_term_xi2": mins[1], "min_term_xi3": mins[2],
               "min_term": min_term, "kappa": kappa, "B_r": B},
    )


def surgery_bound_terms(*, theta: float, L1: float, L2: float, L3: float,
                        lambda_minus: float, E_plus: float, Et_inf: float, bt_inf: float,
                        bt2: float, eigvals_star, s: int, r: int, mnorm_Ustar: float,
                        mnorm_EUstar: float, mnorm_Atilde_star: float,
                        constants: Constants | None = None) -> BoundReport:
    """Generic bounds after subtracting a diagonal matrix from ``A``.

    ``sigma~ = (kappa_bar L2 + L3 + 1)(Et_inf + bt_inf + bt2) + E_plus``;
    the gap condition is
    ``Delta* >= 4 (theta sigma~ + L1 + lambda_minus + E_plus)``.
    ``bound_d2inf_surrogate`` bounds the distance to ``U* + V``.
    """
    c = constants or Constants()
    vals = _desc(eigvals_star)
    win = _window(vals, s, r)
    lm = lambda_min(win)
    if lm == 0.0:
        raise ZeroEigenvalueError("window contains a zero eigenvalue")
    D = effective_gap(vals, s, r)
    kb = effective_condition(win, r)
    eta = Et_inf + bt_inf + bt2
    sigma = (kb * L2 + L3 + 1.0) * eta + E_plus
    lead = E_plus**2 / D**2 + theta * sigma / D
    cross = theta * (bt2 + mnorm_Atilde_star) * E_plus / (lm * D)
    surrogate = c.surgery * (lead * (mnorm_Ustar + theta * mnorm_EUstar / lm) + cross)
    to_u = c.surgery * (theta * mnorm_EUstar / lm + lead * mnorm_Ustar + cross)
    margin = D - 4.0 * (theta * sigma + L1 + lambda_minus + E_plus)
    return BoundReport(
        delta_star_gap=D,
        kappa_bar=kb,
        lambda_min_star=lm,
        eta=eta,
        sigma=sigma,
        theta_star=None,
        condition_A4_satisfied=margin >= 0,
        condition_margin=margin,
        bound_d2inf_surrogate=surrogate,
        bound_d2inf=to_u,
        terms={"theta": theta, "kappa": condition_number(win)},
    )


def surgery_correction(E, Ustar, lam_star, sigma_diag) -> np.ndarray:
    """Rows ``V_k = E_k^T U* (Lambda* - Sigma_kk I)^{-1}`` of the surgery correction."""
    E = np.asarray(E, dtype=float)
    Ustar = np.asarray(Ustar, dtype=float)
    if Ustar.ndim == 1:
        Ustar = Ustar[:, None]
    lam = np.atleast_1d(np.asarray(lam_star, dtype=float))
    sig = np.asarray(sigma_diag, dtype=float).ravel()
    denom = lam[None, :] - sig[:, None]
    if np.any(denom == 0.0):
        raise ThetaUndefinedError("Sigma_kk coincides with a window eigenvalue")
    return (E @ Ustar) / denom


# ---------------------------------------------------------------------------
# binary-tree block model
# ---------------------------------------------------------------------------


def first_split_tail(lambda1: float, lambda2: float, t: float, assortative: bool = True) -> float:
    """Upper bound on the log-probability that one node's split statistic is on the wrong side.

    Assortative: bound on ``log P(Z_i <= t)``. Dis-assortative: bound on
    ``log P(Z_i >= -t)``.
    """
    if not lambda1 > abs(lambda2) > 0:
        raise DomainError("need lambda1 > |lambda2| > 0")
    plus, minus = lambda1 + lambda2, lambda1 - lambda2
    sq = 0.5 * (math.sqrt(plus) - math.sqrt(minus)) ** 2
    ratio = plus / minus if assortative else minus / plus
    return 0.5 * t * math.log(ratio) - sq


def first_split_xi(lambda1: float, lambda2: float, n: int, pstar: float, K: int,
                   alpha: float, assortative: bool = True) -> tuple[float, float]:
    """``(xi_n1, xi_n2)`` error terms of the first-split recovery condition."""
    ln = math.log(n)
    lll = alpha * math.log(ln)
    l2 = abs(lambda2)
    xi1 = (math.sqrt(lambda1) + ln / lll) * (1.0 + ln / l2) + (
        math.sqrt(ln * n * pstar) / l2 * (ln + math.sqrt(lambda1 * ln**alpha)) / lll)
    if assortative:
        xi2 = min(math.sqrt(n * pstar), math.sqrt(l2 * K))
    else:
        xi2 = min(math.sqrt(lambda1 * n * pstar / l2), math.sqrt(l2 * K))
    return xi1, xi2


def abar(a: Sequence[float], r: int) -> float:
    """``(a_0 + sum_{j=1}^{r-1} 2^{j-1} a_j) / 2^{r-1}``."""
    a = [float(x) for x in a]
    return (a[0] + sum(2 ** (j - 1) * a[j] for j in range(1, r))) / 2 ** (r - 1)


@dataclass(frozen=True)
class RecoveryFlags:
    """Layer-wise sufficient conditions and the leaf-level impossibility flag.

    ``layers[l]`` (``l = 2 .. ell + 1``) is True when the sufficient
    condition for recovering every layer-``l`` mega-community holds.
    ``margins[r]`` is ``|sqrt(abar_r) - sqrt(a_r)| - sqrt(2^(d-r+1))``.
    """

    layers: dict[int, bool]
    margins: dict[int, float]
    leaves_impossible: bool


def partial_recovery_condition(a: Sequence[float], ell: int | None = None) -> RecoveryFlags:
    """Evaluate the mega-community recovery conditions for ``p_j = rho a_j``.

    For ``r = d, d-1, ..., d-ell+1`` the condition
    ``|sqrt(abar_r) - sqrt(a_r)| > sqrt(2^(d-r+1))`` governs layer
    ``d - r + 2``; every layer up to ``l`` needs all conditions with
    ``r >= d - l + 2``. Also reports whether ``|sqrt(a_0) - sqrt(a_1)| < sqrt(K)``,
    under which no method recovers all leaves.
    """
    a = [float(x) for x in a]
    d = len(a) - 1
    if d < 1:
        raise InputError("need at least two coefficients")
    diffs = np.diff(a)
    if not (np.all(diffs <= 0) or np.all(diffs >= 0)):
        raise NotMonotoneError("coefficients must be monotone (ties allowed)")
    ell = d if ell is None else int(ell)
    if not 1 <= ell <= d:
        raise OutOfRangeError(f"ell must lie in 1..{d}")
    margins = {}
    layers = {}
    ok = True
    for r in range(d, d - ell, -1):
        margins[r] = abs(math.sqrt(abar(a, r)) - math.sqrt(a[r])) - math.sqrt(2 ** (d - r + 1))
        ok = ok and margins[r] > 0
        layers[d - r + 2] = ok
    impossible = abs(math.sqrt(a[0]) - math.sqrt(a[1])) < math.sqrt(2**d)
    return RecoveryFlags(layers=layers, margins=margins, leaves_impossible=impossible)


# ---------------------------------------------------------------------------
# leading-eigenvector inputs for inhomogeneous graphs
# ---------------------------------------------------------------------------


def leading_vector_inputs(Pstar) -> dict[str, float]:
    """``zeta = sqrt(n) ||u1*||_inf``, the leading gap and density figures of ``Pstar``."""
    P = np.asarray(Pstar, dtype=float)
    n = P.shape[0]
    es = eigh(P)
    order = np.argsort(-np.abs(es.values), kind="stable")
    lam = es.values[order]
    u1 = es.vectors[:, order[0]]
    gap = min(abs(lam[0]), float(np.min(np.abs(lam[0] - lam[1:]))) if n > 1 else math.inf)
    off = P[~np.eye(n, dtype=bool)]
    return {
        "zeta": math.sqrt(n) * float(np.max(np.abs(u1))),
        "lambda1": float(lam[0]),
        "gap": gap,
        "pstar": float(P.max()),
        "pbar_star": float(P.mean(axis=1).max()),
        "pbar": float(off.mean()) if off.size else 0.0,
    }
