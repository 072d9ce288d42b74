"""Random matrix models: expectations, samplers and closed-form spectra.

Supported model kinds are Erdos-Renyi (``er``), an arbitrary inhomogeneous
edge-probability matrix (``inhomogeneous``), the stochastic block model
(``sbm``), the binary-tree block model (``btsbm``) and symmetric Gaussian
matrices (``gaussian``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import rng as _rng
from .errors import InputError, InvalidProbabilityError, NotMonotoneError, ShapeMismatchError
from .linalg import as_symmetric, eigh

DiagMode = Literal["zeroed", "kept"]
KINDS = ("er", "inhomogeneous", "sbm", "btsbm", "gaussian")


# ---------------------------------------------------------------------------
# model description
# ---------------------------------------------------------------------------


def _check_probs(x, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x < 0) or np.any(x > 1):
        raise InvalidProbabilityError(f"{what} must lie in [0, 1]")
    return x


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Tagged description of a generative model.

    Use the class-method constructors rather than filling fields by hand;
    they validate the parameters for the chosen kind.
    """

    kind: str
    n: int
    p: float | None = None
    P: np.ndarray | None = None
    sizes: tuple[int, ...] | None = None
    B: np.ndarray | None = None
    diag: DiagMode = "zeroed"
    depth: int | None = None
    m: int | None = None
    probs: tuple[float, ...] | None = None
    mean: np.ndarray | None = None
    std: np.ndarray | None = None

    @classmethod
    def er(cls, n: int, p: float) -> "ModelSpec":
        _check_probs(p, "p")
        return cls(kind="er", n=int(n), p=float(p))

    @classmethod
    def inhomogeneous(cls, P) -> "ModelSpec":
        P = as_symmetric(_check_probs(P, "P"))
        return cls(kind="inhomogeneous", n=P.shape[0], P=P)

    @classmethod
    def sbm(cls, sizes, B, diag: DiagMode = "zeroed") -> "ModelSpec":
        sizes = tuple(int(s) for s in sizes)
        if not sizes or min(sizes) < 1:
            raise InputError("block sizes must be positive")
        B = as_symmetric(_check_probs(B, "B"))
        if B.shape[0] != len(sizes):
            raise ShapeMismatchError(f"B is {B.shape} but {len(sizes)} block sizes were given")
        if diag not in ("zeroed", "kept"):
            raise InputError(f"diag must be 'zeroed' or 'kept', got {diag!r}")
        return cls(kind="sbm", n=sum(sizes), sizes=sizes, B=B, diag=diag)

    @classmethod
    def four_parameter(cls, K: int, m: int, a: float, b: float, rho: float,
                       diag: DiagMode = "zeroed") -> "ModelSpec":
        """Balanced SBM with ``B = rho * ((a - b) I + b 11^T)``."""
        B0 = (a - b) * np.eye(K) + b * np.ones((K, K))
        return cls.sbm([m] * K, rho * B0, diag=diag)

    @classmethod
    def btsbm(cls, depth: int, m: int, probs, diag: DiagMode = "zeroed") -> "ModelSpec":
        if depth < 1 or m < 1:
            raise InputError("btsbm needs depth >= 1 and m >= 1")
        probs = tuple(float(x) for x in _check_probs(probs, "probs"))
        if len(probs) != depth + 1:
            raise InputError(f"btsbm depth {depth} needs {depth + 1} probabilities")
        return cls(kind="btsbm", n=m * 2**depth, depth=int(depth), m=int(m), probs=probs, diag=diag)

    @classmethod
    def gaussian(cls, mean, std) -> "ModelSpec":
        mean = as_symmetric(mean)
        std = np.broadcast_to(np.asarray(std, dtype=float), mean.shape).copy()
        std = as_symmetric(std)
        if np.any(std < 0):
            raise InputError("std must be nonnegative")
        return cls(kind="gaussian", n=mean.shape[0], mean=mean, std=std)

    # -- convenience -------------------------------------------------------

    def block_sizes(self) -> tuple[int, ...]:
        if self.kind == "sbm":
            return self.sizes
        if self.kind == "btsbm":
            return (self.m,) * 2**self.depth
        raise InputError(f"{self.kind} model has no block structure")

    def labels(self) -> np.ndarray:
        """Ground-truth block label per node for block models."""
        return np.repeat(np.arange(len(self.block_sizes())), self.block_sizes())

    def to_lines(self) -> list[str]:
        """Serialize as ``key=value`` lines (matrices as ``;``-separated rows)."""
        out = [f"kind={self.kind}", f"n={self.n}"]
        if self.kind == "er":
            out.append(f"p={self.p!r}")
        elif self.kind == "inhomogeneous":
            out.append(f"P={_mat_str(self.P)}")
        elif self.kind == "sbm":
            out += [f"sizes={','.join(map(str, self.sizes))}", f"B={_mat_str(self.B)}",
                    f"diag={self.diag}"]
        elif self.kind == "btsbm":
            out += [f"depth={self.depth}", f"m={self.m}",
                    f"probs={','.join(repr(x) for x in self.probs)}", f"diag={self.diag}"]
        elif self.kind == "gaussian":
            out += [f"mean={_mat_str(self.mean)}", f"std={_mat_str(self.std)}"]
        return out

    @classmethod
    def from_mapping(cls, kv: dict[str, str]) -> "ModelSpec":
        """Inverse of :meth:`to_lines` on a parsed ``key -> value`` map."""
        kind = kv.get("kind")
        try:
            if kind == "er":
                return cls.er(int(kv["n"]), float(kv["p"]))
            if kind == "inhomogeneous":
                return cls.inhomogeneous(_parse_mat(kv["P"]))
            if kind == "sbm":
                sizes = [int(x) for x in kv["sizes"].split(",")]
                return cls.sbm(sizes, _parse_mat(kv["B"]), diag=kv.get("diag", "zeroed"))
            if kind == "btsbm":
                probs = [float(x) for x in kv["probs"].split(",")]
                return cls.btsbm(int(kv["depth"]), int(kv["m"]), probs,
                                 diag=kv.get("diag", "zeroed"))
            if kind == "gaussian":
                return cls.gaussian(_parse_mat(kv["mean"]), _parse_mat(kv["std"]))
        except KeyError as exc:
            raise InputError(f"model '{kind}' is missing key {exc}") from None
        raise InputError(f"unknown model kind {kind!r}; expected one of {KINDS}")


def _mat_str(M: np.ndarray) -> str:
    return ";".join(",".join(repr(float(x)) for x in row) for row in np.atleast_2d(M))


def _parse_mat(text: str) -> np.ndarray:
    return np.array([[float(x) for x in row.split(",")] for row in text.split(";")])


# ---------------------------------------------------------------------------
# BTSBM structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BtsbmTruth:
    """Ground truth of a binary-tree block model.

    ``layers[l]`` (for ``l`` in ``1 .. depth + 1``) maps every node to its
    layer-``l`` mega-community; layer 1 is the root and layer ``depth + 1``
    the leaves. Closed-form fields are ``None`` unless ``probs`` is strictly
    monotone.
    """

    depth: int
    m: int
    labels: np.ndarray
    codes: tuple[str, ...]
    layers: dict[int, np.ndarray] = field(repr=False)
    lambda1: float | None = None
    lambda2: float | None = None
    gap: float | None = None
    u2: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.labels.shape[0]


def tree_distance(c: int, c2: int) -> int:
    """Highest (1-based) bit at which two cluster codes differ; 0 if equal."""
    return (int(c) ^ int(c2)).bit_length()


def btsbm_build(depth: int, m: int, probs) -> tuple[np.ndarray, BtsbmTruth]:
    """Block matrix ``B`` of a depth-``d`` binary-tree model and its truth.

    Cluster ``c`` (0-based) carries the ``d``-bit code of ``c`` written as
    ``x_d ... x_1``, and ``B[c, c'] = probs[D(c, c')]`` where ``D`` is the
    highest differing bit.
    """
    spec = ModelSpec.btsbm(depth, m, probs)
    K = 2**depth
    idx = np.arange(K)
    D = np.vectorize(tree_distance)(idx[:, None], idx[None, :])
    B = np.asarray(spec.probs)[D]
    labels = np.repeat(idx, m)
    layers = {ell: labels >> (depth - ell + 1) for ell in range(1, depth + 2)}
    codes = tuple(format(c, f"0{depth}b") for c in idx)
    try:
        lam1, lam2, gap, u2 = btsbm_closed_form(depth, m, spec.probs)
    except NotMonotoneError:
        lam1 = lam2 = gap = u2 = None
    truth = BtsbmTruth(depth=depth, m=m, labels=labels, codes=codes, layers=layers,
                       lambda1=lam1, lambda2=lam2, gap=gap, u2=u2)
    return B, truth


def monotone_direction(probs) -> str:
    """Return ``"assortative"`` for strictly decreasing, ``"disassortative"`` for increasing."""
    p = np.asarray(probs, dtype=float)
    diffs = np.diff(p)
    if np.all(diffs < 0):
        return "assortative"
    if np.all(diffs > 0):
        return "disassortative"
    raise NotMonotoneError("probabilities must be strictly monotone")


def btsbm_closed_form(depth: int, m: int, probs) -> tuple[float, float, float, np.ndarray]:
    """Top two eigenvalues, eigengap and second eigenvector of a BTSBM.

    The expectation here has a zero diagonal. Returns
    ``(lambda1, lambda2, gap, u2)`` with ``u2 = (1, ..., 1, -1, ..., -1) / sqrt(n)``.
    """
    p = np.asarray(probs, dtype=float)
    d = int(depth)
    if p.shape[0] != d + 1:
        raise InputError(f"depth {d} needs {d + 1} probabilities")
    direction = monotone_direction(p)
    n = m * 2**d
    inner = sum(2 ** (i - 1) * p[i] for i in range(1, d))
    base = (m - 1) * p[0] + m * inner
    top = m * 2 ** (d - 1) * p[d]
    lam1 = base + top
    lam2 = base - top
    if direction == "assortative":
        gap = n * min(p[d], abs(p[d - 1] - p[d]) / 2)
    else:
        gap = n * abs(p[d - 1] - p[d]) / 2
    u2 = np.concatenate([np.ones(n // 2), -np.ones(n // 2)]) / np.sqrt(n)
    return float(lam1), float(lam2), float(gap), u2


# ---------------------------------------------------------------------------
# expectations and samplers
# ---------------------------------------------------------------------------


def _block_expand(sizes, B: np.ndarray) -> np.ndarray:
    labels = np.repeat(np.arange(len(sizes)), sizes)
    return B[np.ix_(labels, labels)]


def expected_matrix(spec: ModelSpec) -> np.ndarray:
    """Expectation matrix of a model.

    ER has ``p`` off the diagonal and 0 on it. Block models keep or zero the
    diagonal according to ``spec.diag``. Inhomogeneous and Gaussian models
    return their parameter matrix unchanged.
    """
    if spec.kind == "er":
        _check_probs(spec.p, "p")
        out = np.full((spec.n, spec.n), spec.p)
        np.fill_diagonal(out, 0.0)
        return out
    if spec.kind == "inhomogeneous":
        return spec.P.copy()
    if spec.kind == "gaussian":
        return spec.mean.copy()
    if spec.kind == "sbm":
        out = _block_expand(spec.sizes, spec.B)
    elif spec.kind == "btsbm":
        B, _ = btsbm_build(spec.depth, spec.m, spec.probs)
        out = _block_expand(spec.block_sizes(), B)
    else:
        raise InputError(f"unknown model kind {spec.kind!r}")
    if spec.diag == "zeroed":
        np.fill_diagonal(out, 0.0)
    return out


def sample_bernoulli(Pstar, seed: int) -> np.ndarray:
    """Symmetric 0/1 matrix with independent ``Ber(P[i, j])`` entries for ``i <= j``."""
    P = as_symmetric(_check_probs(Pstar, "edge probabilities"))
    n = P.shape[0]
    gen = _rng.stream(seed)
    upper = np.triu(gen.random((n, n)) < P)
    A = upper.astype(float)
    A += np.triu(A, 1).T
    return A


def sample_gaussian(spec: ModelSpec, seed: int) -> np.ndarray:
    """Symmetric matrix with independent ``N(mean[i, j], std[i, j]^2)`` upper entries."""
    if spec.kind != "gaussian":
        raise InputError("sample_gaussian needs a gaussian ModelSpec")
    n = spec.n
    iu = np.triu_indices(n)
    z = _rng.box_muller(_rng.stream(seed), iu[0].shape[0])
    noise = np.zeros((n, n))
    noise[iu] = z * spec.std[iu]
    noise += np.triu(noise, 1).T
    return spec.mean + noise


def sample(spec: ModelSpec, seed: int) -> np.ndarray:
    """Draw one matrix from ``spec`` (Bernoulli or Gaussian as appropriate)."""
    if spec.kind == "gaussian":
        return sample_gaussian(spec, seed)
    return sample_bernoulli(expected_matrix(spec), seed)


# ---------------------------------------------------------------------------
# Laplacian
# ---------------------------------------------------------------------------


def laplacian(A) -> np.ndarray:
    """Unnormalized Laplacian ``D - A``; the diagonal of ``A`` is ignored."""
    A = as_symmetric(A)
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    L = -off
    L[np.diag_indices_from(L)] = off.sum(axis=1)
    return L


@dataclass(frozen=True)
class LaplacianEigen:
    """Spectrum of the expected Laplacian of an SBM in block form.

    ``values`` and ``Ustar`` are the ``K`` eigenpairs whose eigenvectors are
    constant on blocks (descending). Each ``tilde_values[k]`` is an
    eigenvalue with multiplicity ``multiplicities[k] = n_k - 1``.
    """

    values: np.ndarray
    Ustar: np.ndarray
    tilde_values: np.ndarray
    multiplicities: np.ndarray

    def multiset(self) -> np.ndarray:
        """All ``n`` eigenvalues, descending."""
        rest = np.repeat(self.tilde_values, self.multiplicities)
        return np.sort(np.concatenate([self.values, rest]))[::-1]


def laplacian_expected_eigen(sizes, B0, rho: float) -> LaplacianEigen:
    """Block-form eigendecomposition of ``E L`` for an SBM with ``B = rho B0``.

    With ``R = diag(sqrt(n_k / n))``, ``d~ = B0 R^2 1`` and
    ``L~ = diag(d~) - R B0 R = V S V^T``, the block-constant eigenpairs are
    ``(n rho S, Q V)`` with ``Q = Z diag(1 / sqrt(n_k))``; the remaining
    eigenvalues are ``n rho d~_k`` with multiplicity ``n_k - 1``.
    """
    sizes = np.asarray(sizes, dtype=int)
    B0 = as_symmetric(B0)
    if B0.shape[0] != sizes.shape[0] or np.any(sizes < 1):
        raise ShapeMismatchError("B0 must be K x K with K positive block sizes")
    n = int(sizes.sum())
    pi = sizes / n
    Rm = np.diag(np.sqrt(pi))
    dtil = B0 @ pi
    Ltil = np.diag(dtil) - Rm @ B0 @ Rm
    es = eigh(Ltil)
    labels = np.repeat(np.arange(sizes.shape[0]), sizes)
    Q = np.zeros((n, sizes.shape[0]))
    Q[np.arange(n), labels] = 1.0 / np.sqrt(sizes[labels])
    return LaplacianEigen(
        values=n * rho * es.values,
        Ustar=Q @ es.vectors,
        tilde_values=n * rho * dtil,
        multiplicities=sizes - 1,
    )
