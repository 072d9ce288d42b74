"""Spectral clustering, K-medians and hierarchical sign splitting.

The embedding step takes the ``K`` eigenvectors with the largest absolute
eigenvalues of an adjacency matrix, or the ``K`` smallest eigenvectors of an
unnormalized Laplacian. Rows are then grouped with K-medians, whose centre
step is a geometric median (sum of Euclidean distances, not squared).

Hierarchical community detection splits a member set by the sign of the
second eigenvector of its induced submatrix and recurses.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import rng as _rng
from .errors import (
    DegenerateSplitError,
    InputError,
    KMismatchError,
    LayerMissingError,
    OutOfRangeError,
    ShapeMismatchError,
)
from .linalg import as_symmetric, check_finite, extreme_eigenpairs
from .models import BtsbmTruth, laplacian

Operator = Literal["adjacency", "laplacian"]

WEISZFELD_TOL = 1e-9
WEISZFELD_ITERS = 100
ANCHOR_TOL = 1e-12
RESTARTS = 5
EXHAUSTIVE_MAX_K = 10


@dataclass
class ClusterResult:
    """Output of a clustering run.

    ``exact`` and ``misclustering_rate`` are filled only when ground truth
    was supplied; otherwise they are ``None``.
    """

    labels: np.ndarray
    centers: np.ndarray
    exact: bool | None = None
    misclustering_rate: float | None = None
    iterations: int = 0
    objective: float = float("nan")
    history: list[float] = field(default_factory=list, repr=False)


# ---------------------------------------------------------------------------
# embedding
# ---------------------------------------------------------------------------


def spectral_embed(M, K: int, operator: Operator = "adjacency") -> np.ndarray:
    """``n x K`` spectral embedding.

    Adjacency: eigenvectors of the ``K`` largest ``|lambda|`` (ties by signed
    value, descending). Laplacian: eigenvectors of the ``K`` smallest
    eigenvalues.
    """
    M = as_symmetric(M)
    if not 1 <= K <= M.shape[0]:
        raise OutOfRangeError(f"K={K} must lie in 1..{M.shape[0]}")
    if operator == "adjacency":
        ordering = "descending-absolute"
    elif operator == "laplacian":
        ordering = "ascending-value"
    else:
        raise InputError(f"unknown operator {operator!r}")
    return extreme_eigenpairs(M, K, ordering).vectors


# ---------------------------------------------------------------------------
# K-medians
# ---------------------------------------------------------------------------


def geometric_median(X, start=None, tol: float = WEISZFELD_TOL,
                     max_iter: int = WEISZFELD_ITERS) -> np.ndarray:
    """Minimizer of ``sum_i ||x_i - y||_2`` by Weiszfeld iteration.

    When the iterate lands on a data point (within ``ANCHOR_TOL``) the point
    is accepted if it is optimal; otherwise the iterate steps off it along
    the descent direction (the Vardi-Zhang correction), so the iteration
    never stalls at a non-optimal data point.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 1:
        return X[0].copy()
    y = np.median(X, axis=0) if start is None else np.asarray(start, dtype=float).copy()
    for _ in range(max_iter):
        diff = X - y
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        at = dist <= ANCHOR_TOL
        far = ~at
        if not np.any(far):
            return y
        w = 1.0 / dist[far]
        T = (w[:, None] * X[far]).sum(axis=0) / w.sum()
        eta = int(at.sum())
        if eta:
            Rv = (w[:, None] * (X[far] - y)).sum(axis=0)
            rnorm = float(np.linalg.norm(Rv))
            if rnorm <= eta:
                return y
            gamma = min(1.0, eta / rnorm)
            y_new = (1.0 - gamma) * T + gamma * y
        else:
            y_new = T
        step = float(np.linalg.norm(y_new - y))
        y = y_new
        if step <= tol * max(1.0, float(np.linalg.norm(y))):
            break
    return y


def _distances(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - centers[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _seed_centers(X: np.ndarray, K: int, gen: np.random.Generator) -> np.ndarray:
    """K-medians++ seeding: sample each new centre with probability proportional to distance."""
    n = X.shape[0]
    idx = [int(gen.integers(n))]
    dmin = np.linalg.norm(X - X[idx[0]], axis=1)
    for _ in range(1, K):
        total = dmin.sum()
        if total <= 0.0:
            nxt = int(gen.integers(n))
        else:
            nxt = int(np.searchsorted(np.cumsum(dmin), gen.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        idx.append(nxt)
        dmin = np.minimum(dmin, np.linalg.norm(X - X[nxt], axis=1))
    return X[idx].copy()


def _kmedians_once(X: np.ndarray, K: int, gen: np.random.Generator, max_iters: int):
    centers = _seed_centers(X, K, gen)
    D = _distances(X, centers)
    labels = np.argmin(D, axis=1)
    obj = float(D[np.arange(X.shape[0]), labels].sum())
    history = [obj]
    it = 0
    for it in range(1, max_iters + 1):
        new_centers = centers.copy()
        for k in range(K):
            members = X[labels == k]
            if members.shape[0] == 0:
                # re-seed an empty cluster at the worst-served point
                worst = int(np.argmax(D[np.arange(X.shape[0]), labels]))
                new_centers[k] = X[worst]
            else:
                new_centers[k] = geometric_median(members, start=centers[k])
        D = _distances(X, new_centers)
        new_labels = np.argmin(D, axis=1)
        new_obj = float(D[np.arange(X.shape[0]), new_labels].sum())
        centers = new_centers
        history.append(new_obj)
        converged = np.array_equal(new_labels, labels) and new_obj >= obj - 1e-12 * max(1.0, obj)
        labels, obj = new_labels, new_obj
        if converged:
            break
    return labels, centers, obj, it, history


def kmedians(X, K: int, seed: int = 0, max_iters: int = 100, restarts: int = RESTARTS,
             truth=None) -> ClusterResult:
    """Cluster the rows of ``X`` by minimizing ``sum_i min_k ||x_i - v_k||_2``.

    Alternates nearest-centre assignment with a geometric-median centre
    update. ``restarts`` independent seedings (sub-seeded from ``seed``) are
    run and the lowest objective is kept. If ``truth`` is given, the result
    carries the exact-recovery flag and misclustering rate.
    """
    X = check_finite(X, "X")
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if not 1 <= K <= n:
        raise OutOfRangeError(f"K={K} must lie in 1..{n}")
    best = None
    for rep in range(max(1, restarts)):
        gen = _rng.stream(_rng.subseed(seed, "kmedians", rep))
        run = _kmedians_once(X, K, gen, max_iters)
        if best is None or run[2] < best[2]:
            best = run
    labels, centers, obj, it, history = best
    out = ClusterResult(labels=labels.astype(int), centers=centers, iterations=it,
                        objective=obj, history=history)
    if truth is not None:
        out.exact, out.misclustering_rate = recovery_check(labels, truth)
    return out


# ---------------------------------------------------------------------------
# recovery evaluation
# ---------------------------------------------------------------------------


def _best_matching(C: np.ndarray) -> int:
    """Maximum of ``sum_i C[i, pi(i)]`` over permutations of a square matrix."""
    K = C.shape[0]
    if K <= EXHAUSTIVE_MAX_K:
        # exhaustive search over permutations via dynamic programming on subsets
        best = np.full(1 << K, -1, dtype=np.int64)
        best[0] = 0
        for mask in range(1 << K):
            if best[mask] < 0:
                continue
            i = bin(mask).count("1")
            if i == K:
                continue
            for j in range(K):
                if not mask >> j & 1:
                    nm = mask | (1 << j)
                    cand = best[mask] + C[i, j]
                    if cand > best[nm]:
                        best[nm] = cand
        return int(best[-1])
    rows, cols = linear_sum_assignment(C, maximize=True)
    return int(C[rows, cols].sum())


def recovery_check(labels, truth, strict: bool = True) -> tuple[bool, float]:
    """Exact-recovery flag and misclustering rate up to label permutation.

    The rate is the smallest fraction of mismatches over all bijections
    between label alphabets, computed on a square (zero-padded) confusion
    matrix.

    Raises
    ------
    KMismatchError
        If ``strict`` and the two labelings use different numbers of labels.
    """
    labels = np.asarray(labels).ravel()
    truth = np.asarray(truth).ravel()
    if labels.shape != truth.shape:
        raise ShapeMismatchError(f"{labels.shape[0]} labels vs {truth.shape[0]} truth entries")
    if labels.size == 0:
        return True, 0.0
    la, li = np.unique(labels, return_inverse=True)
    ta, ti = np.unique(truth, return_inverse=True)
    if strict and la.size != ta.size:
        raise KMismatchError(f"{la.size} predicted labels vs {ta.size} true labels")
    K = max(la.size, ta.size)
    C = np.zeros((K, K), dtype=np.int64)
    np.add.at(C, (li, ti), 1)
    matched = _best_matching(C)
    rate = 1.0 - matched / labels.size
    return matched == labels.size, float(rate)


def spectral_cluster(A, K: int, operator: Operator = "adjacency", seed: int = 0,
                     truth=None) -> ClusterResult:
    """Embed with :func:`spectral_embed` and group rows with :func:`kmedians`.

    For ``operator="laplacian"``, ``A`` is the adjacency matrix and the
    Laplacian is formed internally. All ``K`` smallest eigenvectors are
    kept, including the constant one, which is the same for every row.
    """
    M = laplacian(A) if operator == "laplacian" else A
    X = spectral_embed(M, K, operator)
    return kmedians(X, K, seed=seed, truth=truth)


# ---------------------------------------------------------------------------
# hierarchical sign splitting
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    """Node of a :class:`HierarchyTree`. ``depth`` is 1 at the root."""

    members: np.ndarray
    depth: int
    lambda2: float | None = None
    sign: np.ndarray | None = field(default=None, repr=False)
    children: list["TreeNode"] = field(default_factory=list)
    leaf_id: int | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class HierarchyTree:
    """Binary tree of member sets produced by :func:`hcd_sign`."""

    root: TreeNode
    n: int

    def leaves(self) -> list[TreeNode]:
        out: list[TreeNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend(reversed(node.children))
        return out

    def labels(self) -> np.ndarray:
        """Leaf id of every index."""
        out = np.empty(self.n, dtype=int)
        for leaf in self.leaves():
            out[leaf.members] = leaf.leaf_id
        return out

    def nodes_at_depth(self, depth: int, strict: bool = True) -> list[TreeNode]:
        """Nodes at ``depth``; with ``strict=False`` shallower leaves stand in for missing ones."""
        out: list[TreeNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.depth == depth:
                out.append(node)
            elif node.is_leaf:
                if strict:
                    raise LayerMissingError(f"a branch stops at depth {node.depth} < {depth}")
                out.append(node)
            else:
                stack.extend(reversed(node.children))
        return out

    def partition_at_depth(self, depth: int, strict: bool = True) -> np.ndarray:
        out = np.empty(self.n, dtype=int)
        for i, node in enumerate(self.nodes_at_depth(depth, strict)):
            out[node.members] = i
        return out

    @property
    def depth(self) -> int:
        return max(leaf.depth for leaf in self.leaves())

    def serialize(self) -> str:
        """Parenthesized form, e.g. ``((0,1),(2,3))``."""
        def rec(node: TreeNode) -> str:
            if node.is_leaf:
                return str(node.leaf_id)
            return "(" + ",".join(rec(c) for c in node.children) + ")"
        return rec(self.root)


StopRule = Literal["K", "depth", "threshold"]


def _second_pair(A: np.ndarray, members: np.ndarray) -> tuple[float, np.ndarray] | None:
    if members.shape[0] < 2:
        return None
    sub = A[np.ix_(members, members)]
    win = extreme_eigenpairs(sub, 2, "descending-absolute")
    return float(win.values[1]), win.vectors[:, 1]


def split_by_sign(A: np.ndarray, members: np.ndarray):
    """Split ``members`` by the sign of the second eigenvector of the induced submatrix.

    Returns ``(lambda2, u2, positive_side, negative_side)``; entries equal to
    zero join the negative side.

    Raises
    ------
    DegenerateSplitError
        If one side is empty or the member set has fewer than two indices.
    """
    pair = _second_pair(A, members)
    if pair is None:
        raise DegenerateSplitError("a single index cannot be split")
    lam2, u2 = pair
    pos = u2 > 0
    if pos.all() or not pos.any():
        raise DegenerateSplitError("second eigenvector has constant sign")
    return lam2, u2, members[pos], members[~pos]


def hcd_sign(A, stop: StopRule = "K", K: int | None = None, depth: int | None = None,
             threshold: float | None = None) -> HierarchyTree:
    """Recursive sign splitting.

    Stop rules
    ----------
    ``"K"``
        Split until there are ``K`` leaves, always splitting the current leaf
        whose second eigenvalue is largest in magnitude.
    ``"depth"``
        Split every node until the leaves sit ``depth`` splits below the root.
    ``"threshold"``
        Split a node only while ``|lambda2|`` of its submatrix exceeds
        ``threshold``.

    A node whose split is degenerate becomes a leaf.
    """
    A = as_symmetric(A)
    n = A.shape[0]
    root = TreeNode(members=np.arange(n), depth=1)

    def try_split(node: TreeNode) -> bool:
        try:
            lam2, u2, pos, neg = split_by_sign(A, node.members)
        except DegenerateSplitError:
            return False
        node.lambda2, node.sign = lam2, u2
        node.children = [TreeNode(members=pos, depth=node.depth + 1),
                         TreeNode(members=neg, depth=node.depth + 1)]
        return True

    if stop == "K":
        if K is None or K < 1:
            raise InputError("stop='K' needs a positive K")
        heap: list[tuple[float, int, TreeNode]] = []
        counter = itertools.count()

        def push(node: TreeNode) -> None:
            pair = _second_pair(A, node.members)
            if pair is not None:
                heapq.heappush(heap, (-abs(pair[0]), next(counter), node))

        push(root)
        n_leaves = 1
        while n_leaves < K and heap:
            _, _, node = heapq.heappop(heap)
            if try_split(node):
                n_leaves += 1
                for child in node.children:
                    push(child)
    elif stop == "depth":
        if depth is None or depth < 0:
            raise InputError("stop='depth' needs a non-negative depth")
        frontier = [root]
        for _ in range(depth):
            nxt = []
            for node in frontier:
                if try_split(node):
                    nxt.extend(node.children)
            frontier = nxt
    elif stop == "threshold":
        if threshold is None:
            raise InputError("stop='threshold' needs a threshold")
        stack = [root]
        while stack:
            node = stack.pop()
            pair = _second_pair(A, node.members)
            if pair is not None and abs(pair[0]) > threshold and try_split(node):
                stack.extend(node.children)
    else:
        raise InputError(f"unknown stop rule {stop!r}")

    tree = HierarchyTree(root=root, n=n)
    for i, leaf in enumerate(tree.leaves()):
        leaf.leaf_id = i
    return tree


def mega_accuracy(tree: HierarchyTree, truth: BtsbmTruth, layer: int | None = None
                  ) -> dict[int, tuple[bool, float]]:
    """Exact flag and misclustering rate of the tree's partition at each layer.

    Layer ``l`` of the truth (1 = root, ``depth + 1`` = leaves) is compared
    with the tree nodes at depth ``l``. If the tree stops short of a layer,
    that layer is reported as not exact and its rate is computed with the
    shallower leaves standing in.
    """
    layers = range(1, truth.depth + 2) if layer is None else [int(layer)]
    out: dict[int, tuple[bool, float]] = {}
    for ell in layers:
        if not 1 <= ell <= truth.depth + 1:
            raise OutOfRangeError(f"layer {ell} outside 1..{truth.depth + 1}")
        try:
            part = tree.partition_at_depth(ell)
            exact, rate = recovery_check(part, truth.layers[ell], strict=False)
        except LayerMissingError:
            part = tree.partition_at_depth(ell, strict=False)
            exact, rate = False, recovery_check(part, truth.layers[ell], strict=False)[1]
        out[ell] = (exact, rate)
    return out


@dataclass(frozen=True)
class ZStatistics:
    """Signed row statistics for the first split."""

    Z: np.ndarray
    min: float
    max: float
    split_ok: bool


def zi_statistics(A, u2star, tau: float = 0.0) -> ZStatistics:
    """``Z_i = s_i A_i^T (sqrt(n) u2*)`` with ``s_i`` the sign of ``u2*_i``.

    For the balanced pattern ``u2* = (1, ..., 1, -1, ..., -1) / sqrt(n)`` this
    is the first-half row sum minus the second-half row sum, negated for
    rows in the second half. ``split_ok`` is ``min Z > tau`` or ``max Z < -tau``.
    """
    A = check_finite(A, "A")
    u = np.asarray(u2star, dtype=float).ravel()
    n = u.shape[0]
    if A.shape != (n, n):
        raise ShapeMismatchError(f"A is {A.shape} but u2star has length {n}")
    scaled = np.sqrt(n) * u
    Z = np.sign(scaled) * (A @ scaled)
    zmin, zmax = float(Z.min()), float(Z.max())
    return ZStatistics(Z=Z, min=zmin, max=zmax, split_ok=zmin > tau or zmax < -tau)
