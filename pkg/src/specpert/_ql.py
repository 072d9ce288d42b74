"""Compiled kernels for the dense symmetric eigensolver.

``tred2`` reduces a symmetric matrix to tridiagonal form with Householder
reflections and accumulates the orthogonal factor. ``tql2`` then diagonalizes
the tridiagonal matrix with implicitly shifted QL sweeps, rotating the
accumulated factor along the way. Both follow the classic EISPACK routines of
the same names. The factor is stored transposed (row ``k`` holds column
``k``) so the rotation updates in ``tql2`` touch contiguous memory.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EPS = 2.0**-52


@njit(cache=True)
def tred2(a):
    """Householder tridiagonalization.

    Returns ``(z, d, e)`` where ``d`` is the diagonal, ``e[1:]`` the
    subdiagonal of the tridiagonal matrix, and ``z`` the orthogonal matrix
    with ``a = z @ T @ z.T``.
    """
    n = a.shape[0]
    v = a.copy()
    d = np.empty(n)
    e = np.zeros(n)
    for j in range(n):
        d[j] = v[n - 1, j]

    for i in range(n - 1, 0, -1):
        scale = 0.0
        h = 0.0
        for k in range(i):
            scale += abs(d[k])
        if scale == 0.0:
            e[i] = d[i - 1]
            for j in range(i):
                d[j] = v[i - 1, j]
                v[i, j] = 0.0
                v[j, i] = 0.0
        else:
            for k in range(i):
                d[k] /= scale
                h += d[k] * d[k]
            f = d[i - 1]
            g = math.sqrt(h)
            if f > 0:
                g = -g
            e[i] = scale * g
            h = h - f * g
            d[i - 1] = f - g
            for j in range(i):
                e[j] = 0.0
            for j in range(i):
                f = d[j]
                v[j, i] = f
                g = e[j] + v[j, j] * f
                for k in range(j + 1, i):
                    g += v[k, j] * d[k]
                    e[k] += v[k, j] * f
                e[j] = g
            f = 0.0
            for j in range(i):
                e[j] /= h
                f += e[j] * d[j]
            hh = f / (h + h)
            for j in range(i):
                e[j] -= hh * d[j]
            for j in range(i):
                f = d[j]
                g = e[j]
                for k in range(j, i):
                    v[k, j] -= f * e[k] + g * d[k]
                d[j] = v[i - 1, j]
                v[i, j] = 0.0
        d[i] = h

    for i in range(n - 1):
        v[n - 1, i] = v[i, i]
        v[i, i] = 1.0
        h = d[i + 1]
        if h != 0.0:
            for k in range(i + 1):
                d[k] = v[k, i + 1] / h
            for j in range(i + 1):
                g = 0.0
                for k in range(i + 1):
                    g += v[k, i + 1] * v[k, j]
                for k in range(i + 1):
                    v[k, j] -= g * d[k]
        for k in range(i + 1):
            v[k, i + 1] = 0.0
    for j in range(n):
        d[j] = v[n - 1, j]
        v[n - 1, j] = 0.0
    v[n - 1, n - 1] = 1.0
    e[0] = 0.0
    return v, d, e


@njit(cache=True)
def tql2(zt, d, e, max_sweeps):
    """Implicit-shift QL on the tridiagonal ``(d, e)``.

    ``zt`` is the transposed orthogonal factor from :func:`tred2` and is
    updated in place. Returns the total sweep count, or -1 when it would
    exceed ``max_sweeps``. Eigenvalues are left unsorted in ``d``.
    """
    n = d.shape[0]
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0

    f = 0.0
    tst1 = 0.0
    sweeps = 0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1:
            if abs(e[m]) <= EPS * tst1:
                break
            m += 1
        if m > l:
            while True:
                sweeps += 1
                if sweeps > max_sweeps:
                    return -1
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h

                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(n):
                        h = zt[i + 1, k]
                        zt[i + 1, k] = s * zt[i, k] + c * h
                        zt[i, k] = c * zt[i, k] - s * h
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= EPS * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0
    return sweeps
