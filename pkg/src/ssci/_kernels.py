"""Compiled inner loops for the path solvers and the path partition.

All routines work on the covariance form of the least-squares loss:
``G = X'X/n`` and ``c = X'y/n``, so a coordinate update costs O(1) when the
coefficient does not move and O(p) when it does.
"""

import numpy as np
from numba import njit

LASSO = 0
SCAD = 1
MCP = 2


@njit(cache=True)
def univariate_minimizer(z, v, lam, family, a):
    """argmin_b (v/2) b^2 - z b + pen(b; lam).

    With v == 1 these are the usual soft / SCAD / firm thresholding rules.
    Requires v > 1/(a-1) for SCAD and v > 1/a for MCP.
    """
    az = abs(z)
    if az <= lam:
        return 0.0
    s = 1.0 if z > 0 else -1.0
    if family == LASSO:
        return s * (az - lam) / v
    if family == MCP:
        if az <= a * lam * v:
            return s * (az - lam) / (v - 1.0 / a)
        return z / v
    # SCAD
    if az <= lam * (1.0 + v):
        return s * (az - lam) / v
    if az <= a * lam * v:
        return s * (az - a * lam / (a - 1.0)) / (v - 1.0 / (a - 1.0))
    return z / v


@njit(cache=True)
def _sweep(G, grad, beta, v, lam, pen_w, family, a, selectable, active, active_only):
    p = beta.shape[0]
    maxd = 0.0
    for j in range(p):
        if not selectable[j]:
            continue
        if active_only and not active[j]:
            continue
        bj = beta[j]
        z = grad[j] + v[j] * bj
        new = univariate_minimizer(z, v[j], lam * pen_w[j], family, a)
        d = new - bj
        if d != 0.0:
            for k in range(p):
                grad[k] -= G[j, k] * d
            beta[j] = new
            if new != 0.0:
                active[j] = True
            ad = abs(d)
            if ad > maxd:
                maxd = ad
    return maxd


@njit(cache=True)
def cd_path(G, c, lambdas, pen_w, family, a, selectable, beta0, tol, max_sweeps, out):
    """Warm-started cyclic coordinate descent over a descending grid.

    Each lambda alternates full sweeps with sweeps restricted to the active
    set; it is done when a full sweep moves no coefficient by more than
    ``tol``.  Rows of ``out`` receive the solutions.  Returns -1 on success
    or the index of the first lambda that exhausted ``max_sweeps``.
    """
    p = c.shape[0]
    v = np.empty(p)
    for j in range(p):
        v[j] = G[j, j]
    beta = beta0.copy()
    grad = c.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for k in range(p):
                grad[k] -= G[j, k] * beta[j]
    active = beta != 0.0
    for i in range(lambdas.shape[0]):
        lam = lambdas[i]
        sweeps = 0
        while True:
            maxd = _sweep(G, grad, beta, v, lam, pen_w, family, a, selectable, active, False)
            sweeps += 1
            if maxd <= tol:
                break
            while True:
                maxd = _sweep(G, grad, beta, v, lam, pen_w, family, a, selectable, active, True)
                sweeps += 1
                if maxd <= tol or sweeps >= max_sweeps:
                    break
            if sweeps >= max_sweeps:
                return i
        for j in range(p):
            out[i, j] = beta[j]
    return -1


@njit(cache=True)
def partition_size(absb, R):
    """Size of the relevant set chosen by the gap criterion (0 if none).

    ``absb`` are absolute coefficients.  For a candidate relevant set of the
    s largest values, gap is the spacing just below it; the split is
    admissible when max-spacing-inside / gap <= R < gap / max-spacing-below.
    The smallest admissible s wins.
    """
    p = absb.shape[0]
    if p < 2:
        return 0, np.argsort(absb)
    order = np.argsort(absb, kind="mergesort")
    srt = absb[order]
    # dist[j] = srt[j] - srt[j-1], j = 1..p-1
    dist = np.zeros(p)
    for j in range(1, p):
        dist[j] = srt[j] - srt[j - 1]
    # below[j] = max(dist[1..j]); above[j] = max(dist[j..p-1])
    below = np.zeros(p)
    for j in range(1, p):
        below[j] = max(below[j - 1], dist[j])
    above = np.zeros(p + 1)
    for j in range(p - 1, 0, -1):
        above[j] = max(above[j + 1], dist[j])
    for s in range(1, p):
        g = p - s
        gap = dist[g]
        if gap <= 0.0:
            continue
        inside = above[g + 1] if g + 1 <= p - 1 else 0.0
        outside = below[g - 1] if g - 1 >= 1 else 0.0
        if inside / gap > R:
            continue
        if outside > 0.0 and not (R < gap / outside):
            continue
        return s, order
    return 0, order


@njit(cache=True)
def spsp_union(coefs, R, mask_out):
    """Mark in ``mask_out`` every index chosen at any row of ``coefs``."""
    K = coefs.shape[0]
    for k in range(K):
        s, order = partition_size(np.abs(coefs[k]), R)
        p = order.shape[0]
        for t in range(p - s, p):
            mask_out[order[t]] = True

