"""Hot numeric kernels: Bradley-Terry MM iteration, PageRank power iteration,
one-sided Jacobi SVD sweeps.

Each kernel ships in two equivalent implementations: a loop form compiled with
numba when available, and a vectorized pure-numpy fallback. The public names
(bt_mm, pagerank, jacobi_sweeps) dispatch on the CLAUSERANK_NUMBA switch; the
benchmark times the *_loops / *_numpy pairs directly.
"""

import numpy as np

from ._accel import HAS_NUMBA, USE_NUMBA, jit_kernel


# ---------------------------------------------------------------------------
# Bradley-Terry minorization-maximization
#
# n_mat[i, j] = total comparison weight between i and j (symmetric, zero diag)
# wins[i]     = total weighted wins of i
# Update: s_i <- wins_i / sum_{j != i} n_ij / (s_i + s_j), renormalized to sum 1.
# Convergence: max |log s_new - log s| < tol over all items.
# ---------------------------------------------------------------------------


def _bt_mm_loops(n_mat, wins, tol, max_iter):
    n = wins.shape[0]
    s = np.full(n, 1.0 / n)
    s_new = np.empty(n)
    for it in range(max_iter):
        for i in range(n):
            denom = 0.0
            for j in range(n):
                if i == j or n_mat[i, j] <= 0.0:
                    continue
                pair = s[i] + s[j]
                if pair <= 0.0:
                    denom = np.inf
                    break
                denom += n_mat[i, j] / pair
            if denom > 0.0 and np.isfinite(denom):
                s_new[i] = wins[i] / denom
            else:
                s_new[i] = 0.0
        total = 0.0
        for i in range(n):
            total += s_new[i]
        if not np.isfinite(total) or total <= 0.0:
            return s, it + 1, False
        delta = 0.0
        positive = True
        for i in range(n):
            s_new[i] /= total
            if s_new[i] > 0.0 and s[i] > 0.0:
                d = abs(np.log(s_new[i]) - np.log(s[i]))
                if d > delta:
                    delta = d
            else:
                positive = False
            s[i] = s_new[i]
        if positive and delta < tol:
            return s, it + 1, True
    return s, max_iter, False


def _bt_mm_numpy(n_mat, wins, tol, max_iter):
    n = wins.shape[0]
    s = np.full(n, 1.0 / n)
    for it in range(max_iter):
        pair = s[:, None] + s[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            contrib = np.where(n_mat > 0.0, n_mat / pair, 0.0)
        np.fill_diagonal(contrib, 0.0)
        denom = contrib.sum(axis=1)
        good = (denom > 0.0) & np.isfinite(denom)
        s_new = np.where(good, wins / np.where(good, denom, 1.0), 0.0)
        total = s_new.sum()
        if not np.isfinite(total) or total <= 0.0:
            return s, it + 1, False
        s_new = s_new / total
        positive = bool(((s_new > 0.0) & (s > 0.0)).all())
        if positive:
            delta = float(np.abs(np.log(s_new) - np.log(s)).max())
        else:
            delta = np.inf
        s = s_new
        if positive and delta < tol:
            return s, it + 1, True
    return s, max_iter, False


# ---------------------------------------------------------------------------
# PageRank power iteration with uniform teleport.
#
# weights[j, i] = edge weight j -> i (similarity graphs are symmetric); rows
# with zero out-weight are dangling and spread their mass uniformly.
# Convergence: L1 delta < tol.
# ---------------------------------------------------------------------------


def _pagerank_loops(weights, out_weight, damping, tol, max_iter):
    n = weights.shape[0]
    p = np.full(n, 1.0 / n)
    p_new = np.empty(n)
    for it in range(max_iter):
        dangling = 0.0
        for j in range(n):
            if out_weight[j] <= 0.0:
                dangling += p[j]
        base = (1.0 - damping) / n + damping * dangling / n
        for i in range(n):
            acc = 0.0
            for j in range(n):
                if out_weight[j] > 0.0 and weights[j, i] > 0.0:
                    acc += p[j] * weights[j, i] / out_weight[j]
            p_new[i] = base + damping * acc
        delta = 0.0
        for i in range(n):
            delta += abs(p_new[i] - p[i])
            p[i] = p_new[i]
        if delta < tol:
            return p, it + 1, True
    return p, max_iter, False


def _pagerank_numpy(weights, out_weight, damping, tol, max_iter):
    n = weights.shape[0]
    p = np.full(n, 1.0 / n)
    nonzero = out_weight > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        transition = np.where(nonzero[:, None], weights / np.where(nonzero, out_weight, 1.0)[:, None], 0.0)
    for it in range(max_iter):
        dangling = p[~nonzero].sum()
        p_new = (1.0 - damping) / n + damping * (transition.T @ p + dangling / n)
        delta = float(np.abs(p_new - p).sum())
        p = p_new
        if delta < tol:
            return p, it + 1, True
    return p, max_iter, False


# ---------------------------------------------------------------------------
# One-sided Jacobi sweeps (Hestenes): rotate column pairs of B until mutually
# orthogonal, accumulating the rotations in V. Singular values are the final
# column norms; V's columns are the right singular vectors. Ordering and the
# sign convention are applied by the caller.
# ---------------------------------------------------------------------------


def _jacobi_sweeps_loops(b, v, tol, max_sweeps):
    m, n = b.shape
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for k in range(m):
                    alpha += b[k, i] * b[k, i]
                    beta += b[k, j] * b[k, j]
                    gamma += b[k, i] * b[k, j]
                denom = np.sqrt(alpha) * np.sqrt(beta)
                if denom <= 0.0:
                    continue
                rel = abs(gamma) / denom
                if rel <= tol:
                    continue
                if rel > off:
                    off = rel
                theta = 0.5 * np.arctan2(2.0 * gamma, alpha - beta)
                c = np.cos(theta)
                s = np.sin(theta)
                for k in range(m):
                    bi = b[k, i]
                    bj = b[k, j]
                    b[k, i] = c * bi + s * bj
                    b[k, j] = -s * bi + c * bj
                for k in range(n):
                    vi = v[k, i]
                    vj = v[k, j]
                    v[k, i] = c * vi + s * vj
                    v[k, j] = -s * vi + c * vj
        if off <= tol:
            break
    return sweeps


def _jacobi_sweeps_numpy(b, v, tol, max_sweeps):
    m, n = b.shape
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = float(b[:, i] @ b[:, i])
                beta = float(b[:, j] @ b[:, j])
                gamma = float(b[:, i] @ b[:, j])
                denom = np.sqrt(alpha) * np.sqrt(beta)
                if denom <= 0.0:
                    continue
                rel = abs(gamma) / denom
                if rel <= tol:
                    continue
                off = max(off, rel)
                theta = 0.5 * np.arctan2(2.0 * gamma, alpha - beta)
                c = np.cos(theta)
                s = np.sin(theta)
                bi = b[:, i].copy()
                b[:, i] = c * bi + s * b[:, j]
                b[:, j] = -s * bi + c * b[:, j]
                vi = v[:, i].copy()
                v[:, i] = c * vi + s * v[:, j]
                v[:, j] = -s * vi + c * v[:, j]
        if off <= tol:
            break
    return sweeps


if HAS_NUMBA:
    _bt_mm_jit = jit_kernel(_bt_mm_loops)
    _pagerank_jit = jit_kernel(_pagerank_loops)
    _jacobi_sweeps_jit = jit_kernel(_jacobi_sweeps_loops)

if USE_NUMBA:
    bt_mm = _bt_mm_jit
    pagerank = _pagerank_jit
    jacobi_sweeps = _jacobi_sweeps_jit
else:
    bt_mm = _bt_mm_numpy
    pagerank = _pagerank_numpy
    jacobi_sweeps = _jacobi_sweeps_numpy


def jacobi_svd(a, tol: float = 1e-12, max_sweeps: int = 60):
    """Singular values (descending) and right singular vectors of a via
    one-sided Jacobi sweeps.

    Sign convention: the largest-magnitude component of each right singular
    vector is made positive."""
    b = np.array(a, dtype=np.float64, order="C", copy=True)
    m, n = b.shape
    v = np.eye(n)
    jacobi_sweeps(b, v, tol, max_sweeps)
    sv = np.sqrt((b * b).sum(axis=0))
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    v = v[:, order]
    for k in range(n):
        idx = int(np.argmax(np.abs(v[:, k])))
        if v[idx, k] < 0:
            v[:, k] = -v[:, k]
    return sv, v


def implementations():
    """Kernel pairs for the benchmark: name -> (loops_or_jit, numpy)."""
    pairs = {
        "bt_mm": (_bt_mm_jit if HAS_NUMBA else _bt_mm_loops, _bt_mm_numpy),
        "pagerank": (_pagerank_jit if HAS_NUMBA else _pagerank_loops, _pagerank_numpy),
        "jacobi_sweeps": (_jacobi_sweeps_jit if HAS_NUMBA else _jacobi_sweeps_loops, _jacobi_sweeps_numpy),
    }
    return pairs
