"""Pairwise working-set (SMO) solver for the SVM duals.

Solves::

    min_a  0.5 a'Qa + p'a
    s.t.   y'a = const,  0 <= a_i <= C_i

with ``Q_ij = y_i y_j K_ij`` and ``y_i`` in {+1, -1}. Working pairs are
chosen with second-order information (Fan, Chen & Lin, 2005). The ``nu``
variant keeps the two classes apart when selecting a pair, which also
preserves ``e'a`` and is what the nu-SVC dual requires.

Stopping is on the maximal KKT violation ``m(a) - M(a) < tol``.
"""

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError

TAU = 1e-12


class KernelRows:
    """Rows of ``Q`` on demand.

    The full matrix is built when it fits in ``cache_mb``; otherwise rows
    are kept in an LRU cache of that size.
    """

    def __init__(self, compute_rows, n, y, cache_mb=200.0, diag=None):
        self.compute_rows = compute_rows
        self.n = n
        self.y = y
        row_bytes = 8 * n
        budget = int(cache_mb * 1024 * 1024)
        self.full = None
        if n * row_bytes <= budget:
            K = compute_rows(np.arange(n))
            self.full = K * np.outer(y, y)
        self.capacity = max(2, budget // max(row_bytes, 1))
        self.cache = OrderedDict()
        if diag is None:
            if self.full is not None:
                diag = np.diag(self.full).copy()
            else:
                diag = np.array([compute_rows(np.array([i]))[0, i] for i in range(n)])
        self.diag = np.asarray(diag, dtype=float)

    def row(self, i):
        if self.full is not None:
            return self.full[i]
        hit = self.cache.get(i)
        if hit is not None:
            self.cache.move_to_end(i)
            return hit
        r = self.compute_rows(np.array([i]))[0] * (self.y[i] * self.y)
        self.cache[i] = r
        if len(self.cache) > self.capacity:
            self.cache.popitem(last=False)
        return r


@dataclass
class SolverResult:
    alpha: np.ndarray
    rho: float
    objective: float
    iterations: int
    # nu variant only: r, with the nu-SVC solution scaled by 1/r
    r: float = None


def _select_pair(G, alpha, y, C, Q, tol):
    """Second-order working set selection; ``None`` when optimal."""
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    yG = -y * G
    if not up.any() or not low.any():
        return None
    cand = np.where(up, yG, -np.inf)
    i = int(np.argmax(cand))
    gmax = cand[i]
    gmin = np.min(np.where(low, yG, np.inf))
    if gmax - gmin < tol:
        return None
    Qi = Q.row(i)
    b = gmax - yG
    quad = Q.diag[i] + Q.diag - 2.0 * y[i] * y * Qi
    quad = np.where(quad > 0, quad, TAU)
    score = np.where(low & (b > 0), -(b * b) / quad, np.inf)
    j = int(np.argmin(score))
    if not np.isfinite(score[j]):
        return None
    return i, j


def _select_pair_nu(G, alpha, y, C, Q, tol):
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    yG = -y * G
    best = None
    violation = -np.inf
    for cls in (1.0, -1.0):
        members = y == cls
        up_c, low_c = up & members, low & members
        if not up_c.any() or not low_c.any():
            continue
        cand = np.where(up_c, yG, -np.inf)
        i = int(np.argmax(cand))
        gmax = cand[i]
        violation = max(violation, gmax - np.min(np.where(low_c, yG, np.inf)))
        Qi = Q.row(i)
        b = gmax - yG
        quad = Q.diag[i] + Q.diag - 2.0 * Qi
        quad = np.where(quad > 0, quad, TAU)
        score = np.where(low_c & (b > 0), -(b * b) / quad, np.inf)
        j = int(np.argmin(score))
        if np.isfinite(score[j]) and (best is None or score[j] < best[0]):
            best = (score[j], i, j)
    if violation < tol or best is None:
        return None
    return best[1], best[2]


def _update_pair(i, j, G, alpha, y, C, Qi, Qj, diag):
    """Analytic two-variable step with box clipping; returns the deltas."""
    ai, aj = alpha[i], alpha[j]
    Ci, Cj = C[i], C[j]
    if y[i] != y[j]:
        quad = diag[i] + diag[j] + 2.0 * Qi[j]
        quad = quad if quad > 0 else TAU
        delta = (-G[i] - G[j]) / quad
        diff = ai - aj
        ai += delta
        aj += delta
        if diff > 0:
            if aj < 0:
                aj, ai = 0.0, diff
        elif ai < 0:
            ai, aj = 0.0, -diff
        if diff > Ci - Cj:
            if ai > Ci:
                ai, aj = Ci, Ci - diff
        elif aj > Cj:
            aj, ai = Cj, Cj + diff
    else:
        quad = diag[i] + diag[j] - 2.0 * Qi[j]
        quad = quad if quad > 0 else TAU
        delta = (G[i] - G[j]) / quad
        total = ai + aj
        ai -= delta
        aj += delta
        if total > Ci:
            if ai > Ci:
                ai, aj = Ci, total - Ci
        elif aj < 0:
            aj, ai = 0.0, total
        if total > Cj:
            if aj > Cj:
                aj, ai = Cj, total - Cj
        elif ai < 0:
            ai, aj = 0.0, total
    d_i, d_j = ai - alpha[i], aj - alpha[j]
    alpha[i], alpha[j] = ai, aj
    return d_i, d_j


def _rho(G, alpha, y, C):
    yG = y * G
    upper = alpha >= C
    lower = alpha <= 0
    free = ~upper & ~lower
    if free.any():
        return float(np.mean(yG[free]))
    ub_mask = (upper & (y < 0)) | (lower & (y > 0))
    lb_mask = (upper & (y > 0)) | (lower & (y < 0))
    ub = np.min(yG[ub_mask]) if ub_mask.any() else np.inf
    lb = np.max(yG[lb_mask]) if lb_mask.any() else -np.inf
    return float((ub + lb) / 2.0)


def _class_offset(G, alpha, C, members):
    upper = (alpha >= C) & members
    lower = (alpha <= 0) & members
    free = members & ~upper & ~lower
    if free.any():
        return float(np.mean(G[free]))
    ub = np.min(G[lower]) if lower.any() else np.inf
    lb = np.max(G[upper]) if upper.any() else -np.inf
    return float((ub + lb) / 2.0)


def solve(Q, p, y, C, alpha0, tol=1e-3, max_iter=1_000_000, nu=False):
    """Run SMO from the feasible point ``alpha0``.

    Parameters
    ----------
    Q : KernelRows
    p : ndarray of shape (n,)
    y : ndarray of shape (n,), entries +1 / -1
    C : ndarray of shape (n,)
        Upper bounds.
    alpha0 : ndarray of shape (n,)
        Feasible starting point; fixes ``y'a`` (and ``e'a`` for ``nu``).
    tol : float
        KKT tolerance.
    max_iter : int
    nu : bool
        Use the class-separated selection of the nu-SVC dual.

    Returns
    -------
    SolverResult

    Raises
    ------
    ConvergenceError
        When ``max_iter`` is reached first.
    """
    y = np.asarray(y, dtype=float)
    C = np.asarray(C, dtype=float)
    alpha = np.array(alpha0, dtype=float)
    n = len(alpha)
    G = np.array(p, dtype=float)
    for k in np.flatnonzero(alpha):
        G += alpha[k] * Q.row(k)
    select = _select_pair_nu if nu else _select_pair
    it = 0
    while True:
        pair = select(G, alpha, y, C, Q, tol)
        if pair is None:
            break
        if it >= max_iter:
            raise ConvergenceError(f"SMO did not converge in {max_iter} iterations")
        i, j = pair
        Qi, Qj = Q.row(i), Q.row(j)
        d_i, d_j = _update_pair(i, j, G, alpha, y, C, Qi, Qj, Q.diag)
        G += d_i * Qi + d_j * Qj
        it += 1
    objective = float(0.5 * alpha @ (G + np.asarray(p, dtype=float))) if n else 0.0
    if nu:
        pos, neg = y > 0, y < 0
        r1 = _class_offset(G, alpha, C, pos)
        r2 = _class_offset(G, alpha, C, neg)
        return SolverResult(alpha, (r1 - r2) / 2.0, objective, it, r=(r1 + r2) / 2.0)
    return SolverResult(alpha, _rho(G, alpha, y, C), objective, it)
