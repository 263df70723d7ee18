"""Sigmoid (Platt) calibration of raw SVM scores.

Fits ``P(l=1 | f) = 1 / (1 + exp(A f + B))`` by Newton's method with
backtracking on the regularized targets of Platt (1999), following the
numerically safe formulation of Lin, Lin & Weng (2007).
"""

import math

import numpy as np


def fit_sigmoid(scores, labels, max_iter=100, min_step=1e-10, sigma=1e-12, eps=1e-5):
    """Return ``(A, B)`` for binary ``labels`` (1 positive, 0 negative)."""
    f = np.asarray(scores, dtype=float)
    y = np.asarray(labels) > 0
    prior1 = int(y.sum())
    prior0 = len(y) - prior1
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(y, hi, lo)
    A = 0.0
    B = math.log((prior0 + 1.0) / (prior1 + 1.0))

    def objective(A, B):
        fApB = f * A + B
        pos = fApB >= 0
        return float(np.sum(np.where(
            pos,
            t * fApB + np.log1p(np.exp(-np.abs(fApB))),
            (t - 1.0) * fApB + np.log1p(np.exp(-np.abs(fApB))),
        )))

    fval = objective(A, B)
    for _ in range(max_iter):
        fApB = f * A + B
        e = np.exp(-np.abs(fApB))
        p = np.where(fApB >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
        q = 1.0 - p
        d2 = p * q
        h11 = sigma + float(np.sum(f * f * d2))
        h22 = sigma + float(np.sum(d2))
        h21 = float(np.sum(f * d2))
        d1 = t - p
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            nA, nB = A + step * dA, B + step * dB
            nval = objective(nA, nB)
            if nval < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nval
                break
            step /= 2.0
        else:
            break
    return A, B


def sigmoid(scores, A, B):
    fApB = np.asarray(scores, dtype=float) * A + B
    e = np.exp(-np.abs(fApB))
    return np.where(fApB >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
