"""Kernel functions on feature vectors and on (sparse) design matrices."""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import VocabMismatch


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("rbf", "linear"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError("gamma must be positive")


def squared_distance(a, b):
    """``||a - b||^2`` of two :class:`~jstrack.features.FeatureVector`."""
    if a.vocab_digest != b.vocab_digest:
        raise VocabMismatch("vectors from different vocabularies")
    wa = dict(zip(a.indices, a.weights))
    wb = dict(zip(b.indices, b.weights))
    keys = wa.keys() | wb.keys()
    return math.fsum((wa.get(k, 0.0) - wb.get(k, 0.0)) ** 2 for k in keys)


def rbf(a, b, gamma):
    """``exp(-gamma * ||a - b||^2)`` for two feature vectors."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return math.exp(-gamma * squared_distance(a, b))


def _row_norms(X):
    if sp.issparse(X):
        return np.asarray(X.multiply(X).sum(axis=1)).ravel()
    return np.einsum("ij,ij->i", X, X)


def _dot(X, Y):
    out = X @ Y.T
    if sp.issparse(out):
        out = out.toarray()
    return np.asarray(out, dtype=float)


def kernel_matrix(X, Y, kernel, same=False):
    """Dense kernel matrix between the rows of ``X`` and ``Y``.

    ``same=True`` asserts ``X is Y`` and pins the diagonal distances to 0.
    """
    G = _dot(X, Y)
    if kernel.kind == "linear":
        return G
    d2 = _row_norms(X)[:, None] + _row_norms(Y)[None, :] - 2.0 * G
    np.maximum(d2, 0.0, out=d2)
    if same:
        np.fill_diagonal(d2, 0.0)
    return np.exp(-kernel.gamma * d2)


def median_gamma(X):
    """``1 / median`` of the non-zero pairwise squared distances of the rows."""
    n = X.shape[0]
    if n < 2:
        return 1.0
    G = _dot(X, X)
    norms = np.diag(G).copy()
    d2 = norms[:, None] + norms[None, :] - 2.0 * G
    vals = d2[np.triu_indices(n, 1)]
    vals = vals[vals > 1e-12]
    if vals.size == 0:
        return 1.0
    return float(1.0 / np.median(vals))
