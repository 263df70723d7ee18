"""Stratified k-fold splits and exhaustive grid search."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from ..errors import InfeasibleNu, NumericError
from ..rng import SplitMix64

GAMMA_GRID = tuple(2.0 ** k for k in range(-15, 1))
NU_GRID = tuple(2.0 ** k for k in range(-10, 1))


def stratified_folds(y, k, seed=0):
    """Fold index of every sample.

    Each class is shuffled with its own SplitMix64 stream (seeded by
    ``seed`` plus the class rank) and dealt round-robin into ``k`` folds.
    """
    if k < 2:
        raise ValueError("need at least 2 folds")
    y = np.asarray(y)
    folds = np.empty(len(y), dtype=int)
    for rank, cls in enumerate(np.unique(y)):
        members = np.flatnonzero(y == cls).tolist()
        order = SplitMix64(seed + rank).shuffle(members)
        for pos, idx in enumerate(order):
            folds[idx] = pos % k
    return folds


def error_rates(pred, truth, positive=1):
    """``(fn_rate, fp_rate)``; NaN for a class absent from ``truth``."""
    pred = np.asarray(pred) == positive
    truth = np.asarray(truth) == positive
    n_pos, n_neg = truth.sum(), (~truth).sum()
    fn = float((~pred & truth).sum() / n_pos) if n_pos else math.nan
    fp = float((pred & ~truth).sum() / n_neg) if n_neg else math.nan
    return fn, fp


def objective_value(pred, truth, objective, positive=1):
    """Lower is better. ``aer`` averages the error rates of the classes present."""
    if objective == "aer":
        rates = [r for r in error_rates(pred, truth, positive) if not math.isnan(r)]
        return float(np.mean(rates))
    if objective in ("error", "accuracy"):
        return float(np.mean(np.asarray(pred) != np.asarray(truth)))
    raise ValueError(f"unknown objective {objective!r}")


@dataclass(frozen=True)
class GridSearchSpec:
    gamma_grid: tuple = GAMMA_GRID
    nu_grid: tuple = NU_GRID
    folds: int = 5
    objective: str = "aer"

    def __post_init__(self):
        if not self.gamma_grid or not self.nu_grid:
            raise ValueError("grids must be non-empty")
        if self.folds < 2:
            raise ValueError("need at least 2 folds")


@dataclass
class GridSearchResult:
    best_params: dict
    best_score: float
    table: list = field(default_factory=list)  # (gamma, nu, score) rows


def _cv_score(estimator, params, X, y, truth, folds, spec, positive):
    k = spec.folds
    preds = np.empty(len(truth), dtype=object)
    for f in range(k):
        test = folds == f
        train = ~test
        if not test.any():
            continue
        model = clone(estimator).set_params(**params)
        try:
            if y is None:
                model.fit(X[np.flatnonzero(train & (truth == positive))])
            else:
                model.fit(X[np.flatnonzero(train)], y[train])
        except (InfeasibleNu, NumericError, ValueError):
            return math.inf
        preds[test] = model.predict(X[np.flatnonzero(test)])
    return objective_value(preds, truth, spec.objective, positive)


def grid_search(estimator, X, y=None, spec=None, *, truth=None, seed=0, threads=1, positive=1):
    """Exhaustive search over ``gamma_grid x nu_grid``.

    Parameters
    ----------
    estimator : sklearn-style estimator with ``gamma`` and ``nu`` params
    X : array-like or sparse matrix
    y : array-like, optional
        Training targets passed to ``fit`` (None for one-class models).
    spec : GridSearchSpec
    truth : array-like, optional
        Classes the out-of-fold predictions are scored against; defaults to
        ``y``, or all ``positive`` when ``y`` is None. Folds are stratified
        on ``truth``. One-class models (``y`` None) are fitted on the
        positive rows of each training fold only, so negatives in ``truth``
        act purely as validation data.
    seed : int
    threads : int
        Grid points are scored concurrently; the result does not depend on
        scheduling.
    positive : label of the tracking class

    Returns
    -------
    GridSearchResult
        Ties go to the smallest gamma, then the smallest nu. Grid points
        whose training fails (e.g. infeasible nu) score ``inf``.
    """
    spec = spec or GridSearchSpec()
    n = X.shape[0]
    if truth is None:
        truth = np.full(n, positive) if y is None else np.asarray(y)
    truth = np.asarray(truth)
    if y is not None:
        y = np.asarray(y)
    folds = stratified_folds(truth, spec.folds, seed)
    points = [(g, v) for g in sorted(spec.gamma_grid) for v in sorted(spec.nu_grid)]

    def score(point):
        g, v = point
        return _cv_score(estimator, {"gamma": g, "nu": v}, X, y, truth, folds, spec, positive)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(score, points))
    else:
        scores = [score(p) for p in points]
    table = [(g, v, s) for (g, v), s in zip(points, scores)]
    g, v, s = min(table, key=lambda row: (row[2], row[0], row[1]))
    return GridSearchResult({"gamma": g, "nu": v}, s, table)
