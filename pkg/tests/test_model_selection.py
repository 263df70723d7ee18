import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import BaseEstimator

from jstrack.learn.model_selection import (
    GAMMA_GRID,
    NU_GRID,
    GridSearchSpec,
    error_rates,
    grid_search,
    objective_value,
    stratified_folds,
)
from jstrack.learn.svm import OneClassSVM, SupervisedSVM


class ConstantModel(BaseEstimator):
    """Predicts +1 everywhere whatever its parameters."""

    def __init__(self, gamma=1.0, nu=0.5):
        self.gamma = gamma
        self.nu = nu

    def fit(self, X, y=None):
        return self

    def predict(self, X):
        return np.ones(X.shape[0], dtype=int)


def test_default_grids():
    assert len(GAMMA_GRID) == 16 and GAMMA_GRID[0] == 2.0 ** -15 and GAMMA_GRID[-1] == 1.0
    assert len(NU_GRID) == 11 and NU_GRID[0] == 2.0 ** -10 and NU_GRID[-1] == 1.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=2, max_size=60), st.integers(2, 6), st.integers(0, 999))
def test_folds_are_stratified(y, k, seed):
    y = np.array(y)
    folds = stratified_folds(y, k, seed)
    assert np.array_equal(folds, stratified_folds(y, k, seed))
    for cls in np.unique(y):
        counts = np.bincount(folds[y == cls], minlength=k)
        assert counts.max() - counts.min() <= 1


def test_error_rates():
    assert error_rates([1, -1, 1, 1], [1, 1, -1, -1]) == (0.5, 1.0)
    fn, fp = error_rates([1, 1], [1, 1])
    assert fn == 0.0 and math.isnan(fp)
    assert objective_value([1, 1], [1, 1], "aer") == 0.0
    assert objective_value([1, -1], [1, 1], "accuracy") == 0.5


def test_single_point_grid(small_features):
    fm, y = small_features
    spec = GridSearchSpec((0.25,), (0.125,))
    res = grid_search(SupervisedSVM("nu"), fm.X, y, spec)
    assert res.best_params == {"gamma": 0.25, "nu": 0.125}
    assert len(res.table) == 1


def test_table_covers_grid(small_features):
    fm, y = small_features
    spec = GridSearchSpec((2.0 ** -6, 2.0 ** -3, 1.0), (2.0 ** -4, 2.0 ** -1))
    res = grid_search(OneClassSVM(), fm.X, None, spec, truth=y)
    assert len(res.table) == 6
    assert {(g, v) for g, v, _ in res.table} == {(g, v) for g in spec.gamma_grid for v in spec.nu_grid}


def test_ties_go_to_smallest_point():
    X = np.zeros((20, 2))
    y = np.r_[np.ones(10), -np.ones(10)]
    spec = GridSearchSpec((1.0, 0.5, 0.25), (0.5, 0.125))
    res = grid_search(ConstantModel(), X, y, spec)
    assert res.best_params == {"gamma": 0.25, "nu": 0.125}


def test_infeasible_points_score_inf():
    X = np.random.default_rng(0).normal(size=(30, 2))
    y = np.r_[np.ones(25), -np.ones(5)]
    res = grid_search(SupervisedSVM("nu"), X, y, GridSearchSpec((0.5,), (0.125, 1.0)))
    scores = {v: s for _, v, s in res.table}
    assert scores[1.0] == math.inf and math.isfinite(scores[0.125])


def _serial_oracle(X, y, gammas, nus, k, seed):
    folds = stratified_folds(y, k, seed)
    best = None
    for g in sorted(gammas):
        for v in sorted(nus):
            pred = np.empty(len(y), dtype=int)
            for f in range(k):
                tr, te = np.flatnonzero(folds != f), np.flatnonzero(folds == f)
                pos = tr[y[tr] == 1]
                pred[te] = OneClassSVM(nu=v, gamma=g).fit(X[pos]).predict(X[te])
            rates = [np.mean(pred[y == 1] != 1), np.mean(pred[y == -1] != -1)]
            score = float(np.mean(rates))
            if best is None or score < best[0]:
                best = (score, g, v)
    return best


def test_threaded_search_matches_serial_oracle(small_features):
    fm, y = small_features
    gammas = tuple(2.0 ** k for k in (-9, -7, -5, -3))
    nus = tuple(2.0 ** k for k in (-5, -3, -1))
    spec = GridSearchSpec(gammas, nus)
    res = grid_search(OneClassSVM(), fm.X, None, spec, truth=y, seed=3, threads=4)
    score, g, v = _serial_oracle(fm.X, y, gammas, nus, 5, 3)
    assert res.best_params == {"gamma": g, "nu": v}
    assert res.best_score == pytest.approx(score, abs=1e-15)
    serial = grid_search(OneClassSVM(), fm.X, None, spec, truth=y, seed=3, threads=1)
    assert serial.table == res.table


def test_bad_spec():
    with pytest.raises(ValueError):
        GridSearchSpec((), (0.5,))
    with pytest.raises(ValueError):
        GridSearchSpec(folds=1)
