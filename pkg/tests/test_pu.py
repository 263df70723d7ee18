import warnings

import numpy as np
import pytest
from scipy.optimize import minimize

from jstrack.errors import CollapsedCalibration
from jstrack.learn.calibration import fit_sigmoid, sigmoid
from jstrack.learn.pu import CalibratedSVM, PUClassifier
from jstrack.learn.svm import SupervisedSVM


def generative(c_star, seed, n=200, d=5, sep=6.0):
    """Positives and negatives; each positive is labeled with probability ``c_star``."""
    rng = np.random.default_rng(seed)
    pos = rng.normal(size=(n, d))
    pos[:, 0] += sep / 2
    neg = rng.normal(size=(n, d))
    neg[:, 0] -= sep / 2
    X = np.vstack([pos, neg])
    y = np.r_[np.ones(n), -np.ones(n)]
    s = np.r_[(rng.random(n) < c_star).astype(int), np.zeros(n, dtype=int)]
    return X, y, s


def fit_quietly(model, X, s):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return model.fit(X, s)


@pytest.mark.parametrize("c_star", [0.2, 0.4, 0.8])
def test_constant_recovery(c_star):
    estimates = [fit_quietly(PUClassifier(seed=seed), *generative(c_star, seed)[::2]).c_
                 for seed in range(20)]
    assert abs(np.mean(estimates) - c_star) <= 0.05


def test_constant_scorer_gives_its_value(monkeypatch):
    X, _, s = generative(0.5, 0)
    monkeypatch.setattr(CalibratedSVM, "predict_proba",
                        lambda self, X: np.column_stack([np.full(X.shape[0], 0.63),
                                                         np.full(X.shape[0], 0.37)]))
    model = fit_quietly(PUClassifier(), X, s)
    assert model.c_ == pytest.approx(0.37, abs=1e-15)


def test_unit_constant_is_thresholded_g():
    X, _, s = generative(1.0, 1)
    model = fit_quietly(PUClassifier(), X, s)
    assert model.c_ > 0.9
    model.c_ = 1.0
    g = model.g(X)
    assert np.array_equal(model.decision_function(X), g)
    assert np.array_equal(model.predict(X), np.where(g >= 0.5, 1, -1))


def test_threshold_sweep_is_monotone():
    X, _, s = generative(0.4, 2)
    model = fit_quietly(PUClassifier(), X, s)
    counts = []
    for t in np.linspace(0.0, 1.0, 21):
        model.threshold = t
        counts.append(int((model.predict(X) == 1).sum()))
    assert counts == sorted(counts, reverse=True)
    assert counts[0] == len(X)


def test_probabilities_are_clipped():
    X, _, s = generative(0.2, 3)
    f = fit_quietly(PUClassifier(), X, s).decision_function(X)
    assert f.min() >= 0.0 and f.max() <= 1.0


def test_agrees_with_fully_supervised_svm():
    X, y, s = generative(0.5, 4, n=300)
    rng = np.random.default_rng(99)
    test = rng.random(len(y)) < 0.3
    pu = fit_quietly(PUClassifier(), X[~test], s[~test])
    ssvm = SupervisedSVM("c", C=1.0).fit(X[~test], y[~test])
    agree = np.mean(pu.predict(X[test]) == ssvm.predict(X[test]))
    assert agree >= 0.95


def test_collapsed_calibration_is_flagged(monkeypatch):
    X, _, s = generative(0.5, 0)
    monkeypatch.setattr("jstrack.learn.pu.fit_sigmoid", lambda scores, labels: (0.0, 0.3))
    with pytest.warns(CollapsedCalibration):
        model = PUClassifier().fit(X, s)
    assert model.collapsed_
    assert np.ptp(model.g(X)) == 0.0


def test_bad_holdout():
    X, _, s = generative(0.5, 0)
    with pytest.raises(ValueError):
        PUClassifier(holdout=0.7).fit(X, s)


class TestSigmoid:
    def test_matches_generic_optimizer(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            f = rng.normal(size=60)
            y = (f + rng.normal(scale=1.0, size=60) > 0).astype(int)
            A, B = fit_sigmoid(f, y)
            n1, n0 = y.sum(), len(y) - y.sum()
            t = np.where(y == 1, (n1 + 1) / (n1 + 2), 1 / (n0 + 2))

            def nll(p):
                z = p[0] * f + p[1]
                return np.sum(t * z + np.logaddexp(0, -z))

            ref = minimize(nll, [0.0, 0.0], method="BFGS", options={"gtol": 1e-10}).x
            assert nll([A, B]) <= nll(ref) + 1e-8
            assert np.allclose([A, B], ref, atol=1e-4)

    def test_ranking_preserved(self):
        rng = np.random.default_rng(1)
        f = rng.normal(size=100)
        y = (f > 0).astype(int)
        A, B = fit_sigmoid(f, y)
        assert A < 0
        p = sigmoid(f, A, B)
        assert np.array_equal(np.argsort(p, kind="stable"), np.argsort(f, kind="stable"))
        assert np.all((p > 0) & (p < 1))
