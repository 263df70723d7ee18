"""Learning from positive and unlabeled examples (Elkan & Noto, 2008).

A probabilistic classifier ``g(x) ~ P(l=1 | x)`` is trained to separate
labeled from unlabeled examples. When labeled positives are picked
uniformly at random from all positives, ``P(y=1 | x) = g(x) / c`` with
``c = P(l=1 | y=1)``, and ``c`` is estimated as the mean of ``g`` over a
held-out set of labeled positives.
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.utils.validation import check_array, check_is_fitted

from ..errors import CollapsedCalibration, EmptyValidation
from ..rng import split_fraction
from .calibration import fit_sigmoid, sigmoid
from .model_selection import stratified_folds
from .svm import SupervisedSVM


class CalibratedSVM(BaseEstimator, ClassifierMixin):
    """SVM whose scores are mapped to probabilities by a fitted sigmoid.

    The sigmoid is fitted on out-of-fold decision values, then the SVM is
    refitted on all data.

    Parameters
    ----------
    svm : SupervisedSVM
    cv : int, default 5
    seed : int, default 0

    Attributes
    ----------
    svm_ : SupervisedSVM
    A_, B_ : float
        ``P = 1 / (1 + exp(A f + B))``.
    """

    def __init__(self, svm=None, cv=5, seed=0):
        self.svm = svm
        self.cv = cv
        self.seed = seed

    def fit(self, X, y):
        y = np.asarray(y)
        base = self.svm if self.svm is not None else SupervisedSVM()
        k = int(min(self.cv, np.bincount(y.astype(int)).min()))
        scores = np.empty(len(y))
        if k >= 2:
            folds = stratified_folds(y, k, self.seed)
            for f in range(k):
                test = folds == f
                model = clone(base).fit(X[np.flatnonzero(~test)], y[~test])
                scores[test] = model.decision_function(X[np.flatnonzero(test)])
            self.svm_ = clone(base).fit(X, y)
        else:
            self.svm_ = clone(base).fit(X, y)
            scores = self.svm_.decision_function(X)
        self.classes_ = self.svm_.classes_
        self.A_, self.B_ = fit_sigmoid(scores, y == self.classes_[1])
        return self

    def decision_function(self, X):
        return self.svm_.decision_function(X)

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X), self.A_, self.B_)
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return np.where(self.predict_proba(X)[:, 1] >= 0.5, self.classes_[1], self.classes_[0])


class PUClassifier(BaseEstimator, ClassifierMixin):
    """Positive-unlabeled classifier.

    Parameters
    ----------
    svm_type : {'c', 'nu'}, default 'c'
        Base SVM of ``g``.
    nu : float, default 0.5
    C : float, default 1.0
    class_weight : {None, 'balanced'}, default 'balanced'
        C-SVC class weighting; balancing keeps the rare labeled class from
        being ignored when ``c`` is small.
    gamma : float or 'median', default 'median'
    holdout : float, default 0.2
        Fraction of the labeled and of the unlabeled examples held out;
        the held-out labeled ones form the set ``P`` used to estimate ``c``.
    threshold : float, default 0.5
        Cutoff on ``P(y=1 | x)``.
    cv : int, default 5
        Folds for the out-of-fold calibration scores.
    seed : int, default 0

    Attributes
    ----------
    g_ : CalibratedSVM
    c_ : float
    classes_ : ndarray, ``[-1, 1]``
    """

    def __init__(self, svm_type="c", nu=0.5, C=1.0, class_weight="balanced", gamma="median",
                 holdout=0.2, threshold=0.5, cv=5, seed=0):
        self.svm_type = svm_type
        self.nu = nu
        self.C = C
        self.class_weight = class_weight
        self.gamma = gamma
        self.holdout = holdout
        self.threshold = threshold
        self.cv = cv
        self.seed = seed

    def fit(self, X, s):
        """Fit on features ``X`` and label indicator ``s`` (1 labeled, 0 unlabeled)."""
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        s = (np.asarray(s) > 0).astype(int)
        if not 0 < self.holdout <= 0.5:
            raise ValueError("holdout must be in (0, 0.5]")
        labeled = np.flatnonzero(s == 1).tolist()
        unlabeled = np.flatnonzero(s == 0).tolist()
        if not labeled or not unlabeled:
            raise ValueError("PU learning needs both labeled and unlabeled examples")
        P, lab_train = split_fraction(labeled, self.holdout, self.seed)
        U_out, unl_train = split_fraction(unlabeled, self.holdout, self.seed + 1)
        if not P:
            raise EmptyValidation("no labeled example left for estimating c")
        train = np.array(sorted(lab_train + unl_train))
        svm = SupervisedSVM(self.svm_type, nu=self.nu, C=self.C,
                            class_weight=self.class_weight if self.svm_type == "c" else None,
                            gamma=self.gamma)
        self.g_ = CalibratedSVM(svm, self.cv, self.seed).fit(X[train], s[train])
        self.collapsed_ = not self.g_.A_ < 0
        if self.collapsed_:
            warnings.warn("calibrated scorer is constant or inverted", CollapsedCalibration, stacklevel=2)
        g_P = self.g_.predict_proba(X[np.array(P)])[:, 1]
        self.c_ = float(np.mean(g_P))
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([-1, 1])
        return self

    def g(self, X):
        """``P(l=1 | x)``."""
        check_is_fitted(self, "c_")
        return self.g_.predict_proba(X)[:, 1]

    def decision_function(self, X):
        """``P(y=1 | x) = min(1, g(x) / c)``."""
        return np.minimum(1.0, self.g(X) / self.c_)

    def predict_proba(self, X):
        f = self.decision_function(X)
        return np.column_stack([1.0 - f, f])

    def predict(self, X):
        return np.where(self.decision_function(X) >= self.threshold, 1, -1)
