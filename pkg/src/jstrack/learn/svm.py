"""One-class and two-class kernel SVMs on top of :mod:`.smo`."""

import warnings

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin, OutlierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..errors import DegenerateTraining, InfeasibleNu
from . import smo
from .kernels import KernelSpec, kernel_matrix, median_gamma


def _check_X(X):
    return check_array(X, accept_sparse="csr", dtype=np.float64)


def _resolve_gamma(gamma, X):
    if isinstance(gamma, str):
        if gamma != "median":
            raise ValueError(f"unknown gamma heuristic {gamma!r}")
        return median_gamma(X)
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return gamma


def _all_identical(X):
    if sp.issparse(X):
        return (X - X[np.zeros(X.shape[0], dtype=int)]).count_nonzero() == 0
    return bool(np.all(X == X[0]))


class _KernelSVM(BaseEstimator):
    def _kernel(self):
        return KernelSpec(self.kernel, self.gamma_ if self.kernel == "rbf" else 1.0)

    def _rows_fn(self, X):
        spec = self._kernel()

        def compute(idx):
            K = kernel_matrix(X[idx], X, spec)
            if spec.kind == "rbf":
                K[np.arange(len(idx)), idx] = 1.0
            return K

        return compute

    def _q_rows(self, X, y):
        diag = np.ones(X.shape[0]) if self.kernel == "rbf" else None
        return smo.KernelRows(self._rows_fn(X), X.shape[0], y, self.cache_mb, diag)

    def _keep_support(self, X, coef):
        sv = np.flatnonzero(coef != 0)
        self.support_ = sv
        self.support_vectors_ = X[sv]
        self.dual_coef_ = coef[sv]

    def decision_function(self, X):
        """Signed distance ``sum_i coef_i K(s_i, x) - rho``."""
        check_is_fitted(self, "dual_coef_")
        X = _check_X(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        if len(self.dual_coef_) == 0:
            return np.full(X.shape[0], -self.rho_)
        K = kernel_matrix(X, self.support_vectors_, self._kernel())
        return K @ self.dual_coef_ - self.rho_


class OneClassSVM(OutlierMixin, _KernelSVM):
    """nu one-class SVM trained on positive (tracking) examples only.

    The dual is rescaled so that ``sum(alpha) == 1`` and
    ``0 <= alpha <= 1 / (nu * m)``; the decision function is
    ``sum_i alpha_i K(s_i, x) - rho``.

    Parameters
    ----------
    nu : float, default 0.1
        Upper bound on the training outlier fraction, lower bound on the
        support vector fraction.
    gamma : float or 'median', default 'median'
        RBF width; 'median' uses the inverse median pairwise squared
        distance of the training set.
    kernel : {'rbf', 'linear'}, default 'rbf'
    tol : float, default 1e-3
        KKT tolerance.
    max_iter : int, default 1_000_000
    cache_mb : float, default 200
        Kernel row cache budget.
    paper_sign : bool, default False
        Flip the label assignment so that ``decision >= 0`` means
        functional.

    Attributes
    ----------
    alpha_ : ndarray of shape (n_samples,)
    rho_ : float
    gamma_ : float
    degenerate_ : bool
        True when all training vectors were identical.
    boundary_ : float
        Half-width of the band around zero in which the solver cannot
        resolve the sign of a decision value, ``tol / (nu * m)``. Values
        inside it lie on the boundary and are predicted as the trained
        class.
    """

    def __init__(self, nu=0.1, gamma="median", kernel="rbf", tol=1e-3,
                 max_iter=1_000_000, cache_mb=200.0, paper_sign=False):
        self.nu = nu
        self.gamma = gamma
        self.kernel = kernel
        self.tol = tol
        self.max_iter = max_iter
        self.cache_mb = cache_mb
        self.paper_sign = paper_sign

    def fit(self, X, y=None):
        X = _check_X(X)
        m = X.shape[0]
        if m < 2:
            raise ValueError("a one-class SVM needs at least 2 training vectors")
        if not 0 < self.nu <= 1:
            raise ValueError("nu must be in (0, 1]")
        self.n_features_in_ = X.shape[1]
        self.gamma_ = _resolve_gamma(self.gamma, X)
        self.boundary_ = self.tol / (self.nu * m)
        self.degenerate_ = _all_identical(X)
        if self.degenerate_:
            warnings.warn("all training vectors are identical", DegenerateTraining, stacklevel=2)
            self.alpha_ = np.full(m, 1.0 / m)
            self.rho_ = float(kernel_matrix(X[:1], X[:1], self._kernel(), same=True)[0, 0])
            self.n_iter_ = 0
            self.objective_ = 0.5 * self.rho_
            self._keep_support(X, self.alpha_)
            return self
        ones = np.ones(m)
        # feasible start: the first floor(nu*m) multipliers at the bound
        scaled = self.nu * m
        alpha0 = np.zeros(m)
        k = int(scaled)
        alpha0[:k] = 1.0
        if k < m:
            alpha0[k] = scaled - k
        res = smo.solve(self._q_rows(X, ones), np.zeros(m), ones, ones, alpha0,
                        self.tol, self.max_iter)
        self.alpha_ = res.alpha / scaled
        self.rho_ = res.rho / scaled
        self.objective_ = res.objective / scaled ** 2
        self.n_iter_ = res.iterations
        self._keep_support(X, self.alpha_)
        return self

    def predict(self, X):
        """+1 for the trained (tracking) class, -1 otherwise."""
        d = self.decision_function(X)
        inlier = d >= -self.boundary_
        if self.paper_sign:
            inlier = ~inlier
        return np.where(inlier, 1, -1)


def _nu_feasible(nu, y):
    n_pos = int(np.sum(y > 0))
    n_neg = len(y) - n_pos
    return nu * len(y) <= 2 * min(n_pos, n_neg)


class SupervisedSVM(ClassifierMixin, _KernelSVM):
    """Two-class kernel SVM (nu-SVC or C-SVC).

    Parameters
    ----------
    svm_type : {'nu', 'c'}, default 'nu'
    nu : float, default 0.5
        Used by nu-SVC; must satisfy ``nu <= 2 min(n+, n-) / n``.
    C : float, default 1.0
        Used by C-SVC.
    class_weight : {None, 'balanced'}, default None
        C-SVC only: scale ``C`` per class by ``n / (2 n_class)``.
    gamma : float or 'median', default 'median'
    kernel : {'rbf', 'linear'}, default 'rbf'
    tol : float, default 1e-3
    max_iter : int, default 1_000_000
    cache_mb : float, default 200

    Attributes
    ----------
    classes_ : ndarray of shape (2,)
        The second class is the positive one.
    dual_coef_ : ndarray
        ``y_i alpha_i`` of the support vectors.
    rho_ : float
    """

    def __init__(self, svm_type="nu", nu=0.5, C=1.0, class_weight=None, gamma="median",
                 kernel="rbf", tol=1e-3, max_iter=1_000_000, cache_mb=200.0):
        self.svm_type = svm_type
        self.nu = nu
        self.C = C
        self.class_weight = class_weight
        self.gamma = gamma
        self.kernel = kernel
        self.tol = tol
        self.max_iter = max_iter
        self.cache_mb = cache_mb

    def fit(self, X, y):
        X = _check_X(X)
        y = np.asarray(y)
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y have different lengths")
        self.classes_ = np.unique(y)
        if len(self.classes_) != 2:
            raise ValueError(f"need exactly 2 classes, got {len(self.classes_)}")
        ys = np.where(y == self.classes_[1], 1.0, -1.0)
        m = len(ys)
        self.n_features_in_ = X.shape[1]
        self.gamma_ = _resolve_gamma(self.gamma, X)
        Q = self._q_rows(X, ys)
        if self.svm_type == "nu":
            if not 0 < self.nu <= 1:
                raise ValueError("nu must be in (0, 1]")
            if not _nu_feasible(self.nu, ys):
                raise InfeasibleNu(f"nu={self.nu} is infeasible for this class balance")
            alpha0 = np.zeros(m)
            budget = {1.0: self.nu * m / 2.0, -1.0: self.nu * m / 2.0}
            for i in range(m):
                alpha0[i] = min(1.0, budget[ys[i]])
                budget[ys[i]] -= alpha0[i]
            res = smo.solve(Q, np.zeros(m), ys, np.ones(m), alpha0, self.tol,
                            self.max_iter, nu=True)
            r = res.r if res.r > 0 else 1.0
            self.alpha_ = res.alpha / r
            self.rho_ = res.rho / r
            self.objective_ = res.objective
        elif self.svm_type == "c":
            if not self.C > 0:
                raise ValueError("C must be positive")
            C = np.full(m, float(self.C))
            if self.class_weight == "balanced":
                for cls in (1.0, -1.0):
                    members = ys == cls
                    C[members] *= m / (2.0 * members.sum())
            elif self.class_weight is not None:
                raise ValueError(f"unknown class_weight {self.class_weight!r}")
            res = smo.solve(Q, -np.ones(m), ys, C, np.zeros(m), self.tol, self.max_iter)
            self.alpha_ = res.alpha
            self.rho_ = res.rho
            self.objective_ = res.objective
        else:
            raise ValueError(f"unknown svm_type {self.svm_type!r}")
        self.n_iter_ = res.iterations
        self.intercept_ = -self.rho_
        self._keep_support(X, ys * self.alpha_)
        return self

    def predict(self, X):
        d = self.decision_function(X)
        return np.where(d >= 0, self.classes_[1], self.classes_[0])
