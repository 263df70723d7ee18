"""Featurization and the train/test validation protocol.

The protocol holds out 20% of the tracking records. One-class and PU
models train on the remaining tracking records only and are tested on the
held-out tracking records plus every functional record. The supervised
SVM trains on 80% of both classes and is tested on the other 20%.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .canon import canonicalize_source
from .corpus import FUNCTIONAL, TRACKING
from .errors import InsufficientPositives, JstrackError
from .evaluation import confusion, quantile
from .features import FeatureModelSpec, extract_terms, fit_vocabulary, to_csr, vectorize
from .learn import (
    GridSearchSpec,
    OneClassSVM,
    PUClassifier,
    SupervisedSVM,
    TrainedModel,
    grid_search,
)
from .pdg import build_pdg
from .rng import split_fraction

FEATURE_MODELS = ("syntactic", "seq4", "seq7", "pdg4", "pdg7")
CLASSIFIERS = ("ocsvm", "pu", "ssvm")
MIN_POSITIVES = 10
VALIDATION_COLUMNS = ("features", "model", "tp", "fn", "fp", "tn", "aer",
                      "n_train", "n_test", "gamma", "nu")


def class_name(value):
    """Map a +1/-1 prediction to ``tracking``/``functional``."""
    return TRACKING if value > 0 else FUNCTIONAL


class ProgramCache:
    """Canonical forms and dependency graphs, computed once per source.

    A program that fails to canonicalize is remembered as such and yields
    an empty term set for the n-gram models.
    """

    def __init__(self):
        self._canon = {}
        self._graph = {}

    def canonical(self, source):
        if source not in self._canon:
            try:
                self._canon[source] = canonicalize_source(source)
            except JstrackError:
                self._canon[source] = None
        return self._canon[source]

    def graph(self, source):
        if source not in self._graph:
            canon = self.canonical(source)
            self._graph[source] = None if canon is None else build_pdg(canon)
        return self._graph[source]

    def terms(self, source, spec):
        if spec.kind == "syntactic":
            return extract_terms(spec, source=source)
        canon = self.canonical(source)
        if canon is None:
            return frozenset()
        graph = self.graph(source) if spec.kind == "pdg" else None
        return extract_terms(spec, canon=canon, graph=graph)


@dataclass
class FeatureMatrix:
    """Vectors of a list of records under one vocabulary."""

    vocabulary: object
    ids: list
    vectors: list
    X: object = field(repr=False)

    def rows(self, ids):
        pos = {k: i for i, k in enumerate(self.ids)}
        return self.X[[pos[k] for k in ids]]


def featurize(records, spec, vocabulary=None, *, cache=None, threads=1):
    """Term extraction, vocabulary fit (unless given) and vectorization.

    Records flagged ``missing`` are skipped.
    """
    records = [r for r in records if not r.missing]
    cache = cache or ProgramCache()
    sources = [r.source for r in records]
    if threads > 1:
        # canonical forms are filled in per distinct source; map keeps order
        with ThreadPoolExecutor(max_workers=threads) as pool:
            terms = list(pool.map(lambda s: cache.terms(s, spec), sources))
    else:
        terms = [cache.terms(s, spec) for s in sources]
    if vocabulary is None:
        vocabulary = fit_vocabulary(terms, spec)
    vectors = [vectorize(t, vocabulary, r.id) for t, r in zip(terms, records)]
    return FeatureMatrix(vocabulary, [r.id for r in records], vectors, to_csr(vectors, vocabulary))


@dataclass(frozen=True)
class ProtocolSplit:
    train_tracking: tuple
    test_tracking: tuple
    train_functional: tuple
    test_functional: tuple

    @property
    def functional(self):
        return tuple(sorted(self.train_functional + self.test_functional))


def protocol_split(dataset, seed=0, test_fraction=0.2):
    """Seeded split of the labelled records; each part is sorted by id.

    Raises
    ------
    InsufficientPositives
        Fewer than 10 usable tracking records.
    """
    usable = [r for r in dataset.records if r.labeled and not r.missing]
    T = [r.id for r in usable if r.label == TRACKING]
    F = [r.id for r in usable if r.label == FUNCTIONAL]
    if len(T) < MIN_POSITIVES:
        raise InsufficientPositives(f"{len(T)} tracking record(s); at least {MIN_POSITIVES} needed")
    test_T, train_T = split_fraction(T, test_fraction, seed)
    test_F, train_F = split_fraction(F, test_fraction, seed + 1)
    return ProtocolSplit(*(tuple(sorted(part)) for part in (train_T, test_T, train_F, test_F)))


@dataclass(frozen=True)
class ValidationConfig:
    """Settings of one validation run.

    ``nu`` and ``gamma`` are used as given unless ``grid_search`` is set,
    in which case every classifier picks them by 5-fold cross-validation
    inside its own training data. ``nu=None`` means 0.05 for the one-class
    SVM and 0.5 for the supervised one.
    """

    features: tuple = FEATURE_MODELS
    models: tuple = CLASSIFIERS
    seed: int = 0
    test_fraction: float = 0.2
    grid_search: bool = False
    grid: GridSearchSpec = GridSearchSpec()
    threads: int = 1
    nu: float = None
    gamma: object = "median"
    cap: int = None
    paper_sign: bool = False


def make_estimator(kind, *, nu, gamma, seed=0, paper_sign=False):
    if kind == "ocsvm":
        return OneClassSVM(nu=nu, gamma=gamma, paper_sign=paper_sign)
    if kind == "ssvm":
        return SupervisedSVM("nu", nu=nu, gamma=gamma)
    if kind == "pu":
        return PUClassifier("nu", nu=nu, gamma=gamma, class_weight=None, seed=seed)
    raise ValueError(f"unknown model kind {kind!r}")


def default_estimator(kind, *, nu=None, gamma="median", seed=0, paper_sign=False):
    """Estimator used when no grid search is run.

    PU then uses a class-balanced C-SVM unless ``nu`` is given.
    """
    if kind == "pu" and nu is None:
        return PUClassifier(gamma=gamma, seed=seed)
    if nu is None:
        nu = 0.05 if kind == "ocsvm" else 0.5
    return make_estimator(kind, nu=nu, gamma=gamma, seed=seed, paper_sign=paper_sign)


def tune(kind, X, targets, config):
    """Grid-searched ``(gamma, nu)`` for one classifier.

    ``targets`` are +1/-1 for OCSVM and SSVM (OCSVM fits only on the +1
    rows of each fold) and the labeled indicator for PU.
    """
    spec = GridSearchSpec(config.grid.gamma_grid, config.grid.nu_grid, config.grid.folds,
                          config.grid.objective)
    if kind == "ocsvm":
        res = grid_search(OneClassSVM(), X, None, spec, truth=targets, seed=config.seed,
                          threads=config.threads)
    else:
        res = grid_search(SupervisedSVM("nu"), X, targets, spec, seed=config.seed,
                          threads=config.threads)
    return res.best_params["gamma"], res.best_params["nu"]


def fit_classifier(kind, positives, others, config, *, negatives=None):
    """Fit one classifier on sparse row blocks.

    Parameters
    ----------
    kind : {'ocsvm', 'pu', 'ssvm'}
    positives : sparse matrix
        Tracking examples.
    others : sparse matrix or None
        Functional examples for SSVM, the unlabeled pool for PU; ignored
        by OCSVM.
    config : ValidationConfig
    negatives : sparse matrix, optional
        Functional examples the OCSVM grid search validates against (the
        model itself never trains on them).
    """
    n_pos = positives.shape[0]
    if kind == "ocsvm":
        X, y = positives, None
    else:
        X = sp.vstack([positives, others], format="csr")
        y = np.array([1] * n_pos + [0 if kind == "pu" else -1] * others.shape[0])
    if config.grid_search:
        if kind == "ocsvm":
            X_cv = positives if negatives is None else sp.vstack([positives, negatives], format="csr")
            truth = np.array([1] * n_pos + [-1] * (X_cv.shape[0] - n_pos))
            gamma, nu = tune(kind, X_cv, truth, config)
        else:
            gamma, nu = tune(kind, X, y, config)
        est = make_estimator(kind, nu=nu, gamma=gamma, seed=config.seed,
                             paper_sign=config.paper_sign)
    else:
        est = default_estimator(kind, nu=config.nu, gamma=config.gamma, seed=config.seed,
                                paper_sign=config.paper_sign)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if y is None:
            est.fit(X)
        else:
            est.fit(X, y)
    return est


def fitted_params(est):
    """Kernel width and nu actually used (nu is NaN for a C-SVM)."""
    svm = est.g_.svm_ if isinstance(est, PUClassifier) else est
    nu = svm.nu if getattr(svm, "svm_type", "nu") == "nu" else math.nan
    return {"gamma": svm.gamma_, "nu": nu}


def _fit_predict(kind, fm, split, config):
    """Train one classifier under the protocol; return (test ids, predictions, estimator)."""
    T_tr, T_te = list(split.train_tracking), list(split.test_tracking)
    F_tr, F_te = list(split.train_functional), list(split.test_functional)
    if kind == "ssvm":
        test = T_te + F_te
        est = fit_classifier(kind, fm.rows(T_tr), fm.rows(F_tr), config)
        n_train = len(T_tr) + len(F_tr)
    else:
        test = T_te + sorted(F_tr + F_te)
        # PU: the unlabeled pool is the test pool itself
        est = fit_classifier(kind, fm.rows(T_tr), fm.rows(test), config, negatives=fm.rows(F_tr))
        n_train = len(T_tr) + (len(test) if kind == "pu" else 0)
    return test, est.predict(fm.rows(test)), est, n_train


def validate(dataset, config=None, *, cache=None):
    """One confusion row per (feature model, classifier).

    Returns
    -------
    list of dict
        Keys :data:`VALIDATION_COLUMNS`; rates use tracking as positive.
    """
    config = config or ValidationConfig()
    split = protocol_split(dataset, config.seed, config.test_fraction)
    labels = {r.id: r.label for r in dataset.records if r.labeled}
    labelled = [r for r in dataset.records if r.labeled and not r.missing]
    cache = cache or ProgramCache()
    rows = []
    for name in config.features:
        spec = FeatureModelSpec.from_name(name, cap=config.cap)
        fm = featurize(labelled, spec, cache=cache, threads=config.threads)
        for kind in config.models:
            test, pred, est, n_train = _fit_predict(kind, fm, split, config)
            report = confusion({k: class_name(p) for k, p in zip(test, pred)}, labels)
            rows.append({"features": name, "model": kind, **report.as_row(),
                         "n_train": n_train, "n_test": len(test), **fitted_params(est)})
    return rows


def similarity_groups(dataset, spec, *, cache=None):
    """Tracking and functional vectors of the labelled records under ``spec``."""
    labelled = [r for r in dataset.records if r.labeled and not r.missing]
    fm = featurize(labelled, spec, cache=cache)
    label = {r.id: r.label for r in labelled}
    tracking = [v for v in fm.vectors if label[v.program_id] == TRACKING]
    functional = [v for v in fm.vectors if label[v.program_id] == FUNCTIONAL]
    return tracking, functional


def deciles(values):
    """Lower empirical quantiles at 0.1, 0.2, ..., 0.9."""
    return [quantile(values, q / 10) for q in range(1, 10)]


def train_model(dataset, kind, features, config=None, *, cache=None):
    """Fit a classifier on a whole dataset; returns a :class:`TrainedModel`.

    Tracking records are the positives. SSVM contrasts them with the
    functional records; PU treats every other record, labelled or not, as
    unlabeled; OCSVM uses functional records only to score its grid search.
    """
    config = config or ValidationConfig()
    spec = FeatureModelSpec.from_name(features, cap=config.cap)
    records = [r for r in dataset.records if not r.missing]
    fm = featurize(records, spec, cache=cache, threads=config.threads)
    pos = [r.id for r in records if r.label == TRACKING]
    if len(pos) < MIN_POSITIVES:
        raise InsufficientPositives(f"{len(pos)} tracking record(s); at least {MIN_POSITIVES} needed")
    func = [r.id for r in records if r.label == FUNCTIONAL]
    rest = [r.id for r in records if r.label != TRACKING]
    others = fm.rows(rest if kind == "pu" else func) if kind != "ocsvm" else None
    negatives = fm.rows(func) if func else None
    est = fit_classifier(kind, fm.rows(pos), others, config, negatives=negatives)
    return TrainedModel(kind, est, fm.vocabulary)


def classify(model, records, *, cache=None):
    """``[(id, class, score)]`` for every non-missing record.

    The score is the raw decision value (OCSVM, SSVM) or the tracking
    probability (PU).
    """
    records = [r for r in records if not r.missing]
    if not records:
        return []
    fm = featurize(records, model.vocabulary.spec, model.vocabulary, cache=cache)
    est = model.estimator
    scores = est.decision_function(fm.X)
    pred = est.predict(fm.X)
    return [(rid, class_name(p), float(s)) for rid, p, s in zip(fm.ids, pred, scores)]
