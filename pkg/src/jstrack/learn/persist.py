"""Versioned JSON model files.

The header carries the model kind, kernel, gamma, nu or C, the PU constant
and threshold, and the vocabulary digest; the body holds the support
vectors (sparse rows), their coefficients and the embedded vocabulary, so a
model file is self-contained. Floats are written with ``repr`` and
therefore round-trip exactly.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import CorruptModel, VersionMismatch
from ..features import TermVocabulary
from .pu import CalibratedSVM, PUClassifier
from .svm import OneClassSVM, SupervisedSVM

FORMAT = "jstrack-model"
VERSION = 1
KINDS = ("ocsvm", "pu", "ssvm")


@dataclass
class TrainedModel:
    """A fitted estimator with the vocabulary its inputs must use."""

    kind: str
    estimator: object
    vocabulary: TermVocabulary

    @property
    def features(self):
        return self.vocabulary.spec.name


def _sparse_rows(M):
    M = sp.csr_matrix(M)
    return {
        "indices": [M.indices[M.indptr[i]:M.indptr[i + 1]].tolist() for i in range(M.shape[0])],
        "weights": [M.data[M.indptr[i]:M.indptr[i + 1]].tolist() for i in range(M.shape[0])],
    }


def _from_rows(block, n_features):
    indptr = np.cumsum([0] + [len(r) for r in block["indices"]])
    indices = [i for r in block["indices"] for i in r]
    data = [w for r in block["weights"] for w in r]
    return sp.csr_matrix(
        (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64), indptr),
        shape=(len(block["indices"]), n_features),
    )


def _svm_state(est):
    state = {
        "gamma": est.gamma_,
        "n_features": int(est.n_features_in_),
        "rho": est.rho_,
        "coef": est.dual_coef_.tolist(),
        "support_vectors": _sparse_rows(est.support_vectors_),
    }
    if isinstance(est, SupervisedSVM):
        state["classes"] = est.classes_.tolist()
    return state


def _restore_svm(est, state):
    est.gamma_ = state["gamma"]
    est.n_features_in_ = state["n_features"]
    est.rho_ = state["rho"]
    est.dual_coef_ = np.asarray(state["coef"], dtype=float)
    est.support_vectors_ = _from_rows(state["support_vectors"], state["n_features"])
    if "classes" in state:
        est.classes_ = np.asarray(state["classes"])
        est.intercept_ = -est.rho_
    return est


def model_to_dict(model):
    est = model.estimator
    header = {
        "format": FORMAT,
        "version": VERSION,
        "kind": model.kind,
        "features": model.features,
        "vocab_hash": model.vocabulary.digest,
        "kernel": est.kernel if not isinstance(est, PUClassifier) else "rbf",
    }
    if model.kind == "ocsvm":
        header.update(gamma=est.gamma_, nu=est.nu, paper_sign=bool(est.paper_sign),
                      degenerate=bool(est.degenerate_), boundary=est.boundary_)
        body = _svm_state(est)
    elif model.kind == "ssvm":
        header.update(gamma=est.gamma_, svm_type=est.svm_type, nu=est.nu, C=est.C,
                      class_weight=est.class_weight)
        body = _svm_state(est)
    elif model.kind == "pu":
        svm = est.g_.svm_
        header.update(gamma=svm.gamma_, svm_type=est.svm_type, nu=est.nu, C=est.C,
                      class_weight=est.class_weight, c=est.c_, threshold=est.threshold,
                      holdout=est.holdout)
        body = _svm_state(svm)
        body["platt"] = {"A": est.g_.A_, "B": est.g_.B_}
    else:
        raise ValueError(f"unknown model kind {model.kind!r}")
    return {"header": header, "model": body, "vocabulary": model.vocabulary.dumps()}


def model_from_dict(doc):
    try:
        header = doc["header"]
        if header.get("format") != FORMAT:
            raise CorruptModel("not a model file")
        if header.get("version") != VERSION:
            raise VersionMismatch(f"model version {header.get('version')!r}, expected {VERSION}")
        kind = header["kind"]
        body = doc["model"]
        vocab = TermVocabulary.loads(doc["vocabulary"])
        if vocab.digest != header["vocab_hash"]:
            raise CorruptModel("embedded vocabulary does not match its digest")
        if kind == "ocsvm":
            est = OneClassSVM(nu=header["nu"], gamma=header["gamma"], kernel=header["kernel"],
                              paper_sign=header["paper_sign"])
            est.degenerate_ = header["degenerate"]
            est.boundary_ = header["boundary"]
            _restore_svm(est, body)
        elif kind == "ssvm":
            est = SupervisedSVM(header["svm_type"], nu=header["nu"], C=header["C"],
                                class_weight=header["class_weight"], gamma=header["gamma"],
                                kernel=header["kernel"])
            _restore_svm(est, body)
        elif kind == "pu":
            svm = SupervisedSVM(header["svm_type"], nu=header["nu"], C=header["C"],
                                class_weight=header["class_weight"], gamma=header["gamma"])
            _restore_svm(svm, body)
            est = PUClassifier(header["svm_type"], nu=header["nu"], C=header["C"],
                               class_weight=header["class_weight"], gamma=header["gamma"],
                               holdout=header["holdout"], threshold=header["threshold"])
            est.g_ = CalibratedSVM(svm)
            est.g_.svm_ = svm
            est.g_.classes_ = svm.classes_
            est.g_.A_ = body["platt"]["A"]
            est.g_.B_ = body["platt"]["B"]
            est.c_ = header["c"]
            est.n_features_in_ = body["n_features"]
            est.classes_ = np.array([-1, 1])
        else:
            raise CorruptModel(f"unknown model kind {kind!r}")
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise CorruptModel(f"malformed model file: {exc}") from exc
    return TrainedModel(kind, est, vocab)


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, ensure_ascii=False, separators=(",", ":"))
        fh.write("\n")


def load_model(path):
    """Read a model file.

    Raises
    ------
    VersionMismatch
        The file was written by an incompatible format version.
    CorruptModel
        The file is truncated or malformed.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptModel("model file is not a JSON object")
    return model_from_dict(doc)
