"""Kernel machines: one-class SVM, two-class SVM, PU learning, model selection."""

from .calibration import fit_sigmoid, sigmoid
from .kernels import KernelSpec, kernel_matrix, median_gamma, rbf
from .model_selection import GridSearchResult, GridSearchSpec, grid_search, stratified_folds
from .persist import TrainedModel, load_model, save_model
from .pu import CalibratedSVM, PUClassifier
from .svm import OneClassSVM, SupervisedSVM

__all__ = [
    "CalibratedSVM",
    "GridSearchResult",
    "GridSearchSpec",
    "KernelSpec",
    "OneClassSVM",
    "PUClassifier",
    "SupervisedSVM",
    "TrainedModel",
    "fit_sigmoid",
    "grid_search",
    "kernel_matrix",
    "load_model",
    "median_gamma",
    "rbf",
    "save_model",
    "sigmoid",
    "stratified_folds",
]
