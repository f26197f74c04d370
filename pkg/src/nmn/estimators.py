"""Scikit-learn compatible estimators over the prototype classifiers.

These wrap the package's training loop behind the standard
fit/predict/predict_proba/score surface so the classifiers drop into
sklearn pipelines, grid search, and cross-validation. The heavy lifting
(kernel scoring, Adam, metrics) stays in :mod:`nmn.train`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .train import ClassifierHead, Dataset, TrainConfig, train_classifier

__all__ = ["YatPrototypeClassifier", "LinearSoftmaxClassifier"]


class _PrototypeClassifierBase(BaseEstimator, ClassifierMixin):
    _kind = None

    def __init__(self, epochs=5, batch_size=128, lr=1e-3, seed=0, eps=1e-6,
                 dtype="fp64"):
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.eps = eps
        self.dtype = dtype

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        cfg = TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                          lr=self.lr, seed=self.seed, dtype=self.dtype)
        data = Dataset(inputs=X, labels=y_idx)
        self.history_, self._head = train_classifier(
            self._kind, data, cfg, n_classes=len(self.classes_), eps=self.eps)
        self.prototypes_ = self._head.prototypes.copy()
        self.alpha_ = self._head.alpha
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "_head")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self._head.logits(X)

    def predict_proba(self, X):
        z = self.decision_function(X)
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]

    @property
    def head_(self) -> ClassifierHead:
        check_is_fitted(self, "_head")
        return self._head


class YatPrototypeClassifier(_PrototypeClassifierBase):
    """One yat-kernel prototype per class with an adaptive output scale.

    Logits are ``s * <w_c, x>^2 / (||w_c - x||^2 + eps)``; prototypes stay
    bounded during training and the classifier is robust to a global sign
    flip of the prototypes because the numerator is squared.
    """

    _kind = "nmn"


class LinearSoftmaxClassifier(_PrototypeClassifierBase):
    """Plain one-layer softmax classifier, the reference baseline."""

    _kind = "linear"
