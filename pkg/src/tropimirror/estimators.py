"""scikit-learn style wrappers.

The estimators are fitted on a polynomial (``X``) and its parameter values
(``y``), then applied to arrays of plane points ``w = (log|x|, log|y|)``.
A :class:`~tropimirror.fanio.FanFile` may be passed as ``X`` alone.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .amoeba import Membership, amoeba_membership, degree_by_root_count, ronkin_value
from .fanio import FanFile
from .mirror import MirrorPolynomial
from .tropical import spine_coefficients, tropical_hypersurface, TropicalPolynomial


def check_points(X) -> np.ndarray:
    """``(n, 2)`` float array of finite plane points."""
    X = check_array(X, dtype=float, ensure_2d=True, ensure_all_finite=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected points with 2 coordinates, got shape {X.shape}")
    return X


def check_polynomial(X, y=None):
    if isinstance(X, FanFile):
        return X.polynomial, X.polynomial.qvalue(X.q if y is None else y)
    if not isinstance(X, MirrorPolynomial):
        raise TypeError(f"expected a MirrorPolynomial or FanFile, got {type(X).__name__}")
    if y is None and X.p:
        raise ValueError("parameter values are required for this polynomial")
    return X, X.qvalue(() if y is None else y)


class SpineEstimator(BaseEstimator):
    """Fits the spine coefficients; ``predict`` returns the dominating term index."""

    def __init__(self, tol=1e-6):
        self.tol = tol

    def fit(self, X, y=None):
        H, q = check_polynomial(X, y)
        sc = spine_coefficients(H, q, self.tol)
        self.polynomial_ = H
        self.q_ = q
        self.gammas_ = sc.gammas
        self.k_max_ = sc.k_max
        self.tropical_ = TropicalPolynomial.from_arrays(sc.gammas, H.exponents)
        self.curve_ = tropical_hypersurface(self.tropical_)
        return self

    def transform(self, X):
        """Affine term values, one column per lattice point."""
        check_is_fitted(self, "tropical_")
        return self.tropical_.values(check_points(X))

    def predict(self, X):
        check_is_fitted(self, "tropical_")
        return self.tropical_.argmax(check_points(X))


class AmoebaClassifier(ClassifierMixin, BaseEstimator):
    """Three-state amoeba membership of plane points."""

    def __init__(self, fiber_samples=256, tol=0.05):
        self.fiber_samples = fiber_samples
        self.tol = tol

    def fit(self, X, y=None):
        self.polynomial_, self.q_ = check_polynomial(X, y)
        self.classes_ = np.array([m.value for m in Membership])
        return self

    def predict(self, X):
        check_is_fitted(self, "polynomial_")
        P = check_points(X)
        return np.array([amoeba_membership(self.polynomial_, self.q_, w, self.fiber_samples, self.tol).value
                         for w in P])

    def predict_degree(self, X):
        """Root-count degree of the complement component at each point (meaningless on the amoeba)."""
        check_is_fitted(self, "polynomial_")
        return np.array([degree_by_root_count(self.polynomial_, self.q_, w) for w in check_points(X)])


class RonkinTransformer(TransformerMixin, BaseEstimator):
    """Ronkin function values (one column) at plane points."""

    def __init__(self, grid=256):
        self.grid = grid

    def fit(self, X, y=None):
        self.polynomial_, self.q_ = check_polynomial(X, y)
        return self

    def transform(self, X):
        check_is_fitted(self, "polynomial_")
        P = check_points(X)
        return np.array([[ronkin_value(self.polynomial_, self.q_, w, self.grid).value] for w in P])

    def gradient(self, X, h=1e-3):
        """Central finite-difference gradient, shape ``(n, 2)``."""
        P = check_points(X)
        out = np.zeros_like(P)
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            out[:, k] = (self.transform(P + e)[:, 0] - self.transform(P - e)[:, 0]) / (2 * h)
        return out
