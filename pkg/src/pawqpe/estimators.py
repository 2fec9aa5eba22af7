"""Estimator-style wrappers around the fitting stages.

Inputs are domain objects rather than feature matrices, so only the
parameter handling and the fit/transform protocol are borrowed.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import lcucost, toyscf, upaw_radial
from .factorize import factorize, truncate


class LCUFactorizer(BaseEstimator):
    """Factor a HamiltonianInstance and record its subnormalization."""

    def __init__(self, delta=0.0, floor=1e-10, beth=20):
        self.delta = delta
        self.floor = floor
        self.beth = beth

    def fit(self, X, y=None):
        full = factorize(X)
        self.factors_ = truncate(full, self.delta, self.floor)
        self.lambda_ = lcucost.lambda_total(self.factors_)
        self.L_, self.gamma_nominal_, self.gamma_nonzero_ = lcucost.gamma(self.factors_, self.beth)
        return self

    def score(self, X=None, y=None):
        """Negative total subnormalization (larger is better)."""
        check_is_fitted(self, "factors_")
        return -self.lambda_.total


class NaturalOrbitalCompressor(TransformerMixin, BaseEstimator):
    """Keep the leading MP2 natural virtual orbitals of an OrbitalSet."""

    def __init__(self, n_keep=None, semicanonical=True):
        self.n_keep = n_keep
        self.semicanonical = semicanonical

    def fit(self, X, y=None):
        D = toyscf.mp2_density(X, toyscf.CoulombIntegrals(orbitals=X))
        self.density_ = D
        self.occupations_ = np.linalg.eigvalsh(0.5 * (D + D.conj().T))[::-1]
        self.n_keep_ = X.n_virt if self.n_keep is None else int(self.n_keep)
        return self

    def transform(self, X):
        check_is_fitted(self, "density_")
        if X.n_virt != self.density_.shape[0]:
            raise ValueError(f"fitted on {self.density_.shape[0]} virtuals, got {X.n_virt}")
        return toyscf.natural_orbitals(X, self.density_, self.n_keep_, self.semicanonical)


class PseudoWaveFitter(BaseEstimator):
    """Fit polynomial pseudo partial waves; ``predict`` evaluates them on a grid."""

    def __init__(self, r_a=1.0, P=6, M=0, g_max=None, tol=upaw_radial.DEFAULT_TOL):
        self.r_a = r_a
        self.P = P
        self.M = M
        self.g_max = g_max
        self.tol = tol

    def fit(self, X, y=None):
        self.setup_ = upaw_radial.fit_pseudo_radial(X, self.r_a, self.P, self.M, self.g_max, self.tol)
        self.channels_ = list(X)
        return self

    def predict(self, r):
        check_is_fitted(self, "setup_")
        r = np.asarray(r, dtype=float)
        return np.array([self.setup_.evaluate(i, r, self.channels_[i]) for i in range(len(self.channels_))])
