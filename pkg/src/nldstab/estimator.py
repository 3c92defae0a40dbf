"""scikit-learn style facade: ``fit`` sweeps frequencies, ``transform``
returns functionals, ``predict`` flags linear instability."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import ParameterError
from .model import make_model
from .sweep import analyse_point, run_sweep

FEATURES = ("Q", "K", "M", "V", "E", "L")


def validate_omegas(X, model) -> np.ndarray:
    """Accept a 1-D sequence or an ``(n, 1)`` column of frequencies inside the gap."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    arr = check_array(arr, ensure_2d=True, dtype=float)
    if arr.shape[1] != 1:
        raise ParameterError(f"expected a single column of frequencies, got shape {arr.shape}")
    w = arr[:, 0]
    bad = [x for x in w if not model.in_gap(x)]
    if bad:
        raise ParameterError(f"frequencies outside the gap (-m, m): {bad[:5]}")
    return w


def is_unstable(sl, tol: float = 1e-6) -> bool:
    """A retained, non-zero-mode eigenvalue with real part above ``tol``."""
    lam = sl.retained_eigenvalues()
    return bool(lam.size and np.max(lam.real) > tol)


class StabilityAnalyzer(TransformerMixin, BaseEstimator):
    def __init__(self, family="MTM", k=1.0, m=1.0, M=511, scheme="fourier",
                 stretch="auto", radius=0.05, adaptive=False, instability_tol=1e-6):
        self.family = family
        self.k = k
        self.m = m
        self.M = M
        self.scheme = scheme
        self.stretch = stretch
        self.radius = radius
        self.adaptive = adaptive
        self.instability_tol = instability_tol

    def _model(self):
        return make_model(self.family, self.k, self.m)

    def fit(self, X, y=None):
        model = self._model()
        w = validate_omegas(X, model)
        res = run_sweep(model, w, M=self.M, scheme=self.scheme, stretch=self.stretch,
                        radius=self.radius, adaptive=self.adaptive)
        self.model_ = model
        self.sweep_ = res
        self.events_ = res.events
        crit = res.critical()
        self.omega_E_ = crit["omega_E"]
        self.omega_VK_ = crit["omega_VK"]
        self.n_features_in_ = 1
        return self

    def _point(self, omega, spectrum):
        for p in self.sweep_.points:
            if p.omega == omega and (p.slice is not None or not spectrum):
                return p
        return analyse_point(self.model_, omega, M=self.M, scheme=self.scheme,
                             stretch=self.stretch, spectrum=spectrum)

    def transform(self, X):
        """Rows ``(Q, K, M, V, E, L)``; NaN where the profile solve failed."""
        check_is_fitted(self, "sweep_")
        w = validate_omegas(X, self.model_)
        out = np.full((w.size, len(FEATURES)), np.nan)
        for i, omega in enumerate(w):
            rep = self._point(float(omega), spectrum=False).report
            if rep is not None:
                out[i] = [getattr(rep, f) for f in FEATURES]
        return out

    def predict(self, X):
        """1 where the linearisation has an eigenvalue with positive real part."""
        check_is_fitted(self, "sweep_")
        w = validate_omegas(X, self.model_)
        out = np.zeros(w.size, dtype=int)
        for i, omega in enumerate(w):
            sl = self._point(float(omega), spectrum=True).slice
            out[i] = -1 if sl is None else int(is_unstable(sl, self.instability_tol))
        return out
