"""Diagonal-covariance Gaussian mixture fitted by expectation-maximization.

Means start from k-means++ seeding; variances start at the pooled per-feature
variance. Variances are floored at ``var_floor`` so a component that collapses
onto repeated values stays finite. Because the floor is applied per dimension
to a likelihood that is unimodal in each variance, the floored M-step is
still a constrained maximizer and the log-likelihood never decreases.

Outlier labelling: with two or more components, the component with the
smallest mixing weight is called suspicious (ties go to the lowest index).
With one component nothing is flagged. ``suspicious_component`` overrides.

EM is restarted ``n_init`` times from independently seeded initializations
and the run with the highest final log-likelihood is kept (first on ties).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DataError, DegenerateFitError, ParameterError
from ..rng import derive_seed, make_rng

VAR_FLOOR = 1e-6
MAX_REINITS = 3
_EMPTY_RESP = 1e-10


@dataclass
class GaussianMixture:
    n_components: int = 2
    max_iters: int = 200
    tol: float = 1e-6
    var_floor: float = VAR_FLOOR
    seed: int = 0
    n_init: int = 10
    suspicious_component: Optional[int] = None

    weights: Optional[np.ndarray] = None
    means: Optional[np.ndarray] = None
    variances: Optional[np.ndarray] = None
    log_likelihoods: list = field(default_factory=list)
    reinit_iters: list = field(default_factory=list)
    converged: bool = False
    restart_histories: list = field(default_factory=list)

    def __post_init__(self):
        if self.n_components < 1:
            raise ParameterError(f"n_components must be >= 1, got {self.n_components}")
        if self.n_init < 1:
            raise ParameterError(f"n_init must be >= 1, got {self.n_init}")

    def _log_joint(self, X: np.ndarray) -> np.ndarray:
        """``log(w_k) + log N(x | mu_k, diag var_k)`` with shape (N, K)."""
        diff = X[:, None, :] - self.means[None, :, :]
        quad = np.sum(diff * diff / self.variances[None, :, :], axis=2)
        log_det = np.sum(np.log(self.variances), axis=1)
        d = X.shape[1]
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        return log_w[None, :] - 0.5 * (d * math.log(2 * math.pi) + log_det[None, :] + quad)

    def _e_step(self, X):
        lj = self._log_joint(X)
        m = lj.max(axis=1, keepdims=True)
        log_norm = m[:, 0] + np.log(np.exp(lj - m).sum(axis=1))
        resp = np.exp(lj - log_norm[:, None])
        return resp, float(log_norm.sum())

    def _m_step(self, X, resp):
        nk = resp.sum(axis=0)
        self.weights = nk / nk.sum()
        safe = np.where(nk > 0, nk, 1.0)
        self.means = (resp.T @ X) / safe[:, None]
        diff2 = (X[:, None, :] - self.means[None, :, :]) ** 2
        var = np.einsum("nk,nkd->kd", resp, diff2) / safe[:, None]
        self.variances = np.maximum(var, self.var_floor)
        return nk

    def _init(self, X, rng):
        n = len(X)
        centers = [int(rng.integers(n))]
        d2 = np.sum((X - X[centers[0]]) ** 2, axis=1)
        for _ in range(1, self.n_components):
            total = d2.sum()
            if total > 0:
                idx = int(rng.choice(n, p=d2 / total))
            else:
                idx = int(rng.integers(n))
            centers.append(idx)
            d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
        self.means = X[centers].copy()
        pooled = np.maximum(X.var(axis=0), self.var_floor)
        self.variances = np.tile(pooled, (self.n_components, 1))
        self.weights = np.full(self.n_components, 1.0 / self.n_components)

    def _reinit_component(self, X, k):
        others = [j for j in range(self.n_components) if j != k]
        if others:
            d2 = np.min(
                np.sum((X[:, None, :] - self.means[None, others, :]) ** 2, axis=2), axis=1
            )
        else:
            d2 = np.zeros(len(X))
        far = int(np.argmax(d2))  # first maximum on ties
        self.means[k] = X[far]
        self.variances[k] = np.maximum(X.var(axis=0), self.var_floor)
        self.weights = np.full(self.n_components, 1.0 / self.n_components)

    def fit(self, X) -> "GaussianMixture":
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if len(X) < self.n_components:
            raise DataError(f"need at least {self.n_components} rows, got {len(X)}")
        best = None
        self.restart_histories = []
        for i in range(self.n_init):
            self._fit_once(X, make_rng(derive_seed(self.seed, i)))
            state = (
                self.weights, self.means, self.variances,
                self.log_likelihoods, self.reinit_iters, self.converged,
            )
            self.restart_histories.append(
                {"log_likelihoods": self.log_likelihoods, "reinit_iters": self.reinit_iters}
            )
            if best is None or self.log_likelihoods[-1] > best[3][-1]:
                best = state
        (self.weights, self.means, self.variances,
         self.log_likelihoods, self.reinit_iters, self.converged) = best
        return self

    def _fit_once(self, X, rng):
        self._init(X, rng)
        self.log_likelihoods = []
        self.reinit_iters = []
        self.converged = False
        reinits = 0
        for it in range(self.max_iters):
            resp, ll = self._e_step(X)
            self.log_likelihoods.append(ll)
            if len(self.log_likelihoods) > 1 and it - 1 not in self.reinit_iters:
                if abs(ll - self.log_likelihoods[-2]) < self.tol:
                    self.converged = True
                    return
            nk = self._m_step(X, resp)
            empty = np.flatnonzero(nk < _EMPTY_RESP)
            if empty.size:
                reinits += 1
                if reinits > MAX_REINITS:
                    raise DegenerateFitError(
                        f"component(s) {empty.tolist()} emptied after {MAX_REINITS} re-initializations"
                    )
                for k in empty:
                    self._reinit_component(X, int(k))
                self.reinit_iters.append(it)
        # final parameters come from the last M-step; score them too
        self.log_likelihoods.append(self._e_step(X)[1])

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        return self._e_step(X)[0]

    def predict_components(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def suspicious_components(self) -> list[int]:
        if self.suspicious_component is not None:
            return [self.suspicious_component]
        if self.n_components < 2:
            return []
        return [int(np.argmin(self.weights))]

    def predict(self, X) -> np.ndarray:
        """Binary outlier labels (1 = suspicious)."""
        comp = self.predict_components(X)
        return np.isin(comp, self.suspicious_components()).astype(int)


def gmm_fit_predict(X, n_components: int = 2, seed: int = 0, **kwargs):
    model = GaussianMixture(n_components=n_components, seed=seed, **kwargs).fit(X)
    return model.predict(X), model
