"""scikit-learn style wrappers around the functional API."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .fockstate import DensityOperator, w_state
from .losschannel import apply_loss
from .oracle import OracleConfig, max_product_expectation
from .partitions import ModePartition
from .witness import MaxGConfig, WWeights, full_bound, part_bound


def _as_matrices(X, dim: int) -> np.ndarray:
    if isinstance(X, DensityOperator):
        X = [X]
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], DensityOperator):
        X = [x.matrix for x in X]
    arr = np.asarray(X, dtype=complex)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1:] != (dim, dim):
        raise ValueError(f"expected density matrices of shape (n, {dim}, {dim}), got {arr.shape}")
    return arr


class WWitness(BaseEstimator):
    """Witness ``L = |W><W|`` with its full and partial separability bounds.

    ``fit`` takes the W amplitudes (normalized internally). ``predict`` maps
    states to 0 (nothing detected), 1 (not fully separable) or 2 (fully
    entangled), using strict inequalities.
    """

    def __init__(self, forced_singletons=(), n_starts=64, seed=0, fallback="auto"):
        self.forced_singletons = forced_singletons
        self.n_starts = n_starts
        self.seed = seed
        self.fallback = fallback

    def fit(self, X, y=None):
        lam = np.asarray(X, dtype=complex).reshape(-1)
        if lam.size < 2 or not np.all(np.isfinite(lam)):
            raise ValueError("need at least two finite amplitudes")
        self.weights_ = WWeights.normalized(lam)
        cfg = MaxGConfig(n_starts=self.n_starts, seed=self.seed, fallback=self.fallback)
        full = full_bound(self.weights_, cfg)
        part = part_bound(self.weights_, self.forced_singletons, cfg)
        self.f_full_, self.f_part_ = full.g_max, part.g_max
        self.partition_ = part.partition
        self.operator_ = w_state(self.weights_.lam).projector()
        self.n_modes_ = self.weights_.n_modes
        return self

    def score_samples(self, X) -> np.ndarray:
        check_is_fitted(self, "operator_")
        rho = _as_matrices(X, 2**self.n_modes_)
        return np.einsum("zij,ji->z", rho, self.operator_.matrix).real

    def decision_function(self, X) -> np.ndarray:
        """Margin above the full-separability bound."""
        return self.score_samples(X) - self.f_full_

    def predict(self, X) -> np.ndarray:
        s = self.score_samples(X)
        return (s > self.f_full_).astype(int) + (s > self.f_part_).astype(int)


class LossChannel(TransformerMixin, BaseEstimator):
    """Maps rows of efficiencies to lossy W-state density matrices."""

    def __init__(self, n_modes=4):
        self.n_modes = n_modes

    def fit(self, X=None, y=None):
        if X is not None:
            check_array(X, ensure_min_features=self.n_modes)
        self.n_features_in_ = self.n_modes
        return self

    def transform(self, X) -> np.ndarray:
        X = check_array(X)
        if X.shape[1] != self.n_modes:
            raise ValueError(f"expected {self.n_modes} efficiencies per row, got {X.shape[1]}")
        return np.stack([apply_loss(row).matrix for row in X])


class ProductStateOracle(BaseEstimator):
    """Fits the product-state supremum of a test operator across a partition."""

    def __init__(self, partition=None, n_starts=64, seed=0, max_rounds=500):
        self.partition = partition
        self.n_starts = n_starts
        self.seed = seed
        self.max_rounds = max_rounds

    def fit(self, X, y=None):
        L = X if isinstance(X, DensityOperator) else DensityOperator(
            int(np.log2(np.asarray(X).shape[0])), X)
        part = self.partition
        if isinstance(part, str):
            part = ModePartition.parse(part)
        cfg = OracleConfig(n_starts=self.n_starts, seed=self.seed, max_rounds=self.max_rounds)
        res = max_product_expectation(L, part, cfg)
        self.value_ = res.value
        self.certificate_ = res.certificate
        self.residual_ = res.residual
        return self
