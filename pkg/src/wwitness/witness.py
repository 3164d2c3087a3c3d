"""Separability-eigenvalue bounds for witnesses built from generalized W states.

For ``L = |W><W|`` with ``|W> = sum_i lambda_i |0..1_i..0>`` the largest
separability eigenvalue over a product of ``K`` parties with weights ``w_i``
(mode moduli ``|lambda_i|`` or block masses ``sqrt(M_i)``) is

    max over r in [0,1]^K of ( sum_i w_i sqrt(1 - r_i^2) prod_{j != i} r_j )^2.

Interior stationary points are found through ``x_n = sqrt(1 - r_n^2) / r_n``
and the scalar ``S = sum_i w_i x_i``: each ``x_n`` solves
``w_n x^2 - S x + w_n = 0``, leaving a one-dimensional self-consistency
condition in ``S``. At most one ``x_n`` exceeds 1 at a stationary point, so
the all-minus-root pattern and the K single-plus-root patterns cover every
interior candidate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .partitions import InvalidPartitionError, ModePartition, bipartitions, enumerate_partitions

NORM_TOL = 1e-10
STATIONARY_TOL = 1e-9


class WeightError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WWeights:
    """Complex amplitudes of an N-mode W state; only moduli enter the bounds."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lam, dtype=complex).reshape(-1)
        if lam.size == 0:
            raise WeightError("need at least one mode")
        nrm = float(np.sum(np.abs(lam) ** 2))
        if abs(nrm - 1) > NORM_TOL:
            raise WeightError(f"sum |lambda_i|^2 = {nrm:.15g}, expected 1")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def normalized(cls, lam: Iterable[complex]) -> "WWeights":
        lam = np.asarray(list(lam), dtype=complex)
        return cls(lam / np.linalg.norm(lam))

    @property
    def n_modes(self) -> int:
        return int(self.lam.size)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.lam)

    def masses(self, partition: ModePartition) -> np.ndarray:
        if partition.n_modes != self.n_modes:
            raise InvalidPartitionError(
                f"partition covers {partition.n_modes} modes, weights have {self.n_modes}")
        m2 = self.moduli**2
        return np.array([sum(m2[i - 1] for i in b) for b in partition.blocks])


@dataclass(frozen=True)
class MaxGConfig:
    """Solver knobs.

    ``fallback``: ``"auto"`` runs the multi-start ascent only when the root
    scan finds no interior stationary point, ``"always"`` runs it every time,
    ``"never"`` skips it.
    """

    n_starts: int = 64
    seed: int = 0
    fallback: str = "auto"
    scan_points: int = 600
    scan_span: float = 1e6
    max_sweeps: int = 5000

    def __post_init__(self):
        if self.fallback not in ("auto", "always", "never"):
            raise ValueError(f"unknown fallback mode {self.fallback!r}")


DEFAULT_CONFIG = MaxGConfig()


@dataclass(frozen=True, eq=False)
class SEOutcome:
    g_max: float
    optimizer: np.ndarray
    source: str
    partition: ModePartition | None = field(default=None)

    def to_dict(self) -> dict:
        out = {"value": self.g_max, "optimizer_r": [float(r) for r in self.optimizer],
               "source": self.source}
        if self.partition is not None:
            out["partition"] = [list(b) for b in self.partition.blocks]
        return out


def se_value(weights: Sequence[float], r) -> np.ndarray:
    """The objective on ``r`` of shape ``(..., K)``; vectorized over leading axes."""
    w = np.asarray(weights, dtype=float)
    r = np.clip(np.asarray(r, dtype=float), 0.0, 1.0)
    s = np.sqrt(1.0 - r * r)
    ones = np.ones(r.shape[:-1] + (1,))
    prefix = np.cumprod(np.concatenate([ones, r[..., :-1]], -1), -1)
    suffix = np.cumprod(np.concatenate([ones, r[..., :0:-1]], -1), -1)[..., ::-1]
    amp = np.sum(w * s * prefix * suffix, -1)
    return amp * amp


def stationarity_residual(weights: Sequence[float], x: Sequence[float]) -> float:
    """``max_n |w_n - x_n sum_{i != n} w_i x_i|``."""
    w = np.asarray(weights, dtype=float)
    x = np.asarray(x, dtype=float)
    S = float(np.dot(w, x))
    return float(np.max(np.abs(w - x * (S - w * x))))


def _x_of_S(S, w, plus):
    S = np.asarray(S, dtype=float)[..., None]
    disc = np.sqrt(np.maximum(S * S - 4 * w * w, 0.0))
    x = 2 * w / (S + disc)
    if plus is not None:
        x[..., plus] = (S[..., 0] + disc[..., plus]) / (2 * w[plus])
    return x


def _interior_candidates(w: np.ndarray, cfg: MaxGConfig) -> list[tuple[float, np.ndarray]]:
    K = w.size
    S0 = 2.0 * float(w.max())
    grid = S0 * np.geomspace(1.0, cfg.scan_span, cfg.scan_points)
    out = []
    for plus in [None, *range(K)]:

        def F(S, plus=plus):
            return float(_x_of_S(S, w, plus) @ w - S)

        vals = _x_of_S(grid, w, plus) @ w - grid
        roots = []
        if abs(vals[0]) <= 1e-14:
            roots.append(grid[0])
        sign = np.sign(vals)
        for j in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
            a, b = grid[j], grid[j + 1]
            fa, fb = F(a), F(b)
            if fa == 0 or fb == 0:
                roots.append(a if fa == 0 else b)
            elif fa * fb < 0:
                roots.append(brentq(F, a, b, xtol=1e-15, rtol=1e-15))
            else:
                # vectorized and scalar rounding disagree; keep the closer end
                roots.append(a if abs(fa) < abs(fb) else b)
        for S in roots:
            x = _x_of_S(S, w, plus)
            if stationarity_residual(w, x) < STATIONARY_TOL:
                g = float(np.dot(w, x) ** 2 / np.prod(1.0 + x * x))
                out.append((g, 1.0 / np.sqrt(1.0 + x * x)))
    return out


def multistart_ascent(weights: Sequence[float], n_starts: int = 64, seed: int = 0,
                      max_sweeps: int = 5000, tol: float = 1e-16) -> tuple[float, np.ndarray]:
    """Derivative-free multi-start coordinate ascent over ``[0,1]^K``.

    With all other coordinates fixed the amplitude is ``A sqrt(1 - r^2) + B r``
    (``A, B >= 0``), maximized in closed form at ``r = B / sqrt(A^2 + B^2)``.
    All starts are advanced together, one coordinate at a time, until no
    sweep raises any start by more than ``tol``.
    """
    w = np.asarray(weights, dtype=float)
    K = w.size
    rng = np.random.default_rng(seed)
    R = rng.uniform(0.0, 1.0, size=(n_starts, K))
    val = se_value(w, R)
    for _ in range(max_sweeps):
        for k in range(K):
            others = np.delete(R, k, axis=1)
            wo = np.delete(w, k)
            A = w[k] * np.prod(others, axis=1)
            B = np.sqrt(se_value(wo, others)) if K > 1 else np.zeros(n_starts)
            nrm = np.hypot(A, B)
            R[:, k] = np.where(nrm > 0, B / np.where(nrm > 0, nrm, 1.0), R[:, k])
        new = se_value(w, R)
        gain = float(np.max(new - val))
        val = new
        if gain <= tol:
            break
    i = int(np.argmax(val))
    return float(val[i]), R[i].copy()


def _validate(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size == 0:
        raise WeightError("K = 0: no parties")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise WeightError("weights must be finite and non-negative")
    nrm = float(np.sum(w * w))
    if abs(nrm - 1.0) > NORM_TOL:
        raise WeightError(f"sum of squared weights is {nrm:.15g}, expected 1")
    return w


@lru_cache(maxsize=200_000)
def _max_g_sorted(w_sorted: tuple[float, ...], cfg: MaxGConfig) -> tuple[float, tuple, str]:
    # w_sorted holds the non-zero weights in descending order
    w = np.array(w_sorted)
    K = w.size
    best_g = float(w[0] ** 2)
    best_r = np.ones(K)
    best_r[0] = 0.0
    source = "boundary"
    if K == 1 or (best_g >= 0.5 - 1e-12 and cfg.fallback != "always"):
        # the cut {largest} | rest caps g at max(w0^2, 1 - w0^2), within 2e-12 of w0^2
        return best_g, tuple(best_r), source
    interior = _interior_candidates(w, cfg)
    for g, r in interior:
        if g > best_g + 1e-15:
            best_g, best_r, source = g, r, "interior-stationary"
    if cfg.fallback == "always" or (cfg.fallback == "auto" and not interior):
        g, r = multistart_ascent(w, cfg.n_starts, cfg.seed, cfg.max_sweeps)
        if g > best_g + 1e-12:
            best_g, best_r, source = g, r, "multistart"
    return best_g, tuple(best_r), source


def max_g(weights: Sequence[float], config: MaxGConfig | None = None) -> SEOutcome:
    """Largest separability eigenvalue for non-negative, unit-norm party weights.

    Zero weights are inert and dropped before solving; their parties get
    ``r = 1`` (vacuum) in the returned optimizer.
    """
    cfg = config or DEFAULT_CONFIG
    w = _validate(weights)
    nz = np.nonzero(w > 0)[0]
    order = nz[np.argsort(-w[nz], kind="stable")]
    g, r_sorted, source = _max_g_sorted(tuple(float(v) for v in w[order]), cfg)
    r = np.ones(w.size)
    r[order] = r_sorted
    return SEOutcome(min(g, 1.0), r, source)


def _bisect(F, lo, hi, iters=200):
    """Vectorized bisection in log S; ``F(lo) > 0 > F(hi)`` element-wise."""
    for _ in range(iters):
        mid = np.sqrt(lo * hi)
        pos = F(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 4e-16 * hi):
            break
    return 0.5 * (lo + hi)


def _xs_rows(W, jmax, S, plus):
    # W: (..., K), S: (...), plus root taken on column jmax when requested
    disc = np.sqrt(np.maximum(S[..., None] ** 2 - 4 * W * W, 0.0))
    x = 2 * W / (S[..., None] + disc)
    if plus:
        wm = np.take_along_axis(W, jmax[..., None], -1)
        dm = np.take_along_axis(disc, jmax[..., None], -1)
        np.put_along_axis(x, jmax[..., None], (S[..., None] + dm) / (2 * wm), -1)
    return x


def _F_rows(W, jmax, S, plus):
    return np.sum(W * _xs_rows(W, jmax, S, plus), -1) - S


def _g_rows(W, jmax, S, plus):
    x = _xs_rows(W, jmax, S, plus)
    Ssum = np.sum(W * x, -1)
    resid = np.max(np.abs(W - x * (Ssum[..., None] - W * x)), -1)
    g = Ssum**2 / np.prod(1 + x * x, -1)
    return np.where(resid < STATIONARY_TOL, g, 0.0)


def max_g_batch(weights, scan_points: int = 256, chunk: int = 2048) -> np.ndarray:
    """Row-wise max SE for a ``(B, K)`` array of unit-norm weight rows.

    Zero entries are allowed and inert. The all-minus-root pattern has at
    most one root and is bisected directly; the plus root on the largest
    weight is located by a log-spaced scan of ``scan_points`` and bisected in
    every sign-change bracket. Roots with the plus branch on a smaller weight
    are not searched here; :func:`max_g` covers them. Every candidate is an
    attained objective value, so the result never exceeds the true maximum.
    Rows are processed ``chunk`` at a time to bound memory.
    """
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    if np.any(W < 0) or np.any(np.abs(np.sum(W * W, 1) - 1) > NORM_TOL):
        raise WeightError("rows must be non-negative with unit norm")
    if W.shape[0] > chunk:
        return np.concatenate([max_g_batch(W[i:i + chunk], scan_points, chunk)
                               for i in range(0, W.shape[0], chunk)])
    B, K = W.shape
    jmax = np.argmax(W, axis=1)
    wmax = W[np.arange(B), jmax]
    best = wmax**2
    if K == 1:
        return best
    S0 = 2 * wmax

    f0 = _F_rows(W, jmax, S0, False)
    best = np.maximum(best, np.where(np.abs(f0) <= 1e-14, _g_rows(W, jmax, S0, False), 0.0))
    # all-minus: F decreases from F(S0) and is negative beyond sqrt(2)
    has = f0 > 1e-14
    if has.any():
        Wh, jh, s0 = W[has], jmax[has], S0[has]
        S = _bisect(lambda S: _F_rows(Wh, jh, S, False), s0.copy(), np.maximum(2 * s0, 1.5))
        best[has] = np.maximum(best[has], _g_rows(Wh, jh, S, False))

    grid = S0[:, None] * np.geomspace(1.0, 1e7, scan_points)[None]
    Wg = np.broadcast_to(W[:, None, :], (B, scan_points, K))
    jg = np.broadcast_to(jmax[:, None], (B, scan_points))
    vals = _F_rows(Wg, jg, grid, True)
    rows, cols = np.nonzero(np.sign(vals[:, :-1]) * np.sign(vals[:, 1:]) < 0)
    if rows.size:
        Wr, jr = W[rows], jmax[rows]
        lo, hi = grid[rows, cols], grid[rows, cols + 1]
        sgn = np.sign(vals[rows, cols])
        S = _bisect(lambda S: sgn * _F_rows(Wr, jr, S, True), lo, hi)
        np.maximum.at(best, rows, _g_rows(Wr, jr, S, True))
    return np.minimum(best, 1.0)


def one_diff_closed_form(N: int, lam: float, lam_prime: float) -> float:
    """Max SE when ``N - 1`` weights equal ``lam`` and one equals ``lam_prime``."""
    N = int(N)
    if N < 2:
        raise WeightError("need N >= 2")
    lam, lam_prime = abs(float(lam)), abs(float(lam_prime))
    if abs((N - 1) * lam**2 + lam_prime**2 - 1) > NORM_TOL:
        raise WeightError("weights are not normalized")
    if lam == 0:
        return lam_prime**2
    if lam_prime / lam < math.sqrt(N - 1):
        ratio = (N - 1) * (N - 2) * lam**2 / ((N - 1) ** 2 * lam**2 - lam_prime**2)
        return (N - 1) * lam**2 * ratio ** (N - 2)
    return max(lam**2, lam_prime**2)


def bipartition_se(weights: WWeights, block: Iterable[int]) -> float:
    block = set(int(b) for b in block)
    n = weights.n_modes
    if not block or len(block) >= n or not block <= set(range(1, n + 1)):
        raise InvalidPartitionError(f"block {sorted(block)} is not a proper subset of 1..{n}")
    m2 = weights.moduli**2
    inside = float(sum(m2[i - 1] for i in block))
    return max(inside, float(m2.sum()) - inside)


def partition_se(weights: WWeights, partition: ModePartition,
                 config: MaxGConfig | None = None) -> SEOutcome:
    masses = weights.masses(partition)
    out = max_g(np.sqrt(masses / masses.sum()), config)
    return SEOutcome(out.g_max, out.optimizer, out.source, partition)


def _best(outcomes: list[SEOutcome]) -> SEOutcome:
    top = max(o.g_max for o in outcomes)
    ties = [o for o in outcomes if o.g_max >= top - 1e-12]
    return min(ties, key=lambda o: o.partition.blocks)


def full_bound(weights: WWeights, config: MaxGConfig | None = None) -> SEOutcome:
    return partition_se(weights, ModePartition.singletons(weights.n_modes), config)


def part_bound(weights: WWeights, forced_singletons: Iterable[int] = (),
               config: MaxGConfig | None = None, enumeration_limit: int = 8,
               full_enumeration: bool = False) -> SEOutcome:
    """Max SE over partially separable splits, with the partition attaining it.

    Up to ``enumeration_limit`` modes every partition is scored; beyond it
    only the coarsest admissible ones (exactly two free blocks) are, which
    gives the same value because merging blocks never lowers the bound.
    """
    n = weights.n_modes
    forced = frozenset(forced_singletons)
    exhaustive = full_enumeration or n <= enumeration_limit
    parts = enumerate_partitions(n, 2, forced, max_blocks=None if exhaustive else 2)
    return _best([partition_se(weights, p, config) for p in parts])


def f_full(weights: WWeights, config: MaxGConfig | None = None) -> float:
    return full_bound(weights, config).g_max


def f_part(weights: WWeights, forced_singletons: Iterable[int] = (),
           config: MaxGConfig | None = None, **kw) -> float:
    return part_bound(weights, forced_singletons, config, **kw).g_max


def bipartition_maximum(weights: WWeights) -> float:
    return max(bipartition_se(weights, a) for a, _ in bipartitions(range(1, weights.n_modes + 1)))


def _check_eta(eta):
    eta = np.asarray(eta, dtype=float)
    if np.any((eta < 0) | (eta > 1)) or not np.all(np.isfinite(eta)):
        raise ValueError("eta must lie in [0, 1]")
    return eta


def closed_form_f_full_eta(eta):
    """Isotropic-loss full-separability bound as a function of efficiency."""
    eta = _check_eta(eta)
    out = np.piecewise(eta, [eta <= 0.5, eta > 0.5],
                       [lambda e: 1 - e, lambda e: 27 * e**4 / (5 * e - 1) ** 3])
    return float(out) if out.ndim == 0 else out


def closed_form_f_part_eta(eta):
    """Isotropic-loss partial-separability bound, mode 5 kept separate."""
    eta = _check_eta(eta)
    out = np.piecewise(
        eta, [eta <= 0.5, (eta > 0.5) & (eta < 2 / 3), eta >= 2 / 3],
        [lambda e: 1 - e,
         lambda e: 3 * e**2 * (e - 1) / (13 * e**2 - 16 * e + 4),
         lambda e: 0.75 * e])
    return float(out) if out.ndim == 0 else out


def w5_weights(eta: Sequence[float]) -> WWeights:
    """Purification weights ``sqrt(eta_n)/2`` plus the vacuum-mode weight.

    For N signal modes the prefactor is ``1/sqrt(N)``; N = 4 gives the
    five-mode state of the four-signal loss channel.
    """
    eta = _check_eta(np.atleast_1d(eta))
    n = eta.size
    extra = max(n - float(eta.sum()), 0.0)
    return WWeights(np.sqrt(np.append(eta, extra) / n))


def f_full_batch(weights) -> np.ndarray:
    """:func:`f_full` for each row of a ``(B, N)`` array of mode moduli."""
    return max_g_batch(np.abs(np.atleast_2d(weights)))


def f_part_batch(weights, forced_singletons: Iterable[int] = ()) -> np.ndarray:
    """:func:`f_part` for each row, scoring every admissible partition.

    Rows sharing a sorted mass vector are solved once.
    """
    W = np.abs(np.atleast_2d(np.asarray(weights)))
    B, n = W.shape
    m2 = W * W
    parts = enumerate_partitions(n, 2, forced_singletons)
    K = max(len(p) for p in parts)
    rows = np.zeros((B, len(parts), K))
    for j, p in enumerate(parts):
        for b, block in enumerate(p.blocks):
            rows[:, j, b] = m2[:, [i - 1 for i in block]].sum(1)
    flat = -np.sort(-rows.reshape(-1, K), axis=1)
    flat /= flat.sum(1, keepdims=True)
    uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
    g = max_g_batch(np.sqrt(uniq))[inverse.reshape(-1)]
    return g.reshape(B, len(parts)).max(1)
