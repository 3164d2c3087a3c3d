"""Brute-force supremum of <psi|L|psi> over product states of a mode partition.

Every start is a random product of block states. Blocks are then updated in
turn to the top eigenvector of the operator reduced onto that block, which is
an exact maximization over the block, so values never decrease. A converged
point satisfies the separability eigenvalue equations and doubles as a
certificate. All starts advance together as one batch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fockstate import DensityOperator, DimensionMismatchError, PureState
from .partitions import InvalidPartitionError, ModePartition

@dataclass(frozen=True)
class OracleConfig:
    """``n_starts`` is per block: a K-block partition runs ``n_starts * K`` starts."""

    n_starts: int = 64
    seed: int = 0
    tol: float = 1e-12
    max_rounds: int = 500
    degeneracy_tol: float = 1e-12
    polish_tol: float = 1e-10
    polish_rounds: int = 20000

    def __post_init__(self):
        if self.n_starts < 1 or self.max_rounds < 1:
            raise ValueError("n_starts and max_rounds must be positive")


@dataclass(frozen=True, eq=False)
class ProductState:
    partition: ModePartition
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        fs = tuple(np.array(f, dtype=complex).reshape(-1) for f in self.factors)
        if len(fs) != len(self.partition.blocks):
            raise InvalidPartitionError("one factor per block is required")
        for f, b in zip(fs, self.partition.blocks):
            if f.size != 2 ** len(b):
                raise DimensionMismatchError(f"block {b} needs {2 ** len(b)} amplitudes")
        object.__setattr__(self, "factors", fs)

    def to_pure_state(self) -> PureState:
        """Full state vector in the standard mode order."""
        p = self.partition
        n = p.n_modes
        psi = self.factors[0]
        for f in self.factors[1:]:
            psi = np.kron(psi, f)
        order = [m - 1 for b in p.blocks for m in b]
        t = psi.reshape([2] * n).transpose(np.argsort(order))
        return PureState(n, t.reshape(-1))

    def to_dict(self) -> dict:
        return {"partition": [list(b) for b in self.partition.blocks],
                "factors": [{"re": f.real.tolist(), "im": f.imag.tolist()}
                            for f in self.factors]}


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    certificate: ProductState
    residual: float
    rounds: int

    def to_dict(self) -> dict:
        return {"value": self.value, "residual": self.residual, "rounds": self.rounds,
                "certificate": self.certificate.to_dict()}


def _check(L: DensityOperator, partition: ModePartition) -> None:
    L.check_hermitian()
    if partition.n_modes != L.n_modes:
        raise DimensionMismatchError(
            f"partition covers {partition.n_modes} modes, operator acts on {L.n_modes}")


def _block_tensor(L: DensityOperator, partition: ModePartition) -> np.ndarray:
    """``L`` with modes regrouped by block: shape ``dims + dims``."""
    n = L.n_modes
    order = [m - 1 for b in partition.blocks for m in b]
    dims = [2 ** len(b) for b in partition.blocks]
    t = L.matrix.reshape([2] * (2 * n)).transpose(order + [n + o for o in order])
    return t.reshape(dims + dims)


class _Contractor:
    """Reduces a block-ordered operator onto one block for a batch of product states."""

    def __init__(self, T: np.ndarray, dims: list[int]):
        K = len(dims)
        self.dims = dims
        self.views = []
        for k in range(K):
            others = [j for j in range(K) if j != k]
            perm = others + [k] + [K + j for j in others] + [K + k]
            D = int(np.prod([dims[j] for j in others]))
            d = dims[k]
            # rows (others, k) x cols (others, k) -> (D, d * D * d)
            self.views.append(np.ascontiguousarray(T.transpose(perm)).reshape(D, d * D * d))

    def reduced(self, states: list[np.ndarray], k: int) -> np.ndarray:
        z = states[0].shape[0]
        psi = np.ones((z, 1), dtype=complex)
        for j, s in enumerate(states):
            if j != k:
                psi = (psi[:, :, None] * s[:, None, :]).reshape(z, -1)
        d = self.dims[k]
        D = psi.shape[1]
        A = (psi.conj() @ self.views[k]).reshape(z, d, D, d)
        return np.einsum("zkbl,zb->zkl", A, psi)

    def value(self, states: list[np.ndarray]) -> np.ndarray:
        M = self.reduced(states, 0)
        return np.einsum("za,zab,zb->z", states[0].conj(), M, states[0]).real


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    # largest component real and positive; first index wins ties
    idx = np.argmax(np.round(np.abs(v), 12), axis=-1)
    lead = np.take_along_axis(v, idx[..., None], -1)
    return v * (np.abs(lead) / np.where(lead == 0, 1, lead))


def _top_vectors(M: np.ndarray, prev: np.ndarray, tol: float) -> np.ndarray:
    """Top eigenvector per start; inside a degenerate top space, the projection of ``prev``."""
    M = 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))
    w, V = np.linalg.eigh(M)
    top = V[..., -1]
    inside = w >= w[..., -1:] - tol
    if np.any(inside.sum(-1) > 1):
        P = V * inside[..., None, :]
        proj = np.einsum("zij,zkj,zk->zi", P, P.conj(), prev)
        nrm = np.linalg.norm(proj, axis=-1, keepdims=True)
        use = nrm[..., 0] > 1e-8
        top = np.where(use[:, None], proj / np.where(nrm == 0, 1, nrm), top)
    return _canonical_phase(top)


def _random_states(rng: np.random.Generator, n: int, dims: list[int]) -> list[np.ndarray]:
    out = []
    for d in dims:
        z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        out.append(z / np.linalg.norm(z, axis=1, keepdims=True))
    return out


def max_product_expectation(L: DensityOperator, partition: ModePartition | None = None,
                            config: OracleConfig | None = None) -> OracleResult:
    """Largest ``<psi|L|psi>`` found over products across ``partition``.

    Defaults to the all-singleton partition. The value is a lower bound on
    the supremum; it is exact whenever one start reaches the global maximum.
    """
    cfg = config or OracleConfig()
    partition = partition or ModePartition.singletons(L.n_modes)
    _check(L, partition)
    K = len(partition.blocks)
    T = _block_tensor(L, partition)
    if K == 1:
        w, V = np.linalg.eigh(0.5 * (L.matrix + L.matrix.conj().T))
        cert = ProductState(partition, (_canonical_phase(V[:, -1]),))
        return OracleResult(float(w[-1]), cert, stationarity_residual(L, cert), 0)

    dims = [2 ** len(b) for b in partition.blocks]
    C = _Contractor(T, dims)
    rng = np.random.default_rng(cfg.seed)
    states = _random_states(rng, cfg.n_starts * K, dims)
    value = C.value(states)
    rounds = 0
    for rounds in range(1, cfg.max_rounds + 1):
        for k in range(K):
            states[k] = _top_vectors(C.reduced(states, k), states[k], cfg.degeneracy_tol)
        new = C.value(states)
        done = np.max(np.abs(new - value)) < cfg.tol
        value = new
        if done:
            break

    top = float(value.max())
    ties = np.nonzero(value >= top - 1e-12)[0]
    keys = [tuple(np.round(np.concatenate([np.concatenate([s[i].real, s[i].imag])
                                           for s in states]), 10)) for i in ties]
    pick = int(ties[min(range(len(ties)), key=keys.__getitem__)])
    best = [s[pick:pick + 1] for s in states]
    # the value settles quadratically faster than the state, so keep refining
    # the chosen start until it satisfies the eigenvalue equations
    for _ in range(cfg.polish_rounds):
        if _residual(C, best) < cfg.polish_tol:
            break
        for k in range(K):
            best[k] = _top_vectors(C.reduced(best, k), best[k], cfg.degeneracy_tol)
        rounds += 1
    cert = ProductState(partition, tuple(s[0] for s in best))
    return OracleResult(float(C.value(best)[0]), cert, _residual(C, best), rounds)


def stationarity_residual(L: DensityOperator, state: ProductState) -> float:
    """``max_k || L_k psi_k - g psi_k ||`` with ``g = <psi|L|psi>``."""
    _check(L, state.partition)
    T = _block_tensor(L, state.partition)
    states = [f[None, :] / np.linalg.norm(f) for f in state.factors]
    C = _Contractor(T, [f.size for f in state.factors])
    if len(states) == 1:
        v = states[0][0]
        g = float(np.real(np.vdot(v, L.matrix @ v)))
        return float(np.linalg.norm(L.matrix @ v - g * v))
    return _residual(C, states)


def _residual(C: _Contractor, states: list[np.ndarray]) -> float:
    g = float(C.value(states)[0])
    res = 0.0
    for k in range(len(states)):
        v = C.reduced(states, k)[0] @ states[k][0]
        res = max(res, float(np.linalg.norm(v - g * states[k][0])))
    return res


def ascent_history(L: DensityOperator, partition: ModePartition, n_starts: int = 8,
                   rounds: int = 20, seed: int = 0) -> np.ndarray:
    """Objective after every single-block update, shape ``(rounds * K + 1, n_starts)``."""
    _check(L, partition)
    K = len(partition.blocks)
    dims = [2 ** len(b) for b in partition.blocks]
    C = _Contractor(_block_tensor(L, partition), dims)
    states = _random_states(np.random.default_rng(seed), n_starts, dims)
    out = [C.value(states)]
    for _ in range(rounds):
        for k in range(K):
            states[k] = _top_vectors(C.reduced(states, k), states[k], 1e-12)
            out.append(C.value(states))
    return np.array(out)
