"""Three-step classification by bipartition tests, plus recursive localization.

A bounds provider maps ``(L, A, B)`` to the supremum of ``<psi|L|psi>`` over
states that are products across the cut ``A|B`` (1-based labels of ``L``).
A test passes when ``Tr(rho L)`` strictly exceeds that bound (plus a 1e-12
rounding margin). Passing proves entanglement across the cut; failing proves
nothing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fockstate import DensityOperator, DimensionMismatchError, expectation, reduced_operator
from .oracle import OracleConfig, max_product_expectation
from .partitions import ModePartition, bipartitions
from .witness import MaxGConfig, WWeights, partition_se

BoundsProvider = Callable[[DensityOperator, Sequence[int], Sequence[int]], float]

NONE, PARTIAL, FULL = "none-detected", "partial", "full"
MARGIN = 1e-12


def w_family_weights(L: DensityOperator, tol: float = 1e-10):
    """Write ``L = |a><a| + c|0><0|`` with ``a`` in the one-photon sector.

    Returns ``(weights, scale)`` where ``weights`` are the unit-norm amplitudes
    ``(a, sqrt(c)) / sqrt(scale)`` on ``N + 1`` modes, or ``None`` when ``L``
    is not of this form.
    """
    n = L.n_modes
    M = L.matrix
    singles = [1 << (n - 1 - i) for i in range(n)]
    keep = [0] + singles
    rest = np.ones(M.shape, dtype=bool)
    rest[np.ix_(keep, keep)] = False
    rest[0, singles] = rest[singles, 0] = True
    if np.any(np.abs(M[rest]) > tol):
        return None
    c = float(M[0, 0].real)
    w, V = np.linalg.eigh(M[np.ix_(singles, singles)])
    t = float(w[-1])
    if c < -tol or t < -tol or np.any(np.abs(w[:-1]) > tol * max(1.0, t)):
        return None
    c, t = max(c, 0.0), max(t, 0.0)
    scale = c + t
    if scale <= tol:
        return None
    lam = np.append(np.sqrt(t) * V[:, -1], np.sqrt(c)) / np.sqrt(scale)
    return WWeights(lam), scale


class WitnessBounds:
    """Exact cut bounds for W-family operators via the purification."""

    def __init__(self, config: MaxGConfig | None = None):
        self.config = config

    def __call__(self, L, a, b) -> float:
        fam = w_family_weights(L)
        if fam is None:
            raise ValueError("operator is not of the form |a><a| + c|0><0|")
        weights, scale = fam
        extra = L.n_modes + 1
        part = ModePartition((tuple(a), tuple(b), (extra,)), frozenset({extra}))
        return scale * partition_se(weights, part, self.config).g_max


class OracleBounds:
    """Cut bounds from the product-state oracle; lower bounds in general."""

    def __init__(self, config: OracleConfig | None = None):
        self.config = config

    def __call__(self, L, a, b) -> float:
        part = ModePartition((tuple(a), tuple(b)))
        return max_product_expectation(L, part, self.config).value


class AutoBounds:
    """Witness bounds when ``L`` is in the W family, oracle otherwise."""

    def __init__(self, max_g_config: MaxGConfig | None = None,
                 oracle_config: OracleConfig | None = None):
        self.exact = WitnessBounds(max_g_config)
        self.fallback = OracleBounds(oracle_config)

    def __call__(self, L, a, b) -> float:
        if w_family_weights(L) is not None:
            return self.exact(L, a, b)
        return self.fallback(L, a, b)


@dataclass(frozen=True)
class CutTest:
    a: tuple[int, ...]
    b: tuple[int, ...]
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "bound": self.bound,
                "passed": self.passed}


@dataclass(frozen=True)
class Classification:
    verdict: str
    trace: float
    tests: tuple[CutTest, ...]

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "trace": self.trace,
                "tests": [t.to_dict() for t in self.tests]}


def classify_state(rho: DensityOperator, L: DensityOperator,
                   bounds: BoundsProvider | None = None,
                   margin: float = MARGIN) -> Classification:
    """Run ``Tr(rho L) > bound + margin`` on every bipartition of the modes.

    The default margin only absorbs rounding in numerically computed bounds.
    """
    if rho.n_modes != L.n_modes:
        raise DimensionMismatchError(
            f"state has {rho.n_modes} modes, test operator {L.n_modes}")
    if rho.n_modes < 2:
        raise DimensionMismatchError("need at least two modes to cut")
    bounds = bounds or AutoBounds()
    tr = expectation(rho, L)
    tests = []
    for a, b in bipartitions(range(1, rho.n_modes + 1)):
        bound = float(bounds(L, a, b))
        tests.append(CutTest(a, b, bound, tr > bound + margin))
    n_pass = sum(t.passed for t in tests)
    verdict = FULL if n_pass == len(tests) else PARTIAL if n_pass else NONE
    return Classification(verdict, tr, tuple(tests))


@dataclass(frozen=True)
class SubsetNode:
    """One subsystem of the localization tree, labelled by original modes.

    ``status`` is ``"entangled"`` when every cut inside passes, ``"single"``
    for one mode, otherwise the verdict inside it (``"partial"`` or
    ``"none-detected"``) with ``children`` split along a failed cut.
    """

    modes: tuple[int, ...]
    status: str
    tests: tuple[CutTest, ...] = ()
    children: tuple["SubsetNode", ...] = field(default=())

    def entangled_subsets(self) -> list[tuple[int, ...]]:
        if self.status == "entangled":
            return [self.modes]
        return [s for c in self.children for s in c.entangled_subsets()]

    def separated_modes(self) -> list[int]:
        if self.status == "single":
            return list(self.modes)
        return [m for c in self.children for m in c.separated_modes()]

    def to_dict(self) -> dict:
        out = {"modes": list(self.modes), "status": self.status}
        if self.tests:
            out["tests"] = [t.to_dict() for t in self.tests]
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        return out


def _split_cut(tests: Sequence[CutTest]) -> CutTest:
    failed = [t for t in tests if not t.passed]
    return min(failed, key=lambda t: (min(len(t.a), len(t.b)),
                                      min(t.a, t.b, key=lambda s: (len(s), s))))


def _locate(rho, L, labels, bounds) -> SubsetNode:
    if len(labels) == 1:
        return SubsetNode(tuple(labels), "single")
    res = classify_state(rho, L, bounds)
    relabel = lambda s: tuple(labels[i - 1] for i in s)
    tests = tuple(CutTest(relabel(t.a), relabel(t.b), t.bound, t.passed) for t in res.tests)
    if res.verdict == FULL:
        return SubsetNode(tuple(labels), "entangled", tests)
    cut = _split_cut(res.tests)
    children = []
    for side in sorted((cut.a, cut.b), key=lambda s: s):
        sub_rho = reduced_operator(rho, side)
        sub_L = reduced_operator(L, side)
        children.append(_locate(sub_rho, sub_L, list(relabel(side)), bounds))
    return SubsetNode(tuple(labels), res.verdict, tests, tuple(children))


def locate_entangled_subsets(rho: DensityOperator, L: DensityOperator,
                             bounds: BoundsProvider | None = None) -> SubsetNode:
    """Split along failed cuts and retest inside each side.

    Inside a subsystem the test operator is ``L`` reduced by partial trace.
    Only a ``partial`` verdict is refined; ``full`` and ``none-detected``
    return a single node without children. The split uses the failed cut
    with the smallest side, ties going to the lexicographically first.
    """
    bounds = bounds or AutoBounds()
    top = classify_state(rho, L, bounds)
    labels = list(range(1, rho.n_modes + 1))
    if top.verdict != PARTIAL:
        status = "entangled" if top.verdict == FULL else NONE
        return SubsetNode(tuple(labels), status, top.tests)
    return _locate(rho, L, labels, bounds)
