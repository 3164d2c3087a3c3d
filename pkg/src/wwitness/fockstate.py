"""Dense states and operators on N two-level modes (at most one photon per mode).

Basis vectors are occupation bitstrings with mode 1 as the most significant
bit, so ``|1,0,0,0>`` sits at index 8. Mode labels in the public API are
1-based throughout the package.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_MODES = 12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10
IMAG_TOL = 1e-10


class InvalidOccupationError(ValueError):
    pass


class InvalidModeError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


def _check_n_modes(n_modes: int) -> int:
    n_modes = int(n_modes)
    if not 1 <= n_modes <= MAX_MODES:
        raise InvalidModeError(f"n_modes must be in [1, {MAX_MODES}], got {n_modes}")
    return n_modes


@dataclass(frozen=True, eq=False)
class PureState:
    n_modes: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n = _check_n_modes(self.n_modes)
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape[0] != 2**n:
            raise DimensionMismatchError(
                f"expected {2**n} amplitudes for {n} modes, got {amp.shape[0]}")
        amp.setflags(write=False)
        object.__setattr__(self, "n_modes", n)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "PureState":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(self.n_modes, self.amplitudes / nrm)

    def projector(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(self.n_modes, np.outer(a, a.conj()))

    def to_dict(self) -> dict:
        return {"n_modes": self.n_modes,
                "re": self.amplitudes.real.tolist(),
                "im": self.amplitudes.imag.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PureState":
        return cls(d["n_modes"], np.asarray(d["re"]) + 1j * np.asarray(d["im"]))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A state or a general Hermitian test operator on ``n_modes`` modes.

    Nothing is enforced at construction beyond the shape; use
    :meth:`check_hermitian` / :meth:`check_state` where the caller needs it.
    """

    n_modes: int
    matrix: np.ndarray

    def __post_init__(self):
        n = _check_n_modes(self.n_modes)
        m = np.array(self.matrix, dtype=complex)
        d = 2**n
        if m.shape != (d, d):
            raise DimensionMismatchError(f"expected a {d}x{d} matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "n_modes", n)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return 2**self.n_modes

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_error() <= tol

    def check_hermitian(self, tol: float = HERMITIAN_TOL) -> "DensityOperator":
        err = self.hermiticity_error()
        if err > tol:
            raise ValueError(f"operator is not Hermitian (max deviation {err:.3g})")
        return self

    def check_state(self) -> "DensityOperator":
        self.check_hermitian()
        tr = self.trace()
        if abs(tr - 1) > TRACE_TOL:
            raise ValueError(f"trace {tr:.15g} differs from 1")
        lo = float(np.linalg.eigvalsh(self.matrix).min())
        if lo < PSD_TOL:
            raise ValueError(f"minimum eigenvalue {lo:.3g} below {PSD_TOL}")
        return self

    def purity(self) -> float:
        return expectation(self, self)

    def to_dict(self) -> dict:
        return {"n_modes": self.n_modes,
                "re": self.matrix.real.ravel().tolist(),
                "im": self.matrix.imag.ravel().tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DensityOperator":
        n = int(d["n_modes"])
        flat = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        if flat.size == 2**n:
            return PureState(n, flat).projector()
        return cls(n, flat.reshape(2**n, 2**n))


def basis_index(occupations: Sequence[int]) -> int:
    idx = 0
    for b in occupations:
        if b not in (0, 1):
            raise InvalidOccupationError(f"occupation {b!r} is not 0 or 1")
        idx = (idx << 1) | int(b)
    return idx


def occupations(index: int, n_modes: int) -> list[int]:
    return [(index >> (n_modes - 1 - k)) & 1 for k in range(n_modes)]


def basis_state(occ: Sequence[int]) -> PureState:
    amp = np.zeros(2 ** len(occ), dtype=complex)
    amp[basis_index(occ)] = 1.0
    return PureState(len(occ), amp)


def vacuum(n_modes: int) -> PureState:
    return basis_state([0] * n_modes)


def w_state(weights: Iterable[complex]) -> PureState:
    """Single excitation shared among the modes with the given amplitudes."""
    lam = np.asarray(list(weights), dtype=complex)
    n = lam.size
    amp = np.zeros(2**n, dtype=complex)
    for i, l in enumerate(lam):
        amp[1 << (n - 1 - i)] = l
    return PureState(n, amp)


def tensor_product(a: PureState, b: PureState) -> PureState:
    return PureState(a.n_modes + b.n_modes, np.kron(a.amplitudes, b.amplitudes))


def _check_modes(modes: Iterable[int], n_modes: int) -> list[int]:
    out = sorted(set(int(m) for m in modes))
    for m in out:
        if not 1 <= m <= n_modes:
            raise InvalidModeError(f"mode {m} outside 1..{n_modes}")
    return out


def partial_trace(rho: DensityOperator, traced_modes: Iterable[int]) -> DensityOperator:
    n = rho.n_modes
    traced = _check_modes(traced_modes, n)
    keep = [m for m in range(1, n + 1) if m not in traced]
    if not keep:
        raise InvalidModeError("cannot trace out every mode")
    if not traced:
        return rho
    t = rho.matrix.reshape([2] * (2 * n))
    # trace highest axes first so remaining axis numbers stay valid
    for m in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=m - 1, axis2=cur + m - 1)
    d = 2 ** len(keep)
    return DensityOperator(len(keep), t.reshape(d, d))


def reduced_operator(rho: DensityOperator, keep_modes: Iterable[int]) -> DensityOperator:
    """Partial trace over the complement of ``keep_modes``; keeps the original order."""
    keep = _check_modes(keep_modes, rho.n_modes)
    return partial_trace(rho, [m for m in range(1, rho.n_modes + 1) if m not in keep])


def expectation(rho: DensityOperator, L: DensityOperator, *, strict: bool = False) -> float:
    """Real part of Tr(rho L).

    An imaginary residue above ``IMAG_TOL`` raises when ``strict`` is set and is
    otherwise dropped.
    """
    if rho.n_modes != L.n_modes:
        raise DimensionMismatchError(
            f"operators act on {rho.n_modes} and {L.n_modes} modes")
    val = np.einsum("ij,ji->", rho.matrix, L.matrix)
    if strict and abs(val.imag) > IMAG_TOL:
        raise ValueError(f"Tr(rho L) has imaginary part {val.imag:.3g}")
    return float(val.real)


def dump_json(obj: PureState | DensityOperator) -> str:
    return json.dumps(obj.to_dict())


def load_json(text: str) -> DensityOperator:
    """Load a fixture as an operator; state vectors become projectors."""
    return DensityOperator.from_dict(json.loads(text))
