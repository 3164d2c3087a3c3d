"""Beam-splitter loss on the emitted W state and the efficiency sweeps.

Each signal mode n passes a beam splitter of transmittance ``eta_n``; the
bath modes are traced out analytically, which leaves the W state mixed with
vacuum. For N signal modes the single-photon amplitudes are ``sqrt(eta_n/N)``
and the vacuum weight is ``(N - sum eta) / N``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .fockstate import DensityOperator, PureState, expectation, w_state
from .witness import (closed_form_f_full_eta, closed_form_f_part_eta, f_full_batch,
                      f_part_batch, w5_weights)

CSV_HEADER = ("eta", "etaprime", "trace_lhs", "f_full", "f_part", "partial", "full")


@dataclass(frozen=True, eq=False)
class Efficiencies:
    eta: np.ndarray

    def __post_init__(self):
        eta = np.array(self.eta, dtype=float).reshape(-1)
        if eta.size == 0:
            raise ValueError("need at least one efficiency")
        if not np.all(np.isfinite(eta)) or np.any((eta < 0) | (eta > 1)):
            raise ValueError(f"efficiencies must lie in [0, 1], got {eta}")
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def isotropic(cls, eta: float, n_modes: int = 4) -> "Efficiencies":
        return cls(np.full(n_modes, float(eta)))

    @property
    def n_modes(self) -> int:
        return int(self.eta.size)


def _as_eff(etas) -> Efficiencies:
    return etas if isinstance(etas, Efficiencies) else Efficiencies(etas)


def lossy_amplitudes(etas) -> np.ndarray:
    e = _as_eff(etas)
    return np.sqrt(e.eta / e.n_modes)


def apply_loss(etas) -> DensityOperator:
    """``|psi_mix><psi_mix| + (N - sum eta)/N |0><0|``."""
    e = _as_eff(etas)
    psi = w_state(lossy_amplitudes(e))
    m = np.outer(psi.amplitudes, psi.amplitudes.conj())
    m[0, 0] += (e.n_modes - e.eta.sum()) / e.n_modes
    return DensityOperator(e.n_modes, m)


def purify(etas) -> PureState:
    """W state on N + 1 modes whose last mode carries the vacuum weight."""
    return w_state(w5_weights(_as_eff(etas).eta).lam)


def lhs_trace(etas) -> float:
    """``Tr(rho_mix L)`` for ``L = rho_mix``, in closed form (four signal modes)."""
    e = _as_eff(etas)
    s = float(e.eta.sum())
    n = e.n_modes
    # general N: 1 - 2s/N + 2 s^2/N^2; N = 4 gives 1 - s/2 + s^2/8
    return 1 - 2 * s / n + 2 * s * s / n**2


def lhs_trace_matrix(etas) -> float:
    rho = apply_loss(etas)
    return expectation(rho, rho, strict=True)


def turbulence_mean(samples: Iterable[Sequence[float]]) -> Efficiencies:
    """Replace fluctuating efficiencies by their componentwise mean."""
    arr = np.array([_as_eff(s).eta for s in samples])
    if arr.size == 0:
        raise ValueError("no efficiency samples")
    return Efficiencies(arr.mean(axis=0))


@dataclass(frozen=True)
class SweepRow:
    eta: float
    etaprime: float | None
    trace_lhs: float
    f_full: float
    f_part: float

    @property
    def partial(self) -> bool:
        return self.trace_lhs > self.f_full

    @property
    def full(self) -> bool:
        return self.trace_lhs > self.f_part

    def as_tuple(self):
        return (self.eta, self.etaprime, self.trace_lhs, self.f_full, self.f_part,
                self.partial, self.full)


def _grid(steps: int, lo: float, hi: float) -> np.ndarray:
    if not 0 <= lo <= hi <= 1:
        raise ValueError(f"grid bounds [{lo}, {hi}] must lie within [0, 1]")
    if steps < 2:
        raise ValueError("need at least two grid steps")
    return np.linspace(lo, hi, steps)


def sweep_isotropic(steps: int = 1001, lo: float = 0.0, hi: float = 1.0) -> list[SweepRow]:
    """Equal efficiencies on all four signals, bounds from the closed forms."""
    eta = _grid(steps, lo, hi)
    s = 4 * eta
    lhs = 1 - s / 2 + s * s / 8
    ff = closed_form_f_full_eta(eta)
    fp = closed_form_f_part_eta(eta)
    return [SweepRow(float(e), None, float(t), float(a), float(b))
            for e, t, a, b in zip(eta, lhs, ff, fp)]


def grid_weights(eta, etaprime) -> np.ndarray:
    """Purification moduli for ``eta_1 = eta_2 = eta_3 = eta``, ``eta_4 = eta'``."""
    eta = np.asarray(eta, dtype=float)
    etap = np.asarray(etaprime, dtype=float)
    vac = np.clip(4 - 3 * eta - etap, 0.0, None)
    return np.sqrt(np.stack([eta, eta, eta, etap, vac], -1) / 4)


def sweep_eta_etaprime(steps: int = 201, lo: float = 0.0, hi: float = 1.0) -> list[SweepRow]:
    """Anisotropic sweep over ``(eta, eta')``; rows ordered eta-major."""
    axis = _grid(steps, lo, hi)
    E, EP = np.meshgrid(axis, axis, indexing="ij")
    E, EP = E.ravel(), EP.ravel()
    W = grid_weights(E, EP)
    s = 3 * E + EP
    lhs = 1 - s / 2 + s * s / 8
    ff = f_full_batch(W)
    fp = f_part_batch(W, forced_singletons=[5])
    return [SweepRow(float(e), float(p), float(t), float(a), float(b))
            for e, p, t, a, b in zip(E, EP, lhs, ff, fp)]


def sweep_eta(mode: str = "iso", steps: int | None = None, lo: float = 0.0,
              hi: float = 1.0) -> list[SweepRow]:
    if mode in ("iso", "isotropic"):
        return sweep_isotropic(steps or 1001, lo, hi)
    if mode in ("grid", "eta-etaprime"):
        return sweep_eta_etaprime(steps or 201, lo, hi)
    raise ValueError(f"unknown sweep mode {mode!r}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return format(float(v), ".17g")


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([_fmt(v) for v in r.as_tuple()])
    return buf.getvalue()
