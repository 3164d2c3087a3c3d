"""Polariton front-end for the four-pump microcavity.

Wave numbers are dimensionless, in units of ``k_0 = E_C(0)`` (hbar = c = 1);
energies are in eV. Excitons are dispersionless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fockstate import PureState, w_state


@dataclass(frozen=True)
class CavityParams:
    E_C0: float = 1.5
    E_X: float = 1.5
    Omega_R: float = 2e-3
    gamma: float = 10e-6
    k_p: float = 0.01
    E_b: float | None = None
    p_s: float | None = None

    def __post_init__(self):
        for name in ("E_C0", "E_X", "Omega_R", "gamma", "k_p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.E_b is not None:
            if not self.E_b > 0:
                raise ValueError("E_b must be positive")
            expected = 2 * self.Omega_R / self.E_b
            if self.p_s is not None and not math.isclose(self.p_s, expected, rel_tol=1e-12):
                raise ValueError(f"p_s={self.p_s} inconsistent with 2*Omega_R/E_b={expected}")

    @property
    def binding_energy(self) -> float:
        # potentials are reported in units of E_b, so 1 when it is not given
        return 1.0 if self.E_b is None else self.E_b

    @property
    def splitting_ratio(self) -> float:
        if self.p_s is not None and self.E_b is None:
            return self.p_s
        return 2 * self.Omega_R / self.binding_energy

    @classmethod
    def from_mapping(cls, cfg: dict) -> "CavityParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown cavity parameters: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in cfg.items() if v is not None})


@dataclass(frozen=True)
class PumpGeometry:
    pumps: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.pumps is None:
            raise ValueError("use PumpGeometry.square(k_p) for the default geometry")
        p = np.array(self.pumps, dtype=float).reshape(4, 2)
        mod = np.hypot(p[:, 0], p[:, 1])
        if np.max(np.abs(mod - mod[0])) > 1e-12:
            raise ValueError("pump wave vectors must share one modulus")
        p.setflags(write=False)
        object.__setattr__(self, "pumps", p)

    @classmethod
    def square(cls, k_p: float) -> "PumpGeometry":
        return cls(np.array([[k_p, k_p], [-k_p, k_p], [-k_p, -k_p], [k_p, -k_p]]))

    @property
    def modulus(self) -> float:
        return float(np.hypot(*self.pumps[0]))

    def signal_vectors(self) -> np.ndarray:
        """Signals of the neighboring-pump processes sharing the idler at k = 0."""
        p = self.pumps
        return np.array([p[0] + p[1], p[1] + p[2], p[2] + p[3], p[0] + p[3]])


def _check_k(k):
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("wave-vector modulus must be non-negative")
    return k


def photon_dispersion(k, p: CavityParams):
    k = _check_k(k)
    return p.E_C0 * np.sqrt(1.0 + k * k)


def polariton_dispersions(k, p: CavityParams):
    """Lower and upper polariton energies ``(E_1, E_2)``."""
    ec = photon_dispersion(k, p)
    mean = 0.5 * (ec + p.E_X)
    half_gap = np.sqrt((0.5 * (ec - p.E_X)) ** 2 + p.Omega_R**2)
    return mean - half_gap, mean + half_gap


def lower_polariton(k, p: CavityParams):
    return polariton_dispersions(k, p)[0]


def hopfield_coefficients(k, p: CavityParams) -> np.ndarray:
    """Hopfield matrix ``M`` at modulus ``k``; shape ``(..., 2, 2)``."""
    ec = photon_dispersion(k, p)
    _, e2 = polariton_dispersions(k, p)
    rho = (e2 - ec) / p.Omega_R
    m11 = 1.0 / np.sqrt(1.0 + rho * rho)
    m12 = np.sqrt(np.clip(1.0 - m11 * m11, 0.0, None))
    return np.stack([np.stack([m11, m12], -1), np.stack([-m12, m11], -1)], -2)


def branch_potential(k, kprime, q, branches, p: CavityParams) -> float:
    """Branch-resolved pair potential in units of E_b for 2-vectors ``k, k', q``."""
    j1, j2, j3, j4 = branches
    k, kprime, q = (np.asarray(v, dtype=float) for v in (k, kprime, q))

    def M(a, b, vec):
        return float(hopfield_coefficients(float(np.hypot(*vec)), p)[a - 1, b - 1])

    kq, kpq = k + q, kprime - q
    core = M(1, j2, kpq) * M(1, j3, k)
    return (12 * M(1, j1, kq) * core * M(1, j4, kprime)
            - 8 * math.pi / 7 * p.splitting_ratio
            * (M(2, j1, kq) * core * M(1, j4, kprime)
               + M(1, j1, kq) * core * M(2, j4, kprime)))


def effective_potential(p: CavityParams) -> float:
    """Neighboring-pump lower-branch potential ``V_{k_p}/E_b``."""
    M0 = hopfield_coefficients(0.0, p)
    M2 = hopfield_coefficients(2 * p.k_p, p)
    Md = hopfield_coefficients(math.sqrt(2) * p.k_p, p)
    m11_0, m21_0 = M0[0, 0], M0[1, 0]
    m11_2 = M2[0, 0]
    m11_d, m21_d = Md[0, 0], Md[1, 0]
    return float(12 * m11_0 * m11_2 * m11_d**2
                 - 8 * math.pi / 7 * p.splitting_ratio
                 * (m21_0 * m11_2 * m11_d**2 + m11_0 * m11_2 * m11_d * m21_d))


def phase_matching(kx, ky, p: CavityParams, g: PumpGeometry | None = None):
    """Lorentzian phase-matching sum over all pump pairs; broadcasts over ``kx, ky``."""
    if g is None:
        g = PumpGeometry.square(p.k_p)
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    if not (np.all(np.isfinite(kx)) and np.all(np.isfinite(ky))):
        raise ValueError("wave vectors must be finite")
    e_signal = lower_polariton(np.hypot(kx, ky), p)
    e_ref = 2 * lower_polariton(g.modulus, p)
    g2 = p.gamma**2
    out = np.zeros(np.broadcast(kx, ky).shape)
    for a in g.pumps:
        for b in g.pumps:
            K = a + b
            det = e_signal + lower_polariton(np.hypot(K[0] - kx, K[1] - ky), p) - e_ref
            out = out + g2 / (det * det + g2)
    return out


def phase_matching_grid(p: CavityParams, extent: float = 0.03, n: int = 512,
                        g: PumpGeometry | None = None):
    """``(kx, ky, phi)`` on an ``n x n`` grid over ``|k_x|, |k_y| <= extent``.

    Arrays are indexed ``[i, j]`` with ``kx = axis[i]``, ``ky = axis[j]``.
    """
    axis = np.linspace(-extent, extent, n)
    KX, KY = np.meshgrid(axis, axis, indexing="ij")
    return KX, KY, phase_matching(KX, KY, p, g)


def emitted_signal_state(pump_amplitudes: Sequence[complex] | None = None):
    """Emitted state in the low-intensity limit.

    Returns ``(psi_out, psi)``: the five-role state with signals on modes 1-4
    and the shared idler on mode 5, and its idler-traced four-mode reduction.
    Signal n is fed by the neighboring pump pair (n, n+1 mod 4), so its weight
    is proportional to the product of those pump amplitudes. The overall
    scale ``V_{k_p} P^2 t`` is dropped and both states are normalized.
    """
    P = np.ones(4, dtype=complex) if pump_amplitudes is None else np.asarray(
        pump_amplitudes, dtype=complex)
    if P.shape != (4,):
        raise ValueError("need four pump amplitudes")
    pairs = [(0, 1), (1, 2), (2, 3), (0, 3)]
    lam = np.array([P[a] * P[b] for a, b in pairs])
    nrm = np.linalg.norm(lam)
    if nrm == 0:
        raise ValueError("all pump amplitudes vanish")
    lam = lam / nrm
    amp = np.zeros(32, dtype=complex)
    # |1_sn> |1_i>: signal bit plus the idler (least significant) bit
    for n, l in enumerate(lam):
        amp[(1 << (4 - n)) | 1] = l
    # the idler factorizes, so tracing it out leaves the pure W state
    return PureState(5, amp), w_state(lam)
