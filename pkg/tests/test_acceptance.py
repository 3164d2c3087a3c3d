"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run with pytest, or directly: ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from wwitness import cavity, losschannel, oracle, witness
from wwitness.fockstate import w_state
from wwitness.partitions import ModePartition, bipartitions, enumerate_partitions


def _fresh_solver():
    witness._max_g_sorted.cache_clear()


def criterion_1():
    _fresh_solver()
    t0 = time.perf_counter()
    W4 = witness.WWeights(np.full(4, 0.5))
    L = w_state(W4.lam).projector()
    vals = {
        "solver_full": witness.f_full(W4),
        "solver_part": witness.f_part(W4),
        "oracle_full": oracle.max_product_expectation(L).value,
        "oracle_part": max(oracle.max_product_expectation(L, ModePartition((a, b))).value
                           for a, b in bipartitions(range(1, 5))),
    }
    dt = time.perf_counter() - t0
    target = {"solver_full": 27 / 64, "oracle_full": 27 / 64,
              "solver_part": 0.75, "oracle_part": 0.75}
    err = max(abs(vals[k] - target[k]) for k in vals)
    return err <= 1e-10 and dt < 1.0, f"max err {err:.2e} (tol 1e-10), {dt:.2f} s (limit 1 s)"


def criterion_2():
    _fresh_solver()
    err = max(abs(witness.max_g(np.full(K, K**-0.5)).g_max - ((K - 1) / K) ** (K - 1))
              for K in range(2, 9))
    return err <= 1e-10, f"max err {err:.2e} over K=2..8 (tol 1e-10)"


def criterion_3():
    _fresh_solver()
    err, n = 0.0, 0
    for N in range(3, 8):
        s = math.sqrt(N - 1)
        ratios = np.append(np.linspace(0.05, 2.5, 49) * s, s)
        for ratio in ratios:
            lam = 1 / math.sqrt(N - 1 + ratio**2)
            w = np.append(np.full(N - 1, lam), ratio * lam)
            err = max(err, abs(witness.one_diff_closed_form(N, lam, ratio * lam)
                               - witness.max_g(w).g_max))
            n += 1
    return err <= 1e-8 and n == 250, f"max err {err:.2e} on {n} points (tol 1e-8)"


def criterion_4():
    _fresh_solver()
    t0 = time.perf_counter()
    eta = np.linspace(0, 1, 1001)
    W = losschannel.grid_weights(eta, eta)
    ff = witness.f_full_batch(W)
    fp = witness.f_part_batch(W, [5])
    err = max(np.max(np.abs(ff - witness.closed_form_f_full_eta(eta))),
              np.max(np.abs(fp - witness.closed_form_f_part_eta(eta))))
    # scalar solver on a subset, as a second numerical route
    for e in eta[::50]:
        w = witness.w5_weights([e] * 4)
        err = max(err, abs(witness.f_full(w) - witness.closed_form_f_full_eta(e)),
                  abs(witness.f_part(w, [5]) - witness.closed_form_f_part_eta(e)))
    dt = time.perf_counter() - t0
    e = 0.5
    jumps = [abs((1 - e) - 27 * e**4 / (5 * e - 1) ** 3),
             abs((1 - e) - 3 * e**2 * (e - 1) / (13 * e**2 - 16 * e + 4))]
    e = 2 / 3
    jumps.append(abs(3 * e**2 * (e - 1) / (13 * e**2 - 16 * e + 4) - 0.75 * e))
    jump = max(jumps)
    ok = err <= 1e-8 and jump <= 1e-12 and dt < 10
    return ok, f"max err {err:.2e} (tol 1e-8), branch jump {jump:.1e} (tol 1e-12), {dt:.2f} s"


def criterion_5():
    rows = losschannel.sweep_eta("iso", 1001)
    flips = all(r.partial == r.full == (r.eta > 0.5) for r in rows)
    rng = np.random.default_rng(0)
    err = max(abs(losschannel.lhs_trace(e) - losschannel.lhs_trace_matrix(e))
              for e in rng.random((100, 4)))
    first = min(r.eta for r in rows if r.partial)
    return flips and err <= 1e-12, (f"first detected eta {first:.3f}, "
                                    f"formula vs purity {err:.1e} (tol 1e-12)")


def criterion_6():
    _fresh_solver()
    t0 = time.perf_counter()
    n = 201
    rows = losschannel.sweep_eta("grid", n)
    dt = time.perf_counter() - t0
    eta = np.array([r.eta for r in rows]).reshape(n, n)
    etap = np.array([r.etaprime for r in rows]).reshape(n, n)
    tr = np.array([r.trace_lhs for r in rows]).reshape(n, n)
    ff = np.array([r.f_full for r in rows]).reshape(n, n)
    fp = np.array([r.f_part for r in rows]).reshape(n, n)
    part = np.array([r.partial for r in rows]).reshape(n, n)
    full = np.array([r.full for r in rows]).reshape(n, n)
    contains = bool(np.all(part[full])) and bool(np.any(part & ~full))
    # |f(W) - f(W')| <= 2 ||W - W'|| for any supremum of <psi|W><W|psi>
    W = losschannel.grid_weights(eta, etap)
    cont = True
    for axis in (0, 1):
        dW = np.linalg.norm(np.diff(W, axis=axis), axis=-1)
        dT = np.abs(np.diff(tr, axis=axis))
        for f in (ff, fp):
            jump = np.abs(np.diff(tr - f, axis=axis))
            cont &= bool(np.all(jump <= dT + 2 * dW + 1e-12))
    i = np.arange(n)
    diag = max(np.max(np.abs(ff[i, i] - witness.closed_form_f_full_eta(eta[i, i]))),
               np.max(np.abs(fp[i, i] - witness.closed_form_f_part_eta(eta[i, i]))))
    rng = np.random.default_rng(6)
    spot = 0.0
    for a, b in rng.integers(0, n, size=(40, 2)):
        w = witness.WWeights(W[a, b])
        spot = max(spot, abs(witness.f_full(w) - ff[a, b]),
                   abs(witness.f_part(w, [5]) - fp[a, b]))
    ok = contains and cont and diag <= 1e-8 and spot <= 1e-8 and dt < 120
    return ok, (f"full in partial and smaller: {contains}, continuity bound holds: {cont}, "
                f"diagonal err {diag:.1e}, scalar spot err {spot:.1e}, {dt:.1f} s")


def criterion_7():
    rng = np.random.default_rng(7)
    err = 0.0
    for e in rng.random((20, 4)):
        direct = oracle.max_product_expectation(losschannel.apply_loss(e)).value
        err = max(err, abs(direct - witness.f_full(witness.w5_weights(e))))
    return err <= 1e-6, f"max |oracle - purification bound| {err:.2e} over 20 draws (tol 1e-6)"


def criterion_8():
    counts_ok = len(enumerate_partitions(4, 2)) == 14
    bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140]
    counts_ok &= all(len(enumerate_partitions(n, 1)) == bell[n] for n in range(1, 9))
    rng = np.random.default_rng(8)
    err = 0.0
    for N in range(2, 7):
        for _ in range(8):
            w = witness.WWeights.normalized(rng.random(N) + 0.01)
            err = max(err, abs(witness.f_part(w) - witness.bipartition_maximum(w)))
    return counts_ok and err <= 1e-8, f"Bell counts ok: {counts_ok}, max err {err:.1e} (tol 1e-8)"


def _grid_local_max(phi, i, j):
    return phi[i, j] >= phi[i - 1:i + 2, j - 1:j + 2].max()


def criterion_9():
    p = cavity.CavityParams()
    M = cavity.hopfield_coefficients(np.linspace(0, 10, 10001), p)
    orth = float(np.max(np.abs(M @ np.swapaxes(M, -1, -2) - np.eye(2))))
    KX, KY, phi = cavity.phase_matching_grid(p)
    axis = KX[:, 0]
    cell = lambda x: int(np.argmin(np.abs(axis - x)))
    signals = cavity.PumpGeometry.square(p.k_p).signal_vectors()
    sig_ok = [_grid_local_max(phi, cell(x), cell(y)) for x, y in signals]
    r0 = math.sqrt(2) * p.k_p
    ring_ok = []
    for th in np.linspace(0, 2 * np.pi, 361)[:-1]:
        i, j = cell(r0 * math.cos(th)), cell(r0 * math.sin(th))
        di, dj = round(math.cos(th)), round(math.sin(th))
        # a ring is a ridge: the cell must beat its radial neighbours
        ring_ok.append(phi[i, j] >= max(phi[i + di, j + dj], phi[i - di, j - dj]))
    ok = orth <= 1e-12 and all(sig_ok) and all(ring_ok)
    return ok, (f"Hopfield orthogonality {orth:.1e}; signal cells that are 3x3 maxima "
                f"{sum(sig_ok)}/4; ring cells that are radial maxima {sum(ring_ok)}/360")


def _selftest_output(seed):
    proc = subprocess.run([sys.executable, "-m", "wwitness.cli", "selftest", "--seed", str(seed)],
                          capture_output=True, timeout=300)
    return proc.returncode, proc.stdout


def criterion_10():
    a = _selftest_output(3)
    b = _selftest_output(3)
    same = a == b
    return same and a[0] == 0, f"identical output: {same}, exit code {a[0]}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number - 1]()
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        failures += not ok
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
    sys.exit(1 if failures else 0)
