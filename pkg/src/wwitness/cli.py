"""Command-line entry point: ``wwitness <subcommand> ...``.

Exit codes: 0 on success, 2 on invalid input, 3 when ``selftest`` finds a
numerical disagreement.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import cavity, classify, losschannel, oracle, witness
from .fockstate import DensityOperator, load_json
from .partitions import ModePartition

SEED_ENV = "W_WITNESS_SEED"
EXIT_OK, EXIT_INVALID, EXIT_SELFTEST = 0, 2, 3


class UsageError(ValueError):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() == ".json":
        return json.loads(text)
    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    return tomllib.loads(text)


def _seed(args, cfg: dict) -> int:
    """Flag, then environment, then config file, then 0."""
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from exc
    return int(cfg.get("seed", 0))


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def _ints(text: str | None) -> list[int]:
    return [int(v) for v in _floats(text)] if text else []


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _eta_vector(text: str, n_modes: int = 4) -> np.ndarray:
    vals = _floats(text)
    if len(vals) == 1:
        vals = vals * n_modes
    return np.array(vals)


def cmd_phase_match(args, cfg) -> int:
    params = cavity.CavityParams.from_mapping(cfg.get("cavity", {}))
    if args.point is not None:
        kx, ky = args.point
        _emit(_json({"value": float(cavity.phase_matching(kx, ky, params))}), args.out)
        return EXIT_OK
    if args.grid < 2 or args.extent <= 0:
        raise UsageError("--grid must be >= 2 and --extent positive")
    KX, KY, phi = cavity.phase_matching_grid(params, args.extent, args.grid)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("kx", "ky", "phi"))
    for row in zip(KX.ravel(), KY.ravel(), phi.ravel()):
        w.writerow([format(float(v), ".17g") for v in row])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_witness(args, cfg) -> int:
    forced = _ints(args.forced)
    if args.eta is not None:
        weights = witness.w5_weights(_eta_vector(args.eta))
        if args.mode == "part" and not forced:
            forced = [weights.n_modes]
    elif args.weights is not None:
        weights = witness.WWeights.normalized(_floats(args.weights))
    else:
        raise UsageError("give --eta or --weights")
    config = witness.MaxGConfig(seed=_seed(args, cfg))
    if args.mode == "full":
        out = witness.full_bound(weights, config)
    else:
        out = witness.part_bound(weights, forced, config)
    result = {"value": out.g_max}
    if args.verbose:
        result.update(out.to_dict())
    _emit(_json(result), args.out)
    return EXIT_OK


def cmd_sweep_eta(args, cfg) -> int:
    rows = losschannel.sweep_eta(args.mode, args.steps, args.lo, args.hi)
    _emit(losschannel.rows_to_csv(rows), args.out)
    return EXIT_OK


def _load_operator(path: str) -> DensityOperator:
    return load_json(Path(path).read_text())


def cmd_oracle(args, cfg) -> int:
    L = _load_operator(args.operator)
    part = ModePartition.parse(args.partition) if args.partition else None
    conf = oracle.OracleConfig(n_starts=args.starts, seed=_seed(args, cfg))
    _emit(_json(oracle.max_product_expectation(L, part, conf).to_dict()), args.out)
    return EXIT_OK


def cmd_classify(args, cfg) -> int:
    if args.eta is not None:
        rho = losschannel.apply_loss(_eta_vector(args.eta))
        L = rho
    elif args.state is not None:
        rho = _load_operator(args.state)
        L = _load_operator(args.witness) if args.witness else rho
    else:
        raise UsageError("give --state or --eta")
    rho.check_state()
    bounds = classify.AutoBounds(oracle_config=oracle.OracleConfig(seed=_seed(args, cfg)))
    report = classify.classify_state(rho, L, bounds).to_dict()
    if args.locate:
        report["subsets"] = classify.locate_entangled_subsets(rho, L, bounds).to_dict()
    _emit(_json(report), args.out)
    return EXIT_OK


def selftest_checks(seed: int) -> list[tuple[str, float, float]]:
    """``(name, error, tolerance)`` for each invariant; deterministic in ``seed``."""
    from .fockstate import w_state

    rng = np.random.default_rng(seed)
    oc = oracle.OracleConfig(seed=seed)
    checks = []
    W4 = witness.WWeights(np.full(4, 0.5))
    L4 = w_state(W4.lam).projector()
    checks.append(("w4_full_solver", abs(witness.f_full(W4) - 27 / 64), 1e-10))
    checks.append(("w4_part_solver", abs(witness.f_part(W4) - 0.75), 1e-10))
    checks.append(("w4_full_oracle",
                   abs(oracle.max_product_expectation(L4, None, oc).value - 27 / 64), 1e-10))
    checks.append(("w4_part_oracle", abs(oracle.max_product_expectation(
        L4, ModePartition.parse("1,2,3|4"), oc).value - 0.75), 1e-10))
    err = max(abs(witness.max_g(np.full(K, K**-0.5)).g_max - ((K - 1) / K) ** (K - 1))
              for K in range(2, 9))
    checks.append(("equal_weight_law", err, 1e-10))
    err = 0.0
    for N in range(3, 7):
        for ratio in (0.3, 1.0, np.sqrt(N - 1), 2.5):
            lam = 1 / np.sqrt(N - 1 + ratio**2)
            w = np.append(np.full(N - 1, lam), ratio * lam)
            err = max(err, abs(witness.one_diff_closed_form(N, lam, ratio * lam)
                               - witness.max_g(w).g_max))
    checks.append(("one_diff_law", err, 1e-8))
    eta = np.linspace(0, 1, 101)
    W = losschannel.grid_weights(eta, eta)
    err = max(np.max(np.abs(witness.f_full_batch(W) - witness.closed_form_f_full_eta(eta))),
              np.max(np.abs(witness.f_part_batch(W, [5]) - witness.closed_form_f_part_eta(eta))))
    checks.append(("isotropic_bounds", float(err), 1e-8))
    err = max(abs(losschannel.lhs_trace(e) - losschannel.lhs_trace_matrix(e))
              for e in rng.random((20, 4)))
    checks.append(("lhs_trace_identity", err, 1e-12))
    err = 0.0
    for e in rng.random((3, 4)):
        direct = oracle.max_product_expectation(losschannel.apply_loss(e), None, oc).value
        err = max(err, abs(direct - witness.f_full(witness.w5_weights(e))))
    checks.append(("cascade_identity", err, 1e-6))
    p = cavity.CavityParams()
    M = cavity.hopfield_coefficients(np.linspace(0, 10, 1001), p)
    err = float(np.max(np.abs(M @ np.swapaxes(M, -1, -2) - np.eye(2))))
    checks.append(("hopfield_orthogonality", err, 1e-12))
    return checks


def cmd_selftest(args, cfg) -> int:
    checks = selftest_checks(_seed(args, cfg))
    lines = []
    ok = True
    for name, err, tol in checks:
        passed = err <= tol
        ok &= passed
        lines.append(f"{name} {'PASS' if passed else 'FAIL'} err={err:.3e} tol={tol:.0e}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_SELFTEST


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wwitness", description="W-state entanglement witnesses for "
                 "four-pump polariton emitters.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON file (sections: cavity; key: seed)")
    common.add_argument("--seed", type=int, help=f"random seed; overrides ${SEED_ENV}")
    common.add_argument("--out", help="output file (default: stdout)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("phase-match", parents=[common], help="phase-matching map as CSV")
    p.add_argument("--extent", type=float, default=0.03, help="half-width of the k window")
    p.add_argument("--grid", type=int, default=512, help="points per axis")
    p.add_argument("--point", type=float, nargs=2, metavar=("KX", "KY"),
                   help="evaluate one point and print JSON")
    p.set_defaults(func=cmd_phase_match)

    p = sub.add_parser("witness", parents=[common], help="separability bound as JSON")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eta", help="efficiency, or comma list of four, for the lossy W state")
    g.add_argument("--weights", help="comma list of W amplitudes (normalized internally)")
    p.add_argument("--mode", choices=("full", "part"), default="full")
    p.add_argument("--forced", help="comma list of modes kept as singletons (part mode); "
                   "with --eta the vacuum mode is forced by default")
    p.add_argument("--verbose", action="store_true", help="include optimizer and partition")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("sweep-eta", parents=[common], help="efficiency sweep as CSV")
    p.add_argument("--mode", choices=("iso", "grid"), default="iso")
    p.add_argument("--steps", type=int, help="points per axis (default 1001 iso, 201 grid)")
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.set_defaults(func=cmd_sweep_eta)

    p = sub.add_parser("oracle", parents=[common], help="product-state supremum as JSON")
    p.add_argument("--operator", required=True, help="JSON fixture {n_modes, re, im}")
    p.add_argument("--partition", help='blocks such as "1,2,3|4" (default: all singletons)')
    p.add_argument("--starts", type=int, default=64, help="random starts per block")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("classify", parents=[common], help="bipartition verdict as JSON")
    p.add_argument("--state", help="JSON fixture of the state")
    p.add_argument("--witness", help="JSON fixture of the test operator (default: the state)")
    p.add_argument("--eta", help="use the lossy W state for these efficiencies as both")
    p.add_argument("--locate", action="store_true", help="add the recursive subset report")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except (ValueError, KeyError, OSError) as exc:
        print(f"wwitness: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def run(argv: list[str] | None = None) -> int:
    """Like :func:`main` but returns argparse exits as codes instead of raising."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
