"""Command-line interface: ``symcap {capacity,billiard,bounds,verify,normalform}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bodies as B
from .billiards import bouncing_ball_oracle, zeta
from .checks import CHECK_KINDS, default_manifest, load_manifest, run_manifest
from .dualsolver import SolveConfig, compute_capacity
from .errors import SymcapError
from .linsymp import sym_williamson
from .serialize import dump_curve_csv, dump_json, rounded

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_CONVERGENCE = 2
EXIT_CHECK_FAILED = 3

log = logging.getLogger("symcap")


class InputError(SymcapError):
    pass


def _read_json(path, field: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{field}: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{field}: invalid JSON in {path}: {exc}") from None


def _load_body(path, field: str) -> B.Body:
    try:
        return B.body_from_dict(_read_json(path, field))
    except InputError:
        raise
    except (SymcapError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{field}: {type(exc).__name__}: {exc}") from None


def _load_matrix(path, field: str) -> np.ndarray:
    data = _read_json(path, field)
    if isinstance(data, dict):
        data = data.get("matrix", data.get("S"))
    try:
        return np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{field}: expected a numeric matrix in {path}") from None


def _tau(arg: str):
    if arg in ("tau0", "tauhat0"):
        return arg
    return _load_matrix(arg, "--tau")


def _config(args) -> SolveConfig:
    threads = os.environ.get("SYMCAP_THREADS")
    try:
        return SolveConfig(
            modes=args.modes,
            samples=args.samples,
            p=args.p,
            restarts=args.restarts,
            seed=args.seed,
            smoothing_eps=args.smooth,
            threads=int(threads) if threads else None,
        )
    except SymcapError as exc:
        raise InputError(f"config: {exc}") from None


def _out(args) -> Path:
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_capacity(args) -> int:
    body = _load_body(args.body, "--body")
    psi = _load_matrix(args.psi, "--psi") if args.psi else None
    result = compute_capacity(body, _tau(args.tau), _config(args), psi=psi)
    out = _out(args)
    dump_json(result.to_dict(), out / "capacity.json")
    if args.format == "csv":
        result.write_carrier_csv(out / "carrier.csv")
    print(f"{result.capacity:.6g}")
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_billiard(args) -> int:
    delta = _load_body(args.delta, "--delta")
    lam = _load_body(args.lam, "--lambda")
    if delta.dim != lam.dim:
        raise InputError(f"--lambda: DimensionMismatch: delta in R^{delta.dim}, lambda in R^{lam.dim}")
    report = zeta(delta, lam, _tau(args.tau), _config(args))
    out = _out(args)
    dump_json(report.to_dict(), out / "zeta.json")
    if report.trajectory is not None:
        dump_json(report.trajectory.to_dict(), out / "trajectory.json")
    if args.format == "csv":
        N = report.result.carrier.shape[0]
        dump_curve_csv(np.arange(N) / N, report.result.carrier[:, : delta.dim], out / "trajectory_q.csv", prefix="q")
    bounces = report.trajectory.bounces if report.trajectory else 0
    print(f"{report.zeta:.6g}")
    print(f"bounces: {bounces}", file=sys.stderr)
    return EXIT_OK if report.result.converged else EXIT_NO_CONVERGENCE


def cmd_bounds(args) -> int:
    delta = _load_body(args.delta, "--delta")
    lam = _load_body(args.lam, "--lambda") if args.lam else B.Ball(1.0, delta.dim)
    geo = B.geometric_summary(delta)
    length, ends = bouncing_ball_oracle(delta, lam)
    record = {"summary": geo.to_dict(), "four_r": 4 * geo.inradius, "four_R": 4 * geo.circumradius,
              "two_width": 2 * geo.width, "two_np1_r": 2 * (delta.dim + 1) * geo.inradius,
              "bouncing_ball_upper": length, "bouncing_ball_chord": ends}
    dump_json(record, _out(args) / "bounds.json")
    print(json.dumps(rounded(record), sort_keys=True))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.manifest:
        try:
            entries = load_manifest(args.manifest)
        except (OSError, json.JSONDecodeError, SymcapError, KeyError) as exc:
            raise InputError(f"--manifest: {exc}") from None
    else:
        entries = default_manifest()
    only = set(args.only) if args.only else None
    try:
        reports = run_manifest(entries, _config(args), only)
    except (KeyError, TypeError) as exc:
        raise InputError(f"--manifest: malformed entry: {exc}") from None
    for r in reports:
        print(r.line())
    ok = all(r.passed for r in reports)
    dump_json({"pass": ok, "reports": [r.to_dict() for r in reports]}, _out(args) / "verify.json")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_normalform(args) -> int:
    S = _load_matrix(args.matrix, "--matrix")
    form = sym_williamson(S)
    record = {"radii": form.radii, "psi": form.psi.matrix, "capacity": np.pi * form.radii[0] ** 2}
    dump_json(record, _out(args) / "normalform.json")
    print(json.dumps(rounded({"radii": form.radii})))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symcap", description="Symmetric EHZ capacities of convex bodies.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--tau", default="tau0", help="tau0, tauhat0 or a JSON matrix file")
        p.add_argument("--modes", type=int, default=24)
        p.add_argument("--samples", type=int, default=512)
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--restarts", type=int, default=16)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--smooth", type=float, default=None, help="smoothing radius (default: automatic)")

    def output_flags(p):
        p.add_argument("--out", default=".")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("capacity", help="compute c_EHZ,tau of a body")
    p.add_argument("--body", required=True)
    p.add_argument("--psi", help="JSON file with a symplectic normalizer")
    solver_flags(p)
    output_flags(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("billiard", help="zeta and billiard trajectory of delta x lambda")
    p.add_argument("--delta", required=True)
    p.add_argument("--lambda", dest="lam", required=True)
    solver_flags(p)
    output_flags(p)
    p.set_defaults(func=cmd_billiard)

    p = sub.add_parser("bounds", help="geometric bounds on zeta")
    p.add_argument("--delta", required=True)
    p.add_argument("--lambda", dest="lam")
    output_flags(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run the check suite")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--manifest")
    group.add_argument("--default", action="store_true")
    p.add_argument("--only", nargs="+", choices=CHECK_KINDS)
    solver_flags(p)
    output_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("normalform", help="Williamson radii of a tau0-commuting SPD matrix")
    p.add_argument("--matrix", required=True)
    output_flags(p)
    p.set_defaults(func=cmd_normalform)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SymcapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
