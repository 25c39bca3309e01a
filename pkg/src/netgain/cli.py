"""Command-line front end.

Exit codes: 0 certified / success, 3 not certified, 2 invalid input,
1 when a simulation observes a violated certified bound.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as nio
from .config import default_tolerances
from .diagstab import (
    bilinear_transform,
    ctds_search,
    dtds_oracle,
    dtds_search,
    rank_one_perturbation_dtds,
)
from .errors import NetgainError, UnsupportedSizeError
from .netsim import empirical_bound_check, l2_gain, simulate
from .smallgain import checklist, region_csv, region_sweep, verify_network

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_INPUT = 2
EXIT_NOT_CERTIFIED = 3


def _num(x):
    return f"{float(x):.12g}"


def _vec(x):
    return "[" + ", ".join(_num(v) for v in np.ravel(x)) + "]"


def _emit(args, report, lines):
    if getattr(args, "json", False):
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _blocks(text):
    try:
        sizes = [int(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad block list {text!r}") from None
    if not sizes or any(b <= 0 for b in sizes):
        raise argparse.ArgumentTypeError("block sizes must be positive integers")
    return sizes


def cmd_check_dtds(args, tol):
    A = nio.read_matrix(args.matrix)
    cert = dtds_search(A, args.blocks, tol)
    report = {"verdict": "certified" if cert else "not certified"}
    lines = [f"verdict: {report['verdict']}"]
    if cert:
        report.update(d=[float(x) for x in cert.d], margin=float(cert.margin))
        lines += [f"d: {_vec(cert.d)}", f"margin: {_num(cert.margin)}"]
    if args.oracle:
        try:
            oracle = dtds_oracle(A, args.blocks)
        except UnsupportedSizeError as exc:
            report["oracle"] = "skipped"
            lines.append(f"oracle: skipped ({exc})")
        else:
            agree = (oracle is not None) == (cert is not None)
            report["oracle"] = "certified" if oracle else "not certified"
            report["oracle_agrees"] = agree
            lines.append(f"oracle: {report['oracle']} ({'agrees' if agree else 'DISAGREES'})")
    _emit(args, report, lines)
    return EXIT_OK if cert else EXIT_NOT_CERTIFIED


def cmd_check_ctds(args, tol):
    B = nio.read_matrix(args.matrix)
    if args.bilinear:
        B = bilinear_transform(B, tol)
    cert = ctds_search(B, tol)
    report = {"verdict": "certified" if cert else "not certified"}
    lines = [f"verdict: {report['verdict']}"]
    if cert:
        report.update(d=[float(x) for x in cert.d], margin=float(cert.margin))
        lines += [f"d: {_vec(cert.d)}", f"margin: {_num(cert.margin)}"]
    _emit(args, report, lines)
    return EXIT_OK if cert else EXIT_NOT_CERTIFIED


def cmd_rank_one(args, tol):
    p = nio.parse_rank_one_perturbation(Path(args.spec).read_text())
    res = rank_one_perturbation_dtds(p, tol)
    report = {
        "verdict": "certified" if res else "not certified",
        "schur": res.schur,
        "c": None if np.isnan(res.c) else float(res.c),
        "sum": None if np.isnan(res.total) else float(res.total),
    }
    lines = [
        f"verdict: {report['verdict']}",
        f"schur: {res.schur}",
        f"c: {_num(res.c)}",
        f"sum: {_num(res.total)}",
    ]
    _emit(args, report, lines)
    return EXIT_OK if res else EXIT_NOT_CERTIFIED


def _checklist_report(net, tol):
    rep = checklist(net, tol)
    return rep, {f"item_{i + 1}": bool(v) for i, v in enumerate(rep.items)}


def cmd_check_network(args, tol):
    net = nio.read_network(args.network)
    bound = verify_network(net, tol)
    report = {"verdict": "certified" if bound else "not certified"}
    lines = [f"verdict: {report['verdict']}"]
    if bound:
        report.update(
            rho=bound.rho, beta=bound.beta, epsilon=bound.epsilon, s=bound.s, r=bound.r,
            d_min=bound.d_min, d_max=bound.d_max, d=[float(x) for x in bound.certificate.d],
            margin=float(bound.certificate.margin),
        )
        lines += [
            f"rho: {_num(bound.rho)}",
            f"beta: {_num(bound.beta)}",
            f"epsilon: {_num(bound.epsilon)}",
            f"s: {_num(bound.s)}",
            f"d: {_vec(bound.certificate.d)}",
            f"margin: {_num(bound.certificate.margin)}",
        ]
    if net.rank_one is not None:
        rep, _ = _checklist_report(net, tol)
        report["checklist_item_5"] = rep.rank_one
        lines.append(f"checklist item 5 (rank-one): {rep.rank_one}")
    _emit(args, report, lines)
    return EXIT_OK if bound else EXIT_NOT_CERTIFIED


def cmd_checklist(args, tol):
    net = nio.read_network(args.network)
    rep, items = _checklist_report(net, tol)
    lines = [f"{k}: {v}" for k, v in items.items()]
    if not rep.rank_one_evaluated:
        lines[-1] += " (no rank_one attachment)"
    items["any"] = rep.any
    lines.append(f"any: {rep.any}")
    _emit(args, items, lines)
    return EXIT_OK if rep.any else EXIT_NOT_CERTIFIED


def _read_2x2(path):
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        net = nio.parse_network(text)
        if len(net.subsystems) != 2 or not net.is_siso:
            raise UnsupportedSizeError("region needs two SISO sub-systems")
        return net.A
    A = nio.parse_matrix(text)
    if A.shape != (2, 2):
        raise UnsupportedSizeError(f"region needs a 2x2 matrix, got {A.shape}")
    return A


def cmd_region(args, tol):
    A = _read_2x2(args.input)
    rows = region_sweep(A, args.step, tol=tol)
    text = region_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    n_std = sum(r.standard for r in rows)
    n_dtds = sum(r.dtds for r in rows)
    print(f"points: {len(rows)}")
    print(f"standard: {n_std}")
    print(f"dtds: {n_dtds}")
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args, tol):
    net = nio.read_network(args.network)
    systems = nio.read_systems(args.systems)
    bound = verify_network(net, tol)
    if bound is None:
        print("verdict: not certified")
        return EXIT_NOT_CERTIFIED
    report = empirical_bound_check(net, systems, bound, args.trials, args.horizon, args.seed)
    if args.out:
        rng = np.random.default_rng(args.seed)
        v = rng.uniform(-1.0, 1.0, size=(args.horizon, net.A.shape[0]))
        Path(args.out).write_text(simulate(net, systems, v, args.horizon, tol=tol).to_csv())
    out = {
        "verdict": "certified",
        "rho": bound.rho,
        "beta": bound.beta,
        "trials": report.trials,
        "horizon": report.horizon,
        "violations": report.violations,
        "max_ratio": report.max_ratio,
        "realized_gains": list(report.realized_gains),
    }
    lines = [
        "verdict: certified",
        f"rho: {_num(bound.rho)}",
        f"beta: {_num(bound.beta)}",
        f"realized gains: {_vec(report.realized_gains)}",
        f"trials: {report.trials}",
        f"violations: {report.violations}",
        f"max ratio: {_num(report.max_ratio)}",
    ]
    _emit(args, out, lines)
    return EXIT_OK if report.passed else EXIT_FAILED_CHECK


def cmd_gain(args, tol):
    systems = nio.read_systems(args.system)
    gains = [l2_gain(s, args.grid)[0] for s in systems]
    _emit(args, {"gains": gains}, [f"gamma_{i + 1}: {_num(g)}" for i, g in enumerate(gains)])
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="netgain",
        description="Diagonal-stability certificates and networked L2 gain bounds.",
    )
    parser.add_argument("--tol", type=float, default=None,
                        help="strict-inequality slack (default 1e-12, env NETGAIN_TOL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-dtds", help="search for a DTDS certificate")
    p.add_argument("matrix")
    p.add_argument("--blocks", type=_blocks, default=None)
    p.add_argument("--oracle", action="store_true", help="cross-check with the grid oracle")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_dtds)

    p = sub.add_parser("check-ctds", help="search for a CTDS certificate")
    p.add_argument("matrix")
    p.add_argument("--bilinear", action="store_true",
                   help="apply (A + I)(A - I)^-1 to the input first")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_ctds)

    p = sub.add_parser("rank-one", help="exact test for diag(delta) + u v^T")
    p.add_argument("spec", help='JSON {"delta": [...], "u": [...], "v": [...]}')
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_rank_one)

    p = sub.add_parser("check-network", help="certify a network and report (rho, beta)")
    p.add_argument("network")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_network)

    p = sub.add_parser("checklist", help="structured sufficient conditions (SISO)")
    p.add_argument("network")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_checklist)

    p = sub.add_parser("region", help="sweep two gains over (0, 1.2]^2")
    p.add_argument("input", help="network JSON or 2x2 matrix file")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="empirically check a certified bound")
    p.add_argument("network")
    p.add_argument("systems", help='JSON {"systems": [{"F", "G", "H", "J"}, ...]}')
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--horizon", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="trajectory CSV of one seeded trial")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gain", help="L2 gain of state-space systems")
    p.add_argument("system")
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gain)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = default_tolerances()
        if args.tol is not None:
            tol = tol.with_strict(args.tol)
        return args.func(args, tol)
    except (NetgainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
