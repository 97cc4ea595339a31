"""``qsd`` command-line interface.

JSON goes to stdout, diagnostics to stderr. Exit codes: 0 success,
1 invalid input, 2 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

from . import _dispatch
from .certificate import certify
from .errors import IoFailure, ProblemFormatError, QsdError
from .oracles import simulate_game
from .problemfile import load_problem, matrix_to_json, parse_povm
from .scenarios import (
    CERTIFIED_GAP,
    SWEEP_CONFIG,
    boundaries_from_sweep,
    default_grid,
    default_jobs,
    sweep_xi,
    threshold_xi_23,
    write_csv,
)
from .sdp import build_dual_sdp, export_sdpa
from .solver import RandomJitter, SolverConfig, solve

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2
LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("qsd")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if out:
        try:
            with open(out, "w", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoFailure(f"cannot write {out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)


def _config(args) -> SolverConfig:
    init = "uniform"
    if args.init == "jitter":
        init = RandomJitter(seed=args.seed, amplitude=args.jitter_amplitude)
    try:
        return SolverConfig(
            max_iterations=args.max_iterations,
            gap_tolerance=args.gap_tolerance,
            rank_cutoff=args.rank_cutoff,
            init_mode=init,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _solve_report(report, cert) -> dict:
    return {
        "success_probability": report.success_probability,
        "gap": report.gap,
        "converged": report.converged,
        "iterations": report.iterations_used,
        "backend": report.backend,
        "povm": [matrix_to_json(el) for el in report.povm.elements],
        "lagrange_operator": matrix_to_json(report.lagrange_operator),
        "certificate": cert.to_dict(),
    }


def cmd_solve(args) -> int:
    cfg = _config(args)
    ensemble, _ = load_problem(args.problem)
    report = solve(ensemble, cfg)
    doc = _solve_report(report, certify(ensemble, report.povm, cfg.rank_cutoff))
    if args.trace:
        doc["trace"] = report.trace
    _dump(doc, args.out)
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_certify(args) -> int:
    ensemble, povm = load_problem(args.problem, require_povm=True)
    cert = certify(ensemble, povm, args.rank_cutoff)
    doc = cert.to_dict()
    doc["certified"] = cert.gap <= args.gap_tolerance
    _dump(doc, args.out)
    return EXIT_OK


def cmd_scenario(args) -> int:
    if not 0.0 < args.phi < math.pi / 4:
        raise UsageError("--phi must lie in (0, pi/4)")
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    jobs = args.jobs or default_jobs()
    points = sweep_xi(args.phi, default_grid(args.points), SWEEP_CONFIG, jobs=jobs)
    if args.out:
        try:
            with open(args.out, "w", newline="\n") as fh:
                write_csv(points, fh)
        except OSError as exc:
            raise IoFailure(f"cannot write {args.out}: {exc.strerror}") from exc
    else:
        write_csv(points, sys.stdout)
    failed = [p for p in points if not (p.gap <= CERTIFIED_GAP)]
    summary = {
        "phi": args.phi,
        "threshold_II_III_formula": threshold_xi_23(args.phi),
        "boundaries": boundaries_from_sweep(args.phi, points),
        "points": len(points),
        "failed_points": len(failed),
    }
    text = json.dumps(summary, indent=2)
    # summary shares stdout only when the CSV went to a file
    print(text, file=sys.stdout if args.out else sys.stderr)
    return EXIT_NONCONVERGED if len(failed) > 0.01 * len(points) else EXIT_OK


def cmd_export(args) -> int:
    ensemble, _ = load_problem(args.problem)
    problem = build_dual_sdp(ensemble)
    export_sdpa(problem, args.out)
    print(
        f"wrote {args.out}: mDIM={problem.constraint_count} nBLOCK={problem.block_count} "
        f"block size {2 * problem.block_dim} (real embedding of {problem.block_dim}x{problem.block_dim})",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    ensemble, povm = load_problem(args.problem)
    status = EXIT_OK
    if args.optimal:
        report = solve(ensemble, _config(args))
        povm = report.povm
        status = EXIT_OK if report.converged else EXIT_NONCONVERGED
    elif args.povm:
        try:
            with open(args.povm) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ProblemFormatError("povm", f"cannot read {args.povm}: {exc}") from exc
        povm = parse_povm(doc.get("povm") if isinstance(doc, dict) else None, ensemble.dim, ensemble.size)
    elif povm is None:
        raise UsageError("give --povm FILE, --optimal, or a problem file with a 'povm' entry")

    from .model import success_probability

    stats = simulate_game(ensemble, povm, args.trials, args.seed)
    analytic = success_probability(ensemble, povm)
    sigma = math.sqrt(max(analytic * (1 - analytic), 0.0) / args.trials)
    diff = abs(stats.empirical_rate - analytic)
    doc = stats.to_dict()
    doc["seed"] = args.seed
    doc["analytic_rate"] = analytic
    doc["sigma_distance"] = diff / sigma if sigma > 0 else 0.0
    _dump(doc, args.out)
    return status


def _add_solver_flags(p) -> None:
    p.add_argument("--max-iterations", type=int, default=10_000)
    p.add_argument("--gap-tolerance", type=float, default=1e-8)
    p.add_argument("--rank-cutoff", type=float, default=1e-12)
    p.add_argument("--init", choices=["uniform", "jitter"], default="uniform")
    p.add_argument("--jitter-amplitude", type=float, default=1e-3)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsd", description="Optimal minimum-error state discrimination.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="optimize the POVM for a problem file")
    p.add_argument("problem")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--trace", action="store_true", help="include per-iteration P_s")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="certify a POVM given in the problem file")
    p.add_argument("problem")
    p.add_argument("--gap-tolerance", type=float, default=1e-8)
    p.add_argument("--rank-cutoff", type=float, default=1e-12)
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("scenario", help="sweep the three-state coplanar qubit family")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.add_argument("--jobs", type=int, default=0, help="worker processes (default: all cores)")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("export-sdp", help="write the SDP in sparse SDPA format")
    p.add_argument("problem")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("simulate", help="Monte-Carlo play of the discrimination game")
    p.add_argument("problem")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--povm", help="JSON file with a 'povm' entry")
    group.add_argument("--optimal", action="store_true", help="solve first and use the optimum")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def _setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("QSD_LOG", "quiet").lower(), logging.ERROR)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
        log.debug("kernel backend: %s", _dispatch.BACKEND)
        return args.func(args)
    except (UsageError, ProblemFormatError, IoFailure) as exc:
        print(f"qsd: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QsdError as exc:
        print(f"qsd: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ArithmeticError as exc:
        print(f"qsd: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
