"""Command-line front end.

Subcommands: solve (one realization), sweep (config-driven Monte Carlo),
verify (solver vs brute-force oracle), figure2 / figure3 (preset sweeps).
Exit codes: 0 success, 1 verification failure, 2 bad configuration or
usage, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .channel import FadingParams, NodeGeometry, generate_channels
from .optimizer import SolveStatus, optimize, verify_outcome
from .phy import SystemParams, db_to_linear
from .star import oracle_solve, random_amplitude_problem, solve_amplitudes
from .sweep import (
    ConfigError,
    figure2_spec,
    figure3_spec,
    load_sweep_spec,
    run_and_write,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sicsim",
        description="STAR-RIS NOMA in-band control signaling optimizer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="optimize one channel realization and print the outcome")
    ps.add_argument("--n", type=int, default=64, help="number of surface elements")
    ps.add_argument("--ps-watts", type=float, default=40.0)
    ps.add_argument("--n0-watts", type=float, default=1e-12)
    ps.add_argument("--gamma-th1-db", type=float, default=10.0)
    ps.add_argument("--gamma-th2-db", type=float, default=20.0)
    ps.add_argument("--rician-k-db", type=float, default=3.0)
    ps.add_argument("--seed", type=int, default=0, help="channel + initialization seed")
    ps.add_argument("--realization", type=int, default=0, help="channel substream index")
    ps.add_argument("--a1-init", type=float, default=0.5)

    pw = sub.add_parser("sweep", help="run a Monte Carlo sweep from a key=value config file")
    pw.add_argument("--config", required=True, help="path to the sweep configuration")

    pv = sub.add_parser("verify", help="cross-check the dual solver against the grid oracle")
    pv.add_argument("--n", type=int, default=2, help="problem size (<= 3)")
    pv.add_argument("--cases", type=int, default=100)
    pv.add_argument("--grid-step", type=float, default=1e-3)
    pv.add_argument("--seed", type=int, default=7)

    for name, helptext in (
        ("figure2", "preset sweep over transmit power and element count"),
        ("figure3", "preset sweep over transmit power and control threshold"),
    ):
        pf = sub.add_parser(name, help=helptext)
        pf.add_argument("--output", default=f"{name}.csv")
        pf.add_argument("--realizations", type=int, default=100)
        pf.add_argument("--master-seed", type=int, default=1234)
        pf.add_argument("--workers", type=int, default=1)
    return parser


def _cmd_solve(args) -> int:
    fading = FadingParams(rician_k_db=args.rician_k_db, seed=args.seed)
    try:
        p = SystemParams(
            ps_watts=args.ps_watts,
            n0_watts=args.n0_watts,
            gamma_th1=db_to_linear(args.gamma_th1_db),
            gamma_th2=db_to_linear(args.gamma_th2_db),
            n_elements=args.n,
        )
        ch = generate_channels(NodeGeometry(), fading, args.n, realization=args.realization)
        out = optimize(ch, p, a1_init=args.a1_init, rng_seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    print(f"status = {out.status.value}")
    print(f"iterations_used = {out.iterations_used}")
    print(f"fixed_point_gap = {out.fixed_point_gap!r}")
    print(f"a1 = {out.split.a1!r}")
    print(f"a2 = {out.split.a2!r}")
    r = out.report
    for name in ("s1", "s2", "gamma1", "gamma21", "gamma22", "rate_user", "rate_mc"):
        print(f"{name} = {getattr(r, name)!r}")
    if out.status is SolveStatus.OPTIMAL:
        for entry in verify_outcome(out, ch, p):
            flag = "ok" if entry.ok else "VIOLATED"
            print(f"residual {entry.name} = {entry.residual:.3e} (tol {entry.tolerance:.1e}) {flag}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = load_sweep_spec(args.config)
    rows = run_and_write(spec)
    print(f"wrote {len(rows)} rows to {spec.output_path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.n < 1 or args.n > 3:
        print("error: --n must be 1, 2, or 3", file=sys.stderr)
        return EXIT_BAD_CONFIG
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    worst = 0.0
    failures = 0
    for case in range(args.cases):
        prob = random_amplitude_problem(rng, args.n)
        sol = solve_amplitudes(prob)
        ref = oracle_solve(prob, grid_step=args.grid_step)
        tol = 2.0 * float(np.max(prob.h_cap)) * args.grid_step
        gap = abs(sol.objective - ref.objective)
        worst = max(worst, gap)
        ok = gap <= tol and sol.constraint_residual <= 1e-10 * max(1.0, prob.q)
        if not ok:
            failures += 1
            print(f"case {case}: FAIL gap={gap:.3e} tol={tol:.3e}")
    print(f"{args.cases - failures}/{args.cases} cases within tolerance (worst gap {worst:.3e})")
    return EXIT_OK if failures == 0 else EXIT_VERIFY_FAILED


def _cmd_figure(args, preset) -> int:
    spec = preset(
        output_path=args.output,
        realizations=args.realizations,
        master_seed=args.master_seed,
        workers=args.workers,
    )
    rows = run_and_write(spec)
    print(f"wrote {len(rows)} rows to {spec.output_path}")
    return EXIT_OK


def cli_main(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "figure2":
            return _cmd_figure(args, figure2_spec)
        return _cmd_figure(args, figure3_spec)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
