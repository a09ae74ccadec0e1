"""Command line entry point: ``magicsq <command> ...``.

Every command exits 0 iff all of its checks pass.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .contexts import Context, format_cells, ks_exhaustive_check, parse_ordering
from .expsuite import EXPERIMENTS, analyze_cabello, analyze_hasegawa, analyze_huang, replay_experiment
from .harness import (
    RunConfig,
    run_experiment,
    verify_corollary,
    verify_cup,
    verify_marginals,
    verify_theorem1,
    write_trajectories_csv,
)
from .qcore import verify_square_algebra


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_square(args) -> int:
    alg = verify_square_algebra()
    ks = ks_exhaustive_check()
    ks_ok = ks.count_all_six == 0 and ks.max_satisfiable == 5
    print(f"algebra: {len(alg.checks)} relations, max residual {max(alg.max_residual.values()):.2e} "
          f"-> {'PASS' if alg.passed else 'FAIL'}")
    for f in alg.failures():
        print(f"  failed: {f}")
    print(f"kochen-specker: {ks.count_all_six} tables satisfy all six, max satisfiable {ks.max_satisfiable}, "
          f"histogram {ks.histogram} -> {'PASS' if ks_ok else 'FAIL'}")
    return 0 if alg.passed and ks_ok else 1


def _build_config(args) -> RunConfig:
    if args.mode == "simultaneous":
        if not args.context:
            raise SystemExit("--mode simultaneous needs --context")
        plan = Context.parse(args.context, args.order)
    else:
        if not args.plan:
            raise SystemExit("--mode sequential needs --plan")
        plan = parse_ordering(args.plan)
    return RunConfig(args.state, plan, args.n, args.seed, args.tol, args.out)


def cmd_run(args) -> int:
    cfg = _build_config(args)
    result = run_experiment(cfg, workers=args.workers)
    if args.csv:
        write_trajectories_csv(args.csv, cfg, args.csv_limit)
    _emit(result, args.out)
    if args.out:
        print(f"{cfg.mode} {format_cells(cfg.cells)} on {result['config']['state']}: "
              f"TV = {result['tv_distance']:.4f} -> {'PASS' if result['pass'] else 'FAIL'}")
    return 0 if result["pass"] else 1


def cmd_replay(args) -> int:
    ids = list(EXPERIMENTS) if args.experiment == "all" else [args.experiment]
    ok = True
    for e in ids:
        rep = replay_experiment(e)
        ok &= rep.passed
        if args.json:
            print(json.dumps(rep.to_json(), indent=2))
            continue
        print(f"{rep.experiment}: {'PASS' if rep.passed else 'FAIL'}")
        for s in rep.steps:
            print(f"  {s['label']:>6}: codes={s['codes']} coords={s['coordinates']} g={s['macrostate']}")
        for k, v in rep.observed.items():
            print(f"  {k}: {v}")
        if rep.first_divergence:
            print(f"  first divergence: {rep.first_divergence}")
        for n in rep.notes:
            print(f"  note: {n}")
    return 0 if ok else 1


def cmd_verify(args) -> int:
    tol = args.tol
    if args.what == "theorem1":
        rep = verify_theorem1(n_runs=args.n, seed=args.seed, tol=0.02 if tol is None else tol)
    elif args.what == "corollary":
        rep = verify_corollary(n_runs=args.n, seed=args.seed)
    elif args.what == "cup":
        rep = verify_cup(n_runs=args.n, seed=args.seed)
    else:
        rep = verify_marginals(n_runs=args.n, seed=args.seed, tol=0.01 if tol is None else tol)
    print(rep.summary())
    for f in rep.failures[:20]:
        print(f"  failed: {f}")
    if args.out:
        _emit(rep.to_json(), args.out)
    return 0 if rep.passed else 1


def cmd_analyze(args) -> int:
    fn = {"huang": analyze_huang, "hasegawa": analyze_hasegawa, "cabello": analyze_cabello}[args.what]
    res = fn(args.n, args.seed)
    _emit(res.to_json(max_runs=args.max_runs), args.out)
    if args.out:
        print(f"{args.what}: {'PASS' if res.passed else 'FAIL'}")
    return 0 if res.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magicsq", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sq = sub.add_parser("square", help="operator algebra and exhaustive KS check")
    sq.add_argument("action", choices=["check"])
    sq.set_defaults(func=cmd_square)

    r = sub.add_parser("run", help="Monte Carlo run compared against the quantum oracle")
    r.add_argument("--state", default="singlet", help="named state or JSON file")
    r.add_argument("--plan", help='sequential cells, e.g. "33,32,31"')
    r.add_argument("--mode", choices=["sequential", "simultaneous"], default="sequential")
    r.add_argument("--context", help="row1..row3 or col1..col3")
    r.add_argument("--order", default="paper", help='"paper" or explicit cells, e.g. "31,32,33"')
    r.add_argument("--n", type=int, default=100_000)
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--tol", type=float, default=0.02)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--out")
    r.add_argument("--csv", help="write per-run trajectories here")
    r.add_argument("--csv-limit", type=int, default=None, help="only the first N runs in the CSV")
    r.set_defaults(func=cmd_run)

    rp = sub.add_parser("replay", help="replay a worked experiment against its reference values")
    rp.add_argument("--experiment", required=True, choices=["1", "2", "3", "3c", "4", "all", *EXPERIMENTS])
    rp.add_argument("--json", action="store_true")
    rp.set_defaults(func=cmd_replay)

    v = sub.add_parser("verify", help="statistical verification drivers")
    v.add_argument("what", choices=["theorem1", "corollary", "cup", "marginals"])
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--tol", type=float, default=None)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("analyze", help="ideal-run reanalysis of a contextuality experiment")
    a.add_argument("what", choices=["huang", "hasegawa", "cabello"])
    a.add_argument("--n", type=int, default=100_000)
    a.add_argument("--seed", type=int, default=42)
    a.add_argument("--max-runs", type=int, default=20, help="per-run records to include in the JSON")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)
    return p


_DEFAULT_N = {"theorem1": 100_000, "corollary": 10_000, "cup": 10_000, "marginals": 100_000}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "verify" and args.n is None:
        args.n = _DEFAULT_N[args.what]
    try:
        return args.func(args)
    except (ValueError, KeyError, IndexError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
