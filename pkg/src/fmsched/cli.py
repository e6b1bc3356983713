"""Command-line front end: ``fmsched <subcommand> ...``.

Exit codes: 0 success or PASS, 1 bound violated or FAIL, 2 usage or
input error, 3 budget exhausted with unresolved work.  Every rational in
the output is an ``"a/b"`` string.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algorithms import TieBreakPolicy, TieExplosion, ld0_worst_schedule, ld_schedule, li_schedule
from .caseanalysis import PASS, CaseCapExceeded, verify_bound
from .core import InvalidInstance, format_rational, load_instance, makespan, parse_rational
from .oracle import OracleBudgetExceeded, makespan_ratio, optimal_fm_makespan
from .search import hunt, ld0_family, tight_family

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _rational_arg(text: str):
    try:
        return parse_rational(text)
    except InvalidInstance as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _cmd_schedule(args) -> int:
    inst = load_instance(args.input)
    if args.ties == "enumerate":
        if args.algo != "ld":
            raise InvalidInstance("--ties enumerate only applies to --algo ld")
        schedules = ld_schedule(inst, TieBreakPolicy.ENUMERATE_ALL)
        worst = max(makespan(s) for s in schedules)
        _emit({"algo": "ld", "ties": "enumerate", "worst_makespan": format_rational(worst),
               "schedules": [s.to_json() for s in schedules]})
        return EXIT_OK
    build = {"ld": ld_schedule, "li": li_schedule, "ld0worst": ld0_worst_schedule}[args.algo]
    sched = build(inst)
    _emit(dict(sched.to_json(), algo=args.algo))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    inst = load_instance(args.input)
    try:
        res = optimal_fm_makespan(inst, budget=args.budget)
    except OracleBudgetExceeded as exc:
        _emit({"status": "unresolved", "lower": format_rational(exc.lower), "upper": format_rational(exc.upper)})
        return EXIT_BUDGET
    _emit({"status": "optimal", "t_opt": format_rational(res.makespan), "nodes": res.nodes,
           "witness": res.schedule.to_json()})
    return EXIT_OK


def _cmd_ratio(args) -> int:
    inst = load_instance(args.input)
    try:
        res = makespan_ratio(inst, budget=args.budget)
    except OracleBudgetExceeded as exc:
        _emit({"status": "unresolved", "lower": format_rational(exc.lower), "upper": format_rational(exc.upper)})
        return EXIT_BUDGET
    _emit({"t_LD_worst": format_rational(res.t_ld), "t_opt": format_rational(res.t_opt),
           "ratio": format_rational(res.ratio)})
    return EXIT_OK


def _cmd_family(args) -> int:
    try:
        inst = {"tight": tight_family, "ld0": ld0_family}[args.kind](args.m)
    except ValueError as exc:
        raise InvalidInstance(str(exc)) from exc
    _emit(inst.to_json())
    return EXIT_OK


def _cmd_hunt(args) -> int:
    if args.m < 1 or args.k < 1 or args.lmax < 0:
        raise InvalidInstance("need --m >= 1, --k >= 1, --lmax >= 0")
    report = hunt(args.m, args.k, args.lmax, bound=args.bound, filter_kk1=args.filter_kk1,
                  jobs=args.jobs, budget=args.budget, algorithm=args.algo)
    if args.out:
        report.write_csv(args.out)
    print(report.summary())
    return report.exit_code()


def _cmd_cases(args) -> int:
    if args.m < 1 or args.k < 1:
        raise InvalidInstance("need --m >= 1 and --k >= 1")
    try:
        report = verify_bound(args.m, args.k, args.bound, cap=args.cap, jobs=args.jobs)
    except CaseCapExceeded as exc:
        print(f"UNRESOLVED: {exc}")
        return EXIT_BUDGET
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.to_json(), fh, indent=2)
    print(report.summary())
    return EXIT_OK if report.verdict == PASS else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmsched",
        description="Exact LD/LI heuristics, FM optimum and bound verification for flowtime-optimal schedules.",
        epilog="exit codes: 0 success/PASS, 1 violation/FAIL, 2 usage or input error, 3 budget exhausted",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="build an LD, LI or worst LD0 schedule")
    p.add_argument("--algo", choices=["ld", "li", "ld0worst"], required=True)
    p.add_argument("--in", dest="input", required=True, metavar="INSTANCE.json")
    p.add_argument("--ties", choices=["lowest", "enumerate"], default="lowest",
                   help="LD tie-break: lowest machine index, or every resolution")
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("oracle", help="optimal FM makespan with a witness schedule")
    p.add_argument("--in", dest="input", required=True, metavar="INSTANCE.json")
    p.add_argument("--budget", type=int, default=10**7, help="search node budget (default 10^7)")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("ratio", help="worst LD makespan over the optimum")
    p.add_argument("--in", dest="input", required=True, metavar="INSTANCE.json")
    p.add_argument("--budget", type=int, default=10**7, help="search node budget (default 10^7)")
    p.set_defaults(func=_cmd_ratio)

    p = sub.add_parser("family", help="print a known worst-case instance")
    p.add_argument("--kind", choices=["tight", "ld0"], required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=_cmd_family)

    p = sub.add_parser("hunt", help="exhaustive search for bound violations on integer instances")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lmax", type=int, required=True, help="largest processing time allowed")
    p.add_argument("--bound", type=_rational_arg, default=None,
                   help="ratio to test, as a/b (default (5m-2)/(4m-1) for LD)")
    p.add_argument("--filter-kk1", action="store_true", help="tag instances with ratio >= k/(k-1) as non-minimal")
    p.add_argument("--algo", choices=["ld", "li", "ld0"], default="ld")
    p.add_argument("--budget", type=int, default=10**6, help="oracle node budget per instance")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", metavar="REPORT.csv")
    p.set_defaults(func=_cmd_hunt)

    p = sub.add_parser("cases", help="LP case analysis of the bound for fixed m and k")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--bound", type=_rational_arg, required=True, help="bound to verify, as a/b")
    p.add_argument("--cap", type=int, default=100_000, help="maximum number of case LPs")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", metavar="BUNDLE.json", help="write every case, solution and certificate here")
    p.set_defaults(func=_cmd_cases)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (InvalidInstance, OSError) as exc:
        print(f"fmsched: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TieExplosion as exc:
        print(f"fmsched: {exc}", file=sys.stderr)
        return EXIT_BUDGET


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
