"""``mmflow`` command line.

Exit codes: 0 success, 1 analysis failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import __version__, git
from .errors import AnalysisError, InputError, IoError
from .kstab import df_from_oracle
from .scenario import Bounds, kempf_ness_suite, parse_scenario, run_scenario, stability_to_dict

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_INPUT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _load(path: str):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path!r}: {exc}") from exc
    return parse_scenario(data)


def cmd_run(args) -> int:
    s = _load(args.scenario)
    changes = {}
    if args.tol is not None:
        changes["grad_tol"] = args.tol
    if args.max_time is not None:
        changes["max_time"] = args.max_time
    if changes:
        s = replace(s, flow=replace(s.flow, **changes))
    report = run_scenario(s, output_dir=args.out)
    for name, res in report.results.items():
        if name == "nu":
            summary = f"max |nu - mu| = {res['max_difference']:.1e}"
        else:
            summary = res.get("dichotomy") or res.get("termination") or res.get("verdict")
        print(f"{name}: {summary}")
    for path in report.files:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_classify(args) -> int:
    s = _load(args.scenario)
    rpt = git.classify_stability(s.build_representation(), s.start_point())
    print(json.dumps(stability_to_dict(rpt), sort_keys=True))
    return EXIT_OK


def cmd_df(args) -> int:
    weights = args.weights
    res = df_from_oracle(weights, args.dim, range(1, args.jmax + 1))
    a0, a1, b0, b1 = res.coefficients
    print(f"a0={a0} a1={a1} b0={b0} b1={b1}")
    print(f"DF={res.df}")
    return EXIT_OK


def cmd_suite(args) -> int:
    if args.seeds < 1:
        raise InputError("--seeds must be positive")
    bounds = Bounds(args.d_max, args.r_max, args.weight_max)
    result = kempf_ness_suite(args.seeds, bounds)
    sys.stdout.write(result.table())
    return EXIT_OK if result.all_passed else EXIT_ANALYSIS


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mmflow", description="Moment map flows, GIT stability and Donaldson-Futaki invariants.")
    p.add_argument("--version", action="version", version=f"mmflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run every analysis listed in a scenario file")
    run.add_argument("scenario")
    run.add_argument("--out", help="output directory (overrides output_dir)")
    run.add_argument("--tol", type=float, help="gradient tolerance of the flow (grad_tol)")
    run.add_argument("--max-time", type=float, dest="max_time")
    run.set_defaults(func=cmd_run)

    cl = sub.add_parser("classify", help="GIT verdict of the scenario's start point")
    cl.add_argument("scenario")
    cl.set_defaults(func=cmd_classify)

    df = sub.add_parser("df", help="Donaldson-Futaki invariant of a product configuration on P^n")
    df.add_argument("--weights", type=_int_list, required=True, help="coordinate weights, e.g. 0,1")
    df.add_argument("--dim", type=int, required=True)
    df.add_argument("--jmax", type=int, default=None, help="largest sampled degree (default dim + 4)")
    df.set_defaults(func=cmd_df)

    su = sub.add_parser("suite", help="seeded Kempf-Ness corpus: exact verdicts against flow limits")
    su.add_argument("--seeds", type=int, default=100)
    su.add_argument("--d-max", type=int, default=6, dest="d_max")
    su.add_argument("--r-max", type=int, default=2, dest="r_max")
    su.add_argument("--weight-max", type=int, default=3, dest="weight_max")
    su.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "df" and args.jmax is None:
            args.jmax = args.dim + 4
        return args.func(args)
    except InputError as exc:
        print(f"mmflow: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AnalysisError, IoError) as exc:
        print(f"mmflow: analysis failed: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
