"""Command-line entry point: ``realdirac {verify,tables,evolve,strength,extract}``.

Exit codes: 0 pass, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bridge, gauge, io, runs, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
TABLE_TOL = 1e-15


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags() -> argparse.ArgumentParser:
    # shared by the top-level parser and every subcommand, so flags work in either position
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    p.add_argument("--count", type=int, default=argparse.SUPPRESS,
                   help=f"random cases per suite (default {verify.DEFAULT_COUNT})")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    p.add_argument("--tolerance-scale", type=float, default=argparse.SUPPRESS,
                   help="multiply every tolerance by this factor (default 1)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="realdirac", parents=[common],
                     description="Real Clifford algebra spinors: verification suites, tables and runs.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[common], help="run randomized identity suites")
    p.add_argument("suite", nargs="?", default="all", choices=verify.SUITES + ("all",))

    p = sub.add_parser("tables", parents=[common], help="print the computed Pauli and gamma matrices")
    p.add_argument("--diff-paper", action="store_true",
                   help="compare against the displayed standard-representation tables")

    for name, helptext in (("evolve", "evolve a 1+1D spinor field"),
                           ("strength", "field strength of a configured potential"),
                           ("extract", "recover the potential from a gauge-dressed plane wave")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("config", help="configuration file ([grid], [fields], [physics])")
        if name == "evolve":
            p.add_argument("--out", default=None, help="output directory (default: <config stem>-output)")
        else:
            p.add_argument("--out", default=None, help=f"output CSV (default: <config stem>-{name}.csv)")
    return parser


def _opts(args):
    return (getattr(args, "seed", 0), getattr(args, "count", verify.DEFAULT_COUNT),
            getattr(args, "json", False), getattr(args, "tolerance_scale", 1.0))


def _emit_reports(reports, as_json: bool):
    if as_json:
        payload = {
            "reports": [r.to_dict() for r in reports],
            "pass": all(r.passed for r in reports),
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
        return
    for r in reports:
        print(r.summary())
        for c in r.checks:
            mark = "ok  " if c.passed else "FAIL"
            print(f"  {mark} {c.name:32s} cases={c.cases:<6d} max={c.max_residual:.3e} tol={c.tolerance:.1e}")


# -- tables ---------------------------------------------------------------------

def computed_tables() -> dict[str, list[np.ndarray]]:
    return {
        "sigma": list(bridge.pauli_matrices()),
        "gamma": list(bridge.gamma_matrices()),
        "gamma5": [bridge.gamma5()],
    }


def reference_tables() -> dict[str, list[np.ndarray]]:
    return {
        "sigma": list(bridge.PAULI_TABLE),
        "gamma": list(bridge.GAMMA_TABLE),
        "gamma5": [bridge.gamma5(bridge.GAMMA_TABLE)],
    }


def tables_to_json(tables) -> str:
    enc = {k: [[[[float(z.real), float(z.imag)] for z in row] for row in m] for m in ms]
           for k, ms in tables.items()}
    return json.dumps(enc, indent=2, sort_keys=True)


def tables_from_json(text: str) -> dict[str, list[np.ndarray]]:
    raw = json.loads(text)
    return {k: [np.array([[complex(re, im) for re, im in row] for row in m]) for m in ms]
            for k, ms in raw.items()}


def diff_tables(a, b, tol: float = TABLE_TOL) -> list[str]:
    out = []
    for key in a:
        for n, (x, y) in enumerate(zip(a[key], b[key])):
            for i, j in zip(*np.nonzero(np.abs(x - y) > tol)):
                out.append(f"{key}[{n}][{i},{j}]: computed {x[i, j]} vs table {y[i, j]}")
    return out


def _fmt_entry(z: complex) -> str:
    re, im = round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0
    if im == 0:
        return f"{re:g}"
    if re == 0:
        return f"{im:g}i"
    return f"{re:g}{im:+g}i"


def format_matrix(m: np.ndarray) -> str:
    cells = [[_fmt_entry(z) for z in row] for row in m]
    width = max(len(c) for row in cells for c in row)
    return "\n".join("  [" + " ".join(c.rjust(width) for c in row) + "]" for row in cells)


def cmd_tables(args) -> int:
    tables = computed_tables()
    as_json = getattr(args, "json", False)
    if args.diff_paper:
        mismatches = diff_tables(tables, reference_tables())
        if as_json:
            print(json.dumps({"mismatches": mismatches, "count": len(mismatches)}, indent=2))
        else:
            for line in mismatches:
                print(line)
            print(f"{len(mismatches)} mismatches")
        return EXIT_OK if not mismatches else EXIT_FAIL
    if as_json:
        print(tables_to_json(tables))
        return EXIT_OK
    for j, m in enumerate(tables["sigma"], start=1):
        print(f"sigma_{j}:\n{format_matrix(m)}")
    for mu, m in enumerate(tables["gamma"]):
        print(f"gamma_{mu}:\n{format_matrix(m)}")
    print(f"gamma_5:\n{format_matrix(tables['gamma5'][0])}")
    return EXIT_OK


# -- commands -------------------------------------------------------------------

def cmd_verify(args) -> int:
    seed, count, as_json, scale = _opts(args)
    try:
        reports = verify.run(args.suite, seed, count, scale)
    except ValueError as exc:
        print(f"realdirac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit_reports(reports, as_json)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _default_out(config: str, suffix: str) -> Path:
    return Path(f"{Path(config).stem}{suffix}")


def cmd_evolve(args) -> int:
    _, _, as_json, scale = _opts(args)
    out = Path(args.out) if args.out else _default_out(args.config, "-output")
    result = runs.run_evolve(args.config, out, scale)
    _emit_reports([result.report], as_json)
    if not as_json:
        for f in result.files:
            print(f"wrote {f}")
    return EXIT_OK if result.report.passed else EXIT_FAIL


def cmd_strength(args) -> int:
    _, _, as_json, scale = _opts(args)
    out = Path(args.out) if args.out else _default_out(args.config, "-strength.csv")
    report = runs.run_strength(args.config, out, scale)
    _emit_reports([report], as_json)
    if not as_json:
        print(f"wrote {out}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_extract(args) -> int:
    _, _, as_json, scale = _opts(args)
    out = Path(args.out) if args.out else _default_out(args.config, "-potential.csv")
    try:
        report = runs.run_extract(args.config, out, scale)
    except gauge.InconsistentField as exc:
        print(f"realdirac: inconsistent field: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit_reports([report], as_json)
    if not as_json:
        print(f"wrote {out}")
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {
    "verify": cmd_verify,
    "tables": cmd_tables,
    "evolve": cmd_evolve,
    "strength": cmd_strength,
    "extract": cmd_extract,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except io.ConfigError as exc:
        print(f"realdirac: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
