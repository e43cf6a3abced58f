"""Command-line entry point ``aniso4nls``.

    aniso4nls run <config> [--out DIR]
    aniso4nls validate <config>
    aniso4nls oracle <t> <x1> [--width W]
    aniso4nls table gamma <d> <p>

Exit codes: 0 ok, 1 invalid input, 2 numerical abort (tail guard).
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from .asymptotics import leading_term_values
from .config import ConfigError, load_config
from .experiments import EXIT_ABORT, EXIT_INVALID, EXIT_OK, run_experiment
from .final_state import decay_prediction, default_alpha, in_theorem_range
from .oracle import QuadratureError, kernel_integral
from .profiles import Gaussian

log = logging.getLogger("aniso4nls")


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, ValueError) as e:
        log.error("invalid config: %s", e)
        return EXIT_INVALID
    try:
        res = run_experiment(cfg, args.out)
    except (ConfigError, ValueError) as e:
        log.error("invalid experiment: %s", e)
        return EXIT_INVALID
    for a in res.assertions:
        print(a.line())
    if res.message:
        log.error(res.message)
    print(f"run directory: {Path(args.out) / cfg.name}")
    return res.exit_code


def _cmd_validate(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            cfg = load_config(args.config)
        except (ConfigError, ValueError) as e:
            print(f"invalid: {e}")
            return EXIT_INVALID
    for w in caught:
        print(f"warning: {w.message}")
    print(f"ok: {cfg.name} ({cfg.suite.value}, d={cfg.grid.d}, grid {cfg.grid.n_points})")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if not args.t > 0:
        print("t must be positive", file=sys.stderr)
        return EXIT_INVALID
    psi = Gaussian(1, 1.0, args.width)
    try:
        val = kernel_integral(args.t, args.x1, psi.fourier, tol=args.tol)
    except QuadratureError as e:
        print(f"quadrature failed: {e}", file=sys.stderr)
        return EXIT_ABORT
    print(f"kernel   {val.real:.17g} {val.imag:+.17g}i")
    if args.t >= 2:
        lead = complex(leading_term_values(args.t, (args.x1,), psi))
        print(f"leading  {lead.real:.17g} {lead.imag:+.17g}i")
        if lead != 0:
            print(f"relative difference {abs(val - lead) / abs(lead):.6g}")
    return EXIT_OK


def _cmd_table(args) -> int:
    if args.what != "gamma":
        print(f"unknown table {args.what!r}", file=sys.stderr)
        return EXIT_INVALID
    if args.d not in (1, 2, 3) or not args.p > 1:
        print("need d in {1, 2, 3} and p > 1", file=sys.stderr)
        return EXIT_INVALID
    pred = decay_prediction(args.d, args.p)
    print(f"d = {args.d}, p = {args.p:g}")
    print(f"gamma = {pred.gamma:.17g}")
    print(f"active branch: {pred.branch}")
    inside = in_theorem_range(args.d, args.p)
    print(f"theorem range: {'yes' if inside else 'no'}")
    if inside:
        print(f"default weight alpha = {default_alpha(args.d, args.p):.17g}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (1); 2 is reserved for numerical aborts
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="aniso4nls", description="anisotropic fourth-order NLS experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--out", default="runs", help="output root (run directory is <out>/<name>)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="parse and check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("oracle", help="kernel quadrature probe for a unit Gaussian, d = 1")
    p.add_argument("t", type=float)
    p.add_argument("x1", type=float)
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("table", help="print derived tables")
    p.add_argument("what", choices=["gamma"])
    p.add_argument("d", type=int)
    p.add_argument("p", type=float)
    p.set_defaults(func=_cmd_table)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
