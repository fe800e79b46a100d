"""Command line: ``ulboltz run|verify|sweep|oracle``.

Exit status is 0 iff every non-skipped check passes.
"""

import argparse
import dataclasses
import logging
import sys

from . import crosscheck, io
from .config import ConfigError, load_config
from .run import run_experiment, verify

SWEEP_EPS = (0.4, 0.2, 0.1)


def _print_checks(result):
    for c in result["checks"]:
        extra = f" ({c['reason']})" if c["reason"] else ""
        print(f"{c['status'].upper():8s} {c['name']}{extra}")
    print("ALL PASS" if result["all_pass"] else "SOME CHECKS FAILED")


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed,
                                  scenario_params=dict(cfg.scenario_params))
    return cfg


def _cmd_run(args, sweep=False):
    cfg = _load(args)
    if sweep and len(cfg.eps) < 2:
        cfg = dataclasses.replace(cfg, eps=SWEEP_EPS,
                                  scenario_params=dict(cfg.scenario_params))
    out, result = run_experiment(cfg, out=args.out, force=args.force, threads=args.threads)
    print(f"artifacts written to {out}")
    _print_checks(result)
    return 0 if result["all_pass"] else 1


def _cmd_verify(args):
    result = verify(args.run_dir)
    _print_checks(result)
    return 0 if result["all_pass"] else 1


def _cmd_oracle(args):
    cfg = _load(args)
    diffs = crosscheck.cross_check(cfg)
    ok = True
    for name, val in diffs.items():
        passed = val <= crosscheck.tolerance(name)
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL':8s} {name:18s} rel diff {val:.3e}")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="ulboltz", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "solve at every eps of the config"),
                           ("sweep", "solve over an eps list (default 0.4, 0.2, 0.1)"),
                           ("oracle", "cross-check fast paths against naive oracles")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config")
        p.add_argument("--out", default=None, help="run directory (default: config 'out')")
        p.add_argument("--force", action="store_true", help="overwrite an existing run")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=None, help="cap worker threads")
    p = sub.add_parser("verify", help="re-evaluate checks on a run directory")
    p.add_argument("run_dir")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_run(args, sweep=True)
        if args.command == "oracle":
            return _cmd_oracle(args)
        return _cmd_verify(args)
    except (ConfigError, ValueError, io.RunDirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
