"""Command-line front end for the experiment harness.

Subcommands:

* ``run``     — execute a JSON experiment config and emit the record;
* ``sweep``   — adversarial indicator sweep with a fixed pipeline;
* ``convert`` — translate matrices between Matrix Market and ``.npy``;
* ``report``  — summarize several record files into one CSV table.

Exit codes: 0 success, 2 a trial violated its read budget, 3 invalid
configuration or input file.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .harness import (
    ConfigError,
    adversarial_sweep,
    emit,
    load_config,
    report_rows,
    run,
)
from .mmio import load_matrix_market, save_matrix_market

EXIT_OK = 0
EXIT_BUDGET = 2
EXIT_CONFIG = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sublra",
        description="Sublinear low-rank approximation experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True,
                       help="path to a JSON experiment config")
    p_run.add_argument("--out", default=None,
                       help="output file (default: stdout)")
    p_run.add_argument("--format", choices=("json", "csv"), default="json")
    p_run.add_argument("--trials", type=int, default=None,
                       help="override the config's trial count")
    p_run.add_argument("--budget", type=float, default=None,
                       help="override the config's read budget")
    p_run.add_argument("--master-seed", type=int, default=None,
                       help="override the config's master seed")
    p_run.add_argument("--jobs", type=int, default=None,
                       help="override the config's concurrency bound")

    p_sweep = sub.add_parser("sweep", help="adversarial indicator sweep")
    p_sweep.add_argument("-m", type=int, required=True)
    p_sweep.add_argument("-n", type=int, required=True)
    p_sweep.add_argument("--family", choices=("delta", "shifted_delta"),
                         default="delta")
    p_sweep.add_argument("--budget", type=float, default=0.25)
    p_sweep.add_argument("--pipeline", required=True,
                         help="pipeline description: JSON text or a file path")
    p_sweep.add_argument("--master-seed", type=int, default=0)
    p_sweep.add_argument("--out", default=None)

    p_conv = sub.add_parser("convert",
                            help="convert between .mtx and .npy matrices")
    p_conv.add_argument("source")
    p_conv.add_argument("dest")

    p_rep = sub.add_parser("report", help="summarize record files as CSV")
    p_rep.add_argument("records", nargs="+")
    p_rep.add_argument("--out", default=None)
    return parser


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_run(args):
    config = load_config(args.config)
    if args.trials is not None:
        config.trials = args.trials
    if args.budget is not None:
        config.budget = args.budget
    if args.master_seed is not None:
        config.master_seed = args.master_seed
    if args.jobs is not None:
        config.jobs = args.jobs
    config.__post_init__()  # re-validate overrides
    record = run(config)
    _write(emit(record, fmt=args.format), args.out)
    return EXIT_BUDGET if record.failed else EXIT_OK


def _cmd_sweep(args):
    text = args.pipeline
    if not text.lstrip().startswith("{"):
        try:
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read pipeline file: {exc}") from exc
    try:
        pipeline = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"pipeline is not valid JSON: {exc}") from exc
    try:
        fail_fraction, per_matrix = adversarial_sweep(
            args.m, args.n, pipeline, args.budget,
            family=args.family, master_seed=args.master_seed,
        )
    except ConfigError as exc:
        if "over the budget" in str(exc):
            sys.stderr.write(f"sublra sweep: {exc}\n")
            return EXIT_BUDGET
        raise
    payload = {
        "m": args.m,
        "n": args.n,
        "family": args.family,
        "budget": args.budget,
        "fail_fraction": fail_fraction,
        "unseen_fraction": sum(not r["seen"] for r in per_matrix) / len(per_matrix),
        "per_matrix": per_matrix,
    }
    _write(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_convert(args):
    src, dst = args.source, args.dest
    if src.endswith(".mtx") and dst.endswith(".npy"):
        np.save(dst, load_matrix_market(src))
    elif src.endswith(".npy") and dst.endswith(".mtx"):
        try:
            a = np.load(src)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load {src}: {exc}") from exc
        save_matrix_market(dst, a)
    else:
        raise ConfigError(
            "convert needs a .mtx->.npy or .npy->.mtx pair of paths"
        )
    return EXIT_OK


def _cmd_report(args):
    rows = report_rows(args.records)
    import csv
    import io

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "convert": _cmd_convert,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"sublra {args.command}: {exc}\n")
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"sublra {args.command}: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
