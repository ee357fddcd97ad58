"""``derm2vec`` command line: ``run`` reproduces the tables, ``data-summary`` checks a data file."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import TABLE_KINDS, load_config
from .data import default_data_path, parse_dataset, summary_markdown
from .errors import ConfigError, Derm2VecError
from .experiments import FILE_STEMS, run_experiments
from .report import emit_report, render_markdown, write_cv_reports

log = logging.getLogger("derm2vec")


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed {text} is not an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="derm2vec", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the sweeps and comparison from a config file")
    run.add_argument("--config", help="INI config; the bundled default when omitted")
    run.add_argument("--table", type=int, choices=sorted(TABLE_KINDS), action="append",
                     help="only run this table (repeatable)")
    run.add_argument("--data", help="dermatology data file")
    run.add_argument("--seed", type=_u64, help="master seed")
    run.add_argument("--seeds", type=_positive, help="replicates per row, each on derived seeds")
    run.add_argument("--out", help="output directory")
    run.add_argument("--format", choices=("md", "csv"), action="append",
                     help="report format (repeatable; default both)")
    run.add_argument("--jobs", type=_positive, help="worker processes for grid points")

    summ = sub.add_parser("data-summary", help="print record and class counts as Markdown")
    summ.add_argument("--data", help="dermatology data file")
    return p


def _resolve(args):
    cfg = load_config(args.config)
    if args.table:
        cfg = cfg.for_tables(sorted(set(args.table)))
    overrides = {k: getattr(args, k) for k in ("data", "seed", "seeds", "out", "jobs")
                 if getattr(args, k) is not None}
    cfg = replace(cfg, **overrides).validate()
    data = Path(cfg.data) if cfg.data else default_data_path()
    if not data.is_file():
        raise ConfigError("experiment.data", f"no such file: {data}")
    return replace(cfg, data=str(data))


def cmd_run(args):
    cfg = _resolve(args)
    formats = args.format or ["md", "csv"]
    result = run_experiments(cfg)
    out = Path(cfg.out)
    for kind, table in result.tables.items():
        for fmt in formats:
            path = emit_report(table, fmt, out, FILE_STEMS[kind], result.generated)
            log.info("wrote %s", path)
        print(render_markdown(table))
    write_cv_reports(result.cv_entries, out / "cv_reports.csv")
    for kind, table in result.tables.items():
        for r in table.failed_rows:
            print(f"{table.name} row {r.index} ({r.description}) {r.status}", file=sys.stderr)
    return 1 if result.failed else 0


def cmd_data_summary(args):
    path = Path(args.data) if args.data else default_data_path()
    print(f"**{path.name}**\n")
    print(summary_markdown(parse_dataset(path)), end="")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_data_summary(args)
    except (Derm2VecError, ValueError, OSError) as e:
        print(f"derm2vec: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
