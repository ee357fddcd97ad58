"""Report tables and their Markdown / CSV renderings.

Rendered content depends only on the table; the generation timestamp sits on
its own leading comment line so determinism checks can drop it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

META_PREFIX = {"markdown": "<!-- ", "csv": "# "}
CSV_FIELDS = ("index", "description", "score", "spread", "n_seeds", "seeds",
              "published", "source", "status", "fingerprints")


@dataclass
class ReportRow:
    index: int
    description: str
    score: Optional[float]
    spread: Optional[float] = None
    seeds: tuple = ()
    published: Optional[float] = None
    source: str = "this run"
    status: str = "ok"
    fingerprints: tuple = ()
    reports: list = field(default_factory=list, repr=False, compare=False)

    @property
    def failed(self):
        return self.status.startswith("failed")


@dataclass
class ReportTable:
    name: str
    caption: str
    rows: list
    metadata: dict = field(default_factory=dict)

    @property
    def failed_rows(self):
        return [r for r in self.rows if r.failed]

    def best(self):
        scored = [r for r in self.rows if r.score is not None and r.source == "this run"]
        return max(scored, key=lambda r: (r.score, -r.index)) if scored else None


def _fmt(v, digits=2):
    return "" if v is None else f"{v:.{digits}f}"


def _seeds(seeds):
    if len(seeds) <= 2:
        return ", ".join(str(s) for s in seeds)
    return f"{seeds[0]}, ... ({len(seeds)} seeds)"


def render_markdown(table):
    header = ["#", "configuration", "mean CV score (%)", "± (std over seeds)", "seeds",
              "published (%)", "source", "status"]
    body = []
    for r in table.rows:
        body.append([
            str(r.index),
            r.description,
            _fmt(r.score),
            _fmt(r.spread),
            _seeds(r.seeds),
            _fmt(r.published),
            r.source,
            r.status,
        ])
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h) for i, h in enumerate(header)]
    right = {0, 2, 3, 5}

    def line(cells):
        out = [c.rjust(w) if i in right else c.ljust(w) for i, (c, w) in enumerate(zip(cells, widths))]
        return "| " + " | ".join(out) + " |"

    sep = "|" + "|".join(("-" * (w + 1) + ":") if i in right else ("-" * (w + 2))
                         for i, w in enumerate(widths)) + "|"
    lines = [f"**{table.name}: {table.caption}**", "", line(header), sep, *(line(b) for b in body)]
    notes = table.metadata.get("notes")
    if notes:
        lines += ["", *notes]
    fixed = ", ".join(f"{k}={table.metadata[k]}" for k in ("master_seed", "seeds", "folds", "stratified")
                      if k in table.metadata)
    if fixed:
        lines += ["", f"_{fixed}_"]
    return "\n".join(lines) + "\n"


def render_csv(table):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in table.rows:
        w.writerow({
            "index": r.index,
            "description": r.description,
            "score": "" if r.score is None else repr(float(r.score)),
            "spread": "" if r.spread is None else repr(float(r.spread)),
            "n_seeds": len(r.seeds),
            "seeds": " ".join(str(s) for s in r.seeds),
            "published": "" if r.published is None else repr(float(r.published)),
            "source": r.source,
            "status": r.status,
            "fingerprints": " ".join(r.fingerprints),
        })
    return buf.getvalue()


def emit_report(table, fmt, out_dir, stem=None, generated=None):
    """Write ``table`` as ``<out_dir>/<stem>.md`` or ``.csv`` and return the path."""
    if fmt in ("md", "markdown"):
        fmt, ext, text = "markdown", "md", render_markdown(table)
    elif fmt == "csv":
        ext, text = "csv", render_csv(table)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    meta = f"generated {generated or 'unknown'} by derm2vec"
    first = META_PREFIX[fmt] + meta + (" -->" if fmt == "markdown" else "")
    out_dir = Path(out_dir)
    path = out_dir / f"{stem or table.name.lower().replace(' ', '')}.{ext}"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path.write_text(first + "\n" + text)
    except OSError as e:
        raise OSError(e.errno, f"cannot write report: {e.strerror}", str(path)) from None
    return path


def strip_metadata(text):
    """Drop the generation line so two renderings can be compared byte for byte."""
    lines = text.splitlines(keepends=True)
    if lines and (lines[0].startswith("<!-- ") or lines[0].startswith("# ")):
        lines = lines[1:]
    return "".join(lines)


def read_report_csv(path):
    """Parse a CSV written by :func:`emit_report` back into :class:`ReportRow` objects."""
    text = strip_metadata(Path(path).read_text())
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(ReportRow(
            index=int(rec["index"]),
            description=rec["description"],
            score=float(rec["score"]) if rec["score"] else None,
            spread=float(rec["spread"]) if rec["spread"] else None,
            seeds=tuple(int(s) for s in rec["seeds"].split()),
            published=float(rec["published"]) if rec["published"] else None,
            source=rec["source"],
            status=rec["status"],
            fingerprints=tuple(rec["fingerprints"].split()),
        ))
    return rows


def write_cv_reports(entries, path):
    """``entries``: iterable of ``(table, row_index, replicate, CVReport)``; one CSV line per fold."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = ("table", "row", "replicate", "fingerprint", "seed", "fold", "fold_size",
              "accuracy", "mean_cv_score")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for table, row, rep, report in entries:
            for rec in report.csv_rows():
                w.writerow({"table": table, "row": row, "replicate": rep, **rec})
    return path
