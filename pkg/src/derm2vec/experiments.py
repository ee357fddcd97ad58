"""Sweeps and comparisons over the cross-validation harness.

Every grid point is evaluated on the same fold plans (one per replicate) and
gets its own model seed derived from the master seed, the table and the row
number. Grid points are independent jobs; results are keyed by
``(row, replicate)`` so completion order never matters.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .baselines import ForestMethod, GnbMethod, KnnMethod, ShallowAnnMethod, TreeMethod
from .config import METHOD_LABELS, PUBLISHED_ONLY_METHODS, DnnRow, Derm2VecRow
from .core import derive_seed
from .data import drop_missing, encode_features, parse_dataset, default_data_path
from .evaluation import cross_validate, fingerprint, make_folds
from .pipeline import Derm2VecConfig, Derm2VecMethod, DnnMethod
from .report import ReportRow, ReportTable

log = logging.getLogger(__name__)

CAPTIONS = {
    "dnn_sweep": "Mean CV score for DNN with different hyperparameters",
    "derm2vec_sweep": "Mean CV score for Derm2Vec with different hyperparameters",
    "comparison": "Comparing Derm2Vec and DNN with other methods",
    "single": "Single configuration",
}
TABLE_NAMES = {"dnn_sweep": "Table 1", "derm2vec_sweep": "Table 2", "comparison": "Table 3",
               "single": "Single"}
FILE_STEMS = {"dnn_sweep": "table1", "derm2vec_sweep": "table2", "comparison": "table3",
              "single": "single"}


@dataclass
class Dataset:
    deep: object
    baseline: object
    records_parsed: int
    records_kept: int


@dataclass
class ExperimentResult:
    tables: dict = field(default_factory=dict)
    cv_entries: list = field(default_factory=list)
    generated: str = ""

    @property
    def failed(self):
        return any(t.failed_rows for t in self.tables.values())


def load_data(cfg, path=None):
    path = path or cfg.data or default_data_path()
    records = parse_dataset(path)
    kept = drop_missing(records)
    return Dataset(
        deep=encode_features(kept, cfg.deep_age_scaling),
        baseline=encode_features(kept, cfg.baseline_age_scaling),
        records_parsed=len(records),
        records_kept=len(kept),
    )


def fold_plans(cfg, labels):
    return [make_folds(labels, cfg.folds, derive_seed(cfg.seed, "folds", r), cfg.stratified)
            for r in range(cfg.seeds)]


def dnn_method(cfg, row):
    return DnnMethod(hidden=row.hidden, dropout=row.dropout, train=cfg.classifier_train)


def derm2vec_method(cfg, row):
    return Derm2VecMethod(Derm2VecConfig(
        ae_spec=replace(cfg.ae_spec, encoding_dim=row.encoding_dim),
        ae_train=cfg.ae_train,
        clf_hidden=row.hidden,
        clf_dropout=row.dropout,
        clf_train=cfg.classifier_train,
    ))


def baseline_method(cfg, name):
    if name == "knn":
        return KnnMethod(cfg.knn_k)
    if name == "nb":
        return GnbMethod()
    if name == "dt":
        return TreeMethod(max_depth=cfg.dt_max_depth)
    if name == "rf":
        return ForestMethod(cfg.rf_n_estimators, cfg.rf_max_depth)
    if name == "ann":
        return ShallowAnnMethod(cfg.classifier_train)
    raise ValueError(f"not a baseline: {name!r}")


@dataclass(frozen=True)
class _Job:
    """One grid point: a method, its data matrix key and seed namespace."""

    index: int
    description: str
    method: object
    matrix: str
    seed_key: tuple
    published: object = None


def _run_cv(method, x, y, plan, seed):
    try:
        return cross_validate(method, x, y, plan, seed=seed)
    except Exception as e:  # recorded in-table, the sweep carries on
        return e


def _evaluate(jobs_list, data, plans, cfg, cache):
    """Run every (job, replicate) pair; returns ``{(index, rep): CVReport | Exception}``."""
    tasks = []
    for job in jobs_list:
        fm = data.deep if job.matrix == "deep" else data.baseline
        fp = fingerprint(job.method.describe())
        for rep, plan in enumerate(plans):
            seed = derive_seed(cfg.seed, *job.seed_key, rep)
            key = (fp, seed, plan.seed, job.matrix)
            tasks.append(((job.index, rep), key, job.method, fm, plan, seed))

    out = {}
    pending = []
    for slot, key, method, fm, plan, seed in tasks:
        if key in cache:
            out[slot] = cache[key]
        else:
            pending.append((slot, key, method, fm, plan, seed))

    if cfg.jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futs = [(slot, key, pool.submit(_run_cv, m, fm.x, fm.labels, plan, seed))
                    for slot, key, m, fm, plan, seed in pending]
            done = [(slot, key, f.result()) for slot, key, f in futs]
    else:
        done = [(slot, key, _run_cv(m, fm.x, fm.labels, plan, seed))
                for slot, key, m, fm, plan, seed in pending]

    for slot, key, res in done:
        out[slot] = res
        if not isinstance(res, Exception):
            cache[key] = res
    return out


def _assemble(kind, jobs_list, results, cfg):
    rows, entries = [], []
    for job in jobs_list:
        reps = [results[(job.index, r)] for r in range(cfg.seeds)]
        errors = [e for e in reps if isinstance(e, Exception)]
        seeds = tuple(derive_seed(cfg.seed, *job.seed_key, r) for r in range(cfg.seeds))
        if errors:
            log.error("%s row %d failed: %s", TABLE_NAMES[kind], job.index, errors[0])
            rows.append(ReportRow(job.index, job.description, None, seeds=seeds,
                                  published=job.published, status=f"failed: {errors[0]}"))
            continue
        scores = np.array([r.mean_cv_score for r in reps])
        rows.append(ReportRow(
            index=job.index,
            description=job.description,
            score=float(np.mean(scores)),
            spread=float(np.std(scores)),
            seeds=seeds,
            published=job.published,
            fingerprints=tuple(dict.fromkeys(r.fingerprint for r in reps)),
            reports=reps,
        ))
        entries += [(FILE_STEMS[kind], job.index, r, rep) for r, rep in enumerate(reps)]
    return rows, entries


def _metadata(cfg):
    return {"master_seed": cfg.seed, "seeds": cfg.seeds, "folds": cfg.folds,
            "stratified": cfg.stratified, "version": __version__}


def _dnn_jobs(cfg):
    return [_Job(i, row.label(), dnn_method(cfg, row), "deep", ("dnn_sweep", i), row.published)
            for i, row in enumerate(cfg.dnn_rows, start=1)]


def _derm2vec_jobs(cfg):
    return [_Job(i, row.label(), derm2vec_method(cfg, row), "deep", ("derm2vec_sweep", i), row.published)
            for i, row in enumerate(cfg.derm2vec_rows, start=1)]


def run_dnn_sweep(cfg, data=None, cache=None):
    return _run_table("dnn_sweep", _dnn_jobs(cfg), cfg, data, cache)


def run_derm2vec_sweep(cfg, data=None, cache=None):
    return _run_table("derm2vec_sweep", _derm2vec_jobs(cfg), cfg, data, cache)


def _comparison_jobs(cfg):
    jobs_list, published_rows = [], []
    for i, name in enumerate(cfg.methods, start=1):
        published = cfg.published.get(name)
        label = METHOD_LABELS[name]
        if name in PUBLISHED_ONLY_METHODS:
            published_rows.append(ReportRow(i, label, None, published=published, source="paper",
                                        status="published only, not implemented"))
        elif name == "derm2vec":
            row = cfg.derm2vec_rows[cfg.derm2vec_row - 1]
            jobs_list.append(_Job(i, f"{label}: {row.label()}", derm2vec_method(cfg, row), "deep",
                                  ("derm2vec_sweep", cfg.derm2vec_row), published))
        elif name == "dnn":
            row = cfg.dnn_rows[cfg.dnn_row - 1]
            jobs_list.append(_Job(i, f"{label}: {row.label()}", dnn_method(cfg, row), "deep",
                                  ("dnn_sweep", cfg.dnn_row), published))
        else:
            jobs_list.append(_Job(i, label, baseline_method(cfg, name), "baseline",
                                  ("comparison", name), published))
    return jobs_list, published_rows


def ordering_check(table):
    """Soft expectation: Derm2Vec >= DNN >= every implemented classical baseline."""
    by_label = {r.description.split(":")[0]: r for r in table.rows
                if r.source == "this run" and r.score is not None}
    d2v, dnn = by_label.get("Derm2Vec"), by_label.get("DNN")
    classical = [r for k, r in by_label.items() if k not in ("Derm2Vec", "DNN")]
    problems = []
    if d2v and dnn and d2v.score < dnn.score:
        problems.append(f"Derm2Vec ({d2v.score:.2f}) below DNN ({dnn.score:.2f})")
    for top in (d2v, dnn):
        if top is None:
            continue
        for r in classical:
            if top.score < r.score:
                problems.append(f"{top.description.split(':')[0]} ({top.score:.2f}) below "
                                f"{r.description} ({r.score:.2f})")
    return problems


def run_comparison(cfg, data=None, cache=None):
    jobs_list, published_rows = _comparison_jobs(cfg)
    table, entries = _run_table("comparison", jobs_list, cfg, data, cache)
    table.rows = sorted(table.rows + published_rows, key=lambda r: r.index)
    problems = ordering_check(table)
    for p in problems:
        log.warning("ordering expectation not met: %s", p)
    notes = ["Rows with source `paper` were not reproduced; their scores are the published values."]
    notes += [f"Ordering note: {p}." for p in problems] or ["Ordering Derm2Vec >= DNN >= classical baselines holds."]
    table.metadata["notes"] = notes
    table.metadata["ordering_problems"] = problems
    return table, entries


def run_single(cfg, data=None, cache=None):
    s = cfg.single
    name = s["method"]
    hidden = tuple(int(v) for v in s.get("hidden", "100").split(","))
    dropout = float(s.get("dropout", "0") or 0)
    if name == "derm2vec":
        row = Derm2VecRow(int(s.get("encoding_dim", "32")), hidden, dropout)
        job = _Job(1, f"Derm2Vec: {row.label()}", derm2vec_method(cfg, row), "deep", ("single", 1))
    elif name == "dnn":
        row = DnnRow(hidden, dropout)
        job = _Job(1, f"DNN: {row.label()}", dnn_method(cfg, row), "deep", ("single", 1))
    else:
        job = _Job(1, METHOD_LABELS[name], baseline_method(cfg, name), "baseline", ("single", 1))
    return _run_table("single", [job], cfg, data, cache)


def _run_table(kind, jobs_list, cfg, data, cache):
    data = data or load_data(cfg)
    cache = {} if cache is None else cache
    plans = fold_plans(cfg, data.deep.labels)
    start = time.perf_counter()
    results = _evaluate(jobs_list, data, plans, cfg, cache)
    rows, entries = _assemble(kind, jobs_list, results, cfg)
    log.info("%s: %d rows in %.1fs", TABLE_NAMES[kind], len(rows), time.perf_counter() - start)
    table = ReportTable(TABLE_NAMES[kind], CAPTIONS[kind], rows, _metadata(cfg))
    return table, entries


RUNNERS = {
    "dnn_sweep": run_dnn_sweep,
    "derm2vec_sweep": run_derm2vec_sweep,
    "comparison": run_comparison,
    "single": run_single,
}


def run_experiments(cfg, data=None, cache=None):
    """Run every kind listed in ``cfg.kinds`` sharing one data load and result cache.

    Pass the same ``cache`` dict to later calls to reuse any (method, seed,
    fold plan) result already computed.
    """
    data = data or load_data(cfg)
    cache = {} if cache is None else cache
    result = ExperimentResult(generated=time.strftime("%Y-%m-%dT%H:%M:%S"))
    for kind in cfg.kinds:
        table, entries = RUNNERS[kind](cfg, data, cache)
        result.tables[kind] = table
        result.cv_entries += entries
    return result
