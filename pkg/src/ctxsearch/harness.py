"""Experiment runner: seeded parallel trials, CSV persistence, summaries.

Budgets are specified in labels.  Within a study, every (d, budget, trial,
algo, rho) cell derives its own random substream from the experiment seed, so
results are independent of worker count and identical across reruns; the CSV
byte content is deterministic.
"""

from __future__ import annotations

import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from . import __version__
from .environment import make_environment
from .mathstats import RngStream, fit_loglog_slope, mix_to_stream_id
from .meta import PRESETS, TRI_BUDGET_FRACTION, run_active, run_passive
from .records import CSV_HEADER, RunRecord, record_to_row, row_to_record

STUDIES = ("convergence", "dims", "ratio", "single")


@dataclass(frozen=True)
class ExperimentConfig:
    study: str
    d_list: tuple[int, ...]
    label_budgets: tuple[int, ...]
    trials: int
    seed: int
    preset: str = "paper-sec5"
    rho_list: tuple[float, ...] = ()
    out_path: str = "results.csv"
    workers: int = 1

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ValueError(f"unknown study {self.study!r}; expected one of {STUDIES}")
        if self.preset not in PRESETS:
            raise ValueError(
                f"unknown preset {self.preset!r}; expected one of {tuple(PRESETS)}"
            )
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.d_list or any(d < 1 for d in self.d_list):
            raise ValueError("d_list must contain positive dimensions")
        if not self.label_budgets or any(b < 10 for b in self.label_budgets):
            raise ValueError("all label budgets must be >= 10")
        if self.study == "ratio" and not self.rho_list:
            raise ValueError("the ratio study needs a non-empty rho_list")
        if any(r < 0 for r in self.rho_list):
            raise ValueError("rho values must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class _Task:
    seed: int
    study: str
    preset: str
    d: int
    budget: int
    trial: int
    algo: str
    rho: float | None


def _run_task(task: _Task) -> RunRecord:
    stream_id = mix_to_stream_id(
        task.study,
        task.d,
        task.budget,
        task.trial,
        task.algo,
        "-" if task.rho is None else task.rho,
    )
    rng = RngStream(task.seed, stream_id)
    env = make_environment(task.d, rng)
    unlabeled = None
    if task.rho is not None:
        unlabeled = math.ceil(task.rho * task.budget)
    cfg = PRESETS[task.preset](
        task.d, label_budget=task.budget, unlabeled_budget=unlabeled
    )
    if task.algo == "active":
        _, record = run_active(env, cfg)
    else:
        _, record = run_passive(env, cfg, task.budget)
    # wall_ms is pinned to 0 so reruns of the same config are byte-identical.
    return replace(
        record,
        study=task.study,
        trial=task.trial,
        rho_configured=task.rho,
        wall_ms=0,
    )


def _execute(tasks: list[_Task], workers: int) -> list[tuple[_Task, RunRecord]]:
    if workers <= 1 or len(tasks) <= 1:
        records = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=1))
    return list(zip(tasks, records))


def _convergence_tasks(cfg: ExperimentConfig) -> list[_Task]:
    return [
        _Task(cfg.seed, cfg.study, cfg.preset, d, budget, trial, algo, None)
        for d in cfg.d_list
        for budget in cfg.label_budgets
        for trial in range(cfg.trials)
        for algo in ("active", "passive")
    ]


def run_convergence_study(cfg: ExperimentConfig) -> list[RunRecord]:
    """Paired active/passive trials per (d, budget) cell, with per-cell medians
    and log-log slopes in the summary file."""
    done = _execute(_convergence_tasks(cfg), cfg.workers)
    return _persist(cfg, done)


def run_dims_study(cfg: ExperimentConfig) -> list[RunRecord]:
    """Error versus dimension at fixed budgets."""
    done = _execute(_convergence_tasks(cfg), cfg.workers)
    return _persist(cfg, done)


def run_single(cfg: ExperimentConfig) -> list[RunRecord]:
    """One (d, budget) cell: paired active/passive trials."""
    one_cell = replace(
        cfg, d_list=(cfg.d_list[0],), label_budgets=(cfg.label_budgets[0],)
    )
    done = _execute(_convergence_tasks(one_cell), cfg.workers)
    return _persist(cfg, done)


def run_ratio_study(cfg: ExperimentConfig) -> list[RunRecord]:
    """Unlabeled-budget sweep at fixed label budget: active runs with skip
    allowance ceil(rho * n); the rho = 0 cell is the passive baseline."""
    budget = cfg.label_budgets[0]
    tasks = []
    for d in cfg.d_list:
        for rho in cfg.rho_list:
            algo = "passive" if rho == 0 else "active"
            for trial in range(cfg.trials):
                tasks.append(
                    _Task(cfg.seed, cfg.study, cfg.preset, d, budget, trial, algo, rho)
                )
    done = _execute(tasks, cfg.workers)
    return _persist(cfg, done)


def run_study(cfg: ExperimentConfig) -> list[RunRecord]:
    runner = {
        "convergence": run_convergence_study,
        "dims": run_dims_study,
        "ratio": run_ratio_study,
        "single": run_single,
    }[cfg.study]
    return runner(cfg)


# -- persistence ---------------------------------------------------------------


def write_csv(records: list[RunRecord], path: str) -> None:
    """Write records in the canonical schema, sorted deterministically; on
    failure any partial file is removed."""
    ordered = sorted(records, key=lambda r: r.sort_key())
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(CSV_HEADER + "\n")
            for r in ordered:
                f.write(record_to_row(r) + "\n")
    except OSError:
        _cleanup(path)
        raise


def read_csv(path: str) -> list[RunRecord]:
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}: {header!r}")
        return [row_to_record(line) for line in f if line.strip()]


def _cleanup(path: str) -> None:
    try:
        os.remove(path)
    except OSError:
        pass


def _persist(cfg: ExperimentConfig, done: list[tuple[_Task, RunRecord]]):
    records = [r for _, r in done]
    write_csv(records, cfg.out_path)
    try:
        _write_meta(cfg)
        _write_summary(cfg, done)
    except OSError:
        _cleanup(cfg.out_path)
        raise
    return records


def _write_meta(cfg: ExperimentConfig) -> None:
    lines = [
        "# resolved run parameters",
        f"version={__version__}",
        f"study={cfg.study}",
        f"preset={cfg.preset}",
        f"seed={cfg.seed}",
        "d_list=" + ",".join(str(d) for d in cfg.d_list),
        "label_budgets=" + ",".join(str(b) for b in cfg.label_budgets),
        f"trials={cfg.trials}",
        "rho_list=" + ",".join(f"{r:g}" for r in cfg.rho_list),
        f"workers={cfg.workers}",
        f"tri_budget_fraction={TRI_BUDGET_FRACTION:.9g}",
        "kappa_n_rule=d+ln(n) with n the configured label budget of the run",
        "epoch_rule=largest epoch count whose schedule fits half the "
        "post-trisection label budget",
        "trisection_move_rule=verbatim: lower bracket moves whenever either "
        "interior lower confidence bound exceeds 1/2",
    ]
    with open(cfg.out_path + ".meta", "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def _write_summary(cfg: ExperimentConfig, done: list[tuple[_Task, RunRecord]]) -> None:
    cells: dict[tuple, list[RunRecord]] = {}
    for task, rec in done:
        key = (task.algo, task.d, task.budget, task.rho)
        cells.setdefault(key, []).append(rec)

    lines = [f"# summary study={cfg.study} seed={cfg.seed} preset={cfg.preset}"]
    for (algo, d, budget, rho) in sorted(
        cells, key=lambda k: (k[0], k[1], k[2], -1.0 if k[3] is None else k[3])
    ):
        recs = cells[(algo, d, budget, rho)]
        med_err = _median(sorted(r.err for r in recs))
        med_lab = _median(sorted(r.n_labeled for r in recs))
        rho_txt = "" if rho is None else f"{rho:g}"
        extra = ""
        if rho is not None and rho > 0:
            extra = f" log2_rho={math.log2(rho):.9g}"
        lines.append(
            f"cell study={cfg.study} algo={algo} d={d} budget={budget} "
            f"rho={rho_txt} trials={len(recs)} median_err={med_err:.9g} "
            f"median_labels={med_lab:.10g}{extra}"
        )

    # Log-log convergence slopes per algo and dimension, over all records of
    # that algo/d (the same data a reader can recover from the CSV alone).
    by_algo_d: dict[tuple, list[RunRecord]] = {}
    for task, rec in done:
        by_algo_d.setdefault((task.algo, task.d), []).append(rec)
    for (algo, d) in sorted(by_algo_d):
        recs = by_algo_d[(algo, d)]
        pts = [(r.n_labeled, r.err) for r in recs if r.err > 0 and r.n_labeled >= 1]
        distinct = {p[0] for p in pts}
        if len(distinct) >= 2:
            slope, intercept = fit_loglog_slope(pts)
            lines.append(
                f"slope study={cfg.study} algo={algo} d={d} "
                f"slope={slope:.12g} intercept={intercept:.12g}"
            )

    with open(cfg.out_path + ".summary", "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def _median(sorted_vals):
    n = len(sorted_vals)
    mid = n // 2
    if n % 2:
        return float(sorted_vals[mid])
    return 0.5 * (float(sorted_vals[mid - 1]) + float(sorted_vals[mid]))


def run_with_timing(cfg: ExperimentConfig) -> list[RunRecord]:
    """CLI entry: run the study and report elapsed wall time on stderr."""
    t0 = time.perf_counter()
    records = run_study(cfg)
    elapsed = time.perf_counter() - t0
    print(
        f"{cfg.study}: {len(records)} runs in {elapsed:.1f}s -> {cfg.out_path}",
        file=sys.stderr,
    )
    return records
