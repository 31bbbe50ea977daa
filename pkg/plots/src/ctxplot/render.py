"""Publication-style figures from benchmark CSVs.

Three kinds: log-log convergence with fitted slope lines, error versus
dimension, and error versus log2 of the unlabeled/labeled ratio with the
all-labeled baseline as a dotted reference.  Rendering never mutates its
inputs and the annotation text is a pure function of the CSV contents.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import Row, load_rows

KINDS = ("convergence", "dims", "ratio")
ALGO_STYLE = {"active": ("tab:blue", "o"), "passive": ("tab:red", "s")}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_csv: str
    output_path: str
    fmt: str = "png"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected {KINDS}")
        if self.fmt not in ("png", "svg"):
            raise ValueError(f"format must be png or svg, got {self.fmt!r}")


def loglog_slope(ns, errs) -> tuple[float, float]:
    """OLS slope/intercept of log err against log n (numpy polyfit)."""
    coeffs = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errs, float)), 1)
    return float(coeffs[0]), float(coeffs[1])


def _median(values) -> float:
    return float(np.median(np.asarray(values, dtype=float)))


def _group(rows, key):
    out: dict = {}
    for r in rows:
        out.setdefault(key(r), []).append(r)
    return out


def render(spec: FigureSpec) -> dict:
    """Write the figure and return its annotation metadata (slopes etc.)."""
    rows = load_rows(spec.input_csv)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        if spec.kind == "convergence":
            meta = _render_convergence(ax, rows)
        elif spec.kind == "dims":
            meta = _render_dims(ax, rows)
        else:
            meta = _render_ratio(ax, rows)
        fig.tight_layout()
        fig.savefig(spec.output_path, format=spec.fmt, dpi=120)
    finally:
        plt.close(fig)
    return meta


def _render_convergence(ax, rows: list[Row]) -> dict:
    slopes = {}
    annotations = []
    for (algo, d), grp in sorted(_group(rows, lambda r: (r.algo, r.d)).items()):
        pts = [(r.n_labeled, r.err) for r in grp if r.err > 0 and r.n_labeled >= 1]
        if not pts:
            continue
        color, marker = ALGO_STYLE.get(algo, ("tab:gray", "x"))
        ns = np.array([p[0] for p in pts], dtype=float)
        errs = np.array([p[1] for p in pts], dtype=float)
        ax.plot(ns, errs, marker, color=color, alpha=0.25, markersize=3)
        # per-cell medians give the visible trend line
        cells = _group(grp, lambda r: r.n_labeled)
        med_n = sorted(cells)
        med_e = [_median([r.err for r in cells[n]]) for n in med_n]
        ax.plot(med_n, med_e, "-", color=color, label=f"{algo} d={d}")
        if len(set(ns)) >= 2:
            slope, intercept = loglog_slope(ns, errs)
            slopes[(algo, d)] = slope
            grid = np.geomspace(ns.min(), ns.max(), 50)
            ax.plot(grid, np.exp(intercept) * grid**slope, ":", color=color)
            annotations.append(f"{algo} d={d} slope={slope:.6f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("labeled samples")
    ax.set_ylabel("estimation error")
    ax.legend(fontsize=8)
    _annotate(ax, annotations)
    return {"kind": "convergence", "slopes": slopes, "annotations": annotations}


def _render_dims(ax, rows: list[Row]) -> dict:
    medians = {}
    for (algo, d), grp in sorted(_group(rows, lambda r: (r.algo, r.d)).items()):
        medians[(algo, d)] = _median([r.err for r in grp])
    annotations = []
    for algo in sorted({a for a, _ in medians}):
        ds = sorted(d for a, d in medians if a == algo)
        errs = [medians[(algo, d)] for d in ds]
        color, marker = ALGO_STYLE.get(algo, ("tab:gray", "x"))
        ax.plot(ds, errs, marker + "-", color=color, label=algo)
        annotations.append(
            f"{algo} " + " ".join(f"d={d}:{e:.6f}" for d, e in zip(ds, errs))
        )
    ax.set_xlabel("dimension")
    ax.set_ylabel("median estimation error")
    ax.legend(fontsize=8)
    _annotate(ax, annotations)
    return {"kind": "dims", "medians": medians, "annotations": annotations}


def _render_ratio(ax, rows: list[Row]) -> dict:
    with_rho = [r for r in rows if r.rho is not None]
    if not with_rho:
        raise ValueError("ratio figure needs rho_configured values")
    cells = _group(with_rho, lambda r: r.rho)
    medians = {rho: _median([r.err for r in grp]) for rho, grp in cells.items()}
    annotations = []
    positive = sorted(r for r in medians if r > 0)
    if positive:
        xs = [np.log2(r) for r in positive]
        ys = [medians[r] for r in positive]
        ax.plot(xs, ys, "o-", color="tab:blue", label="active")
        annotations.append(
            "active " + " ".join(f"rho={r:g}:{medians[r]:.6f}" for r in positive)
        )
    if 0.0 in medians:
        ax.axhline(
            medians[0.0], linestyle=":", color="tab:red", label="all labeled (rho=0)"
        )
        annotations.append(f"baseline rho=0:{medians[0.0]:.6f}")
    ax.set_xlabel("log2(unlabeled/labeled ratio)")
    ax.set_ylabel("median estimation error")
    ax.legend(fontsize=8)
    _annotate(ax, annotations)
    return {"kind": "ratio", "medians": medians, "annotations": annotations}


def _annotate(ax, lines) -> None:
    if lines:
        ax.text(
            0.02,
            0.02,
            "\n".join(lines),
            transform=ax.transAxes,
            fontsize=7,
            family="monospace",
            verticalalignment="bottom",
        )
