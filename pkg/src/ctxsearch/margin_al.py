"""Margin-based active learning of a non-homogeneous linear classifier.

At a fixed action ``b`` the learner runs a warm-up epoch that labels every
incoming context, then a sequence of epochs that only label contexts falling
inside a shrinking band around the current separating hyperplane.  An optional
unlabeled budget bounds how many contexts may be skipped; once it is spent the
band filter is switched off and every subsequent context is labeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environment import Environment
from .erm import LabeledSet, UnitClassifier, fit_logistic, fit_zero_one_brute
from .errors import BudgetExhaustedError, LabelCapExceeded

BRUTE_GRID_STEPS = 64  # grid used when the 0/1 oracle replaces the surrogate
_MAX_EPOCHS = 64


@dataclass(frozen=True)
class MarginALConfig:
    eps_a: float
    delta_a: float
    kappa_m: float
    kappa_n: float
    eps_0: float
    beta_0: float
    unlabeled_budget: int | None = None
    fit_mode: str = "logistic_surrogate"
    record_data: bool = False

    def __post_init__(self):
        if not (0.0 < self.eps_a <= self.eps_0 <= 1.0):
            raise ValueError(
                f"need 0 < eps_a <= eps_0 <= 1, got eps_a={self.eps_a}, "
                f"eps_0={self.eps_0}"
            )
        if not (0.0 < self.delta_a < 1.0):
            raise ValueError(f"delta_a must be in (0, 1), got {self.delta_a}")
        if self.kappa_m <= 0 or self.kappa_n <= 0 or self.beta_0 <= 0:
            raise ValueError("kappa_m, kappa_n and beta_0 must be positive")
        if self.fit_mode not in ("logistic_surrogate", "zero_one_brute"):
            raise ValueError(f"unknown fit_mode {self.fit_mode!r}")
        if self.unlabeled_budget is not None and self.unlabeled_budget < 0:
            raise ValueError("unlabeled_budget must be >= 0 when set")


@dataclass
class EpochTrace:
    """Diagnostics for one epoch; counters are cumulative within the run."""

    k: int
    eps_k: float
    m_k: float
    n_k: int
    labels_used: int
    samples_seen: int
    classifier: UnitClassifier
    data: LabeledSet | None = field(default=None, repr=False)


@dataclass(frozen=True)
class EpochSchedule:
    n_0: int
    k_0: int
    epochs: list  # (k, eps_k, m_k, n_k) tuples for k = 1..k_0


def epoch_schedule(cfg: MarginALConfig, d: int) -> EpochSchedule:
    """Warm-up size, epoch count and per-epoch (eps_k, m_k, n_k) tuples.

    ``n_0 = ceil(kappa_n / eps_0^2)`` and ``k_0`` is the smallest k >= 1 with
    ``2^-k * eps_0 <= eps_a`` (the epoch loop always runs at least once).
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    n_0 = math.ceil(cfg.kappa_n / cfg.eps_0**2)
    k_0 = 1
    while cfg.eps_0 * 2.0**-k_0 > cfg.eps_a and k_0 < _MAX_EPOCHS:
        k_0 += 1
    epochs = [
        epoch_row(cfg.eps_0, cfg.kappa_m, cfg.kappa_n, d, k)
        for k in range(1, k_0 + 1)
    ]
    return EpochSchedule(n_0, k_0, epochs)


def epoch_row(eps_0: float, kappa_m: float, kappa_n: float, d: int, k: int):
    """The epoch-k tuple: target error, band width, label count."""
    eps_k = eps_0 * 2.0**-k
    m_k = kappa_m * math.sqrt(eps_k)
    n_k = math.ceil(kappa_n * d / eps_k)
    return k, eps_k, m_k, n_k


def margin_filter(c: UnitClassifier, x: np.ndarray, m: float) -> bool:
    """True iff ``x`` lies within distance ``m`` of the decision hyperplane
    score, i.e. ``|<x, w> - beta| <= m``."""
    if m <= 0:
        raise ValueError("margin width must be positive")
    return bool(abs(c.decision(x)) <= m)


def margin_based_active_learning(
    env: Environment, b: float, cfg: MarginALConfig
) -> tuple[UnitClassifier, list[EpochTrace]]:
    """Run the full epoch schedule at action ``b`` and return the last-epoch
    classifier together with the per-epoch trace.

    Raises :class:`BudgetExhaustedError` with the partial trace attached when
    the environment's hard label cap is hit mid-run.
    """
    schedule = epoch_schedule(cfg, env.d)
    labels_at_start = env.labels_used
    samples_at_start = env.samples_seen
    skips_left = cfg.unlabeled_budget  # None = unlimited skipping
    traces: list[EpochTrace] = []

    def snapshot(k, eps_k, m_k, n_k, clf, data):
        traces.append(
            EpochTrace(
                k=k,
                eps_k=eps_k,
                m_k=m_k,
                n_k=n_k,
                labels_used=env.labels_used - labels_at_start,
                samples_seen=env.samples_seen - samples_at_start,
                classifier=clf,
                data=data if cfg.record_data else None,
            )
        )

    try:
        data = _collect(env, b, schedule.n_0, None, math.inf, None)[0]
        clf = _fit(data, cfg)
        snapshot(0, cfg.eps_0, math.inf, schedule.n_0, clf, data)

        for k, eps_k, m_k, n_k in schedule.epochs:
            data, skips_left = _collect(env, b, n_k, clf, m_k, skips_left)
            clf = _fit(data, cfg)
            snapshot(k, eps_k, m_k, n_k, clf, data)
    except LabelCapExceeded as exc:
        raise BudgetExhaustedError(
            f"label cap hit during margin-based learning at b={b:.6g}",
            partial=(traces[-1].classifier if traces else None, traces),
        ) from exc

    return clf, traces


def _fit(data: LabeledSet, cfg: MarginALConfig) -> UnitClassifier:
    if cfg.fit_mode == "logistic_surrogate":
        return fit_logistic(data)
    return fit_zero_one_brute(data, cfg.beta_0, BRUTE_GRID_STEPS)


def _collect(
    env: Environment,
    b: float,
    need: int,
    clf: UnitClassifier | None,
    m: float,
    skips_left: int | None,
) -> tuple[LabeledSet, int | None]:
    """Stream contexts until ``need`` labels are collected.

    A context is labeled if no filter is active (warm-up, or the skip budget
    ran out) or if its margin against ``clf`` is at most ``m``.  Skipped
    contexts are discarded permanently.  Returns the labeled set and the
    remaining skip allowance.
    """
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    have = 0
    filter_on = clf is not None and math.isfinite(m)
    if skips_left is not None and skips_left <= 0:
        filter_on = False

    while have < need:
        remaining = need - have
        if not filter_on:
            X = env.next_contexts(min(8192, remaining))
            y = env.query_batch(X, b)
            xs.append(X)
            ys.append(y)
            have += X.shape[0]
            continue

        block = min(8192, max(256, 4 * remaining))
        X = env.context_stream.take(block)
        to_label = np.abs(X @ clf.w - clf.beta) <= m
        disable_at = None
        if skips_left is not None:
            skip_pos = np.nonzero(~to_label)[0]
            if skip_pos.size > skips_left:
                # The (skips_left+1)-th would-be skip exceeds the budget:
                # from that context on, label everything.
                disable_at = int(skip_pos[skips_left])
                to_label[disable_at:] = True
        label_cum = np.cumsum(to_label)
        if label_cum[-1] >= remaining:
            consumed = int(np.searchsorted(label_cum, remaining)) + 1
        else:
            consumed = block
        env.context_stream.put_back(X[consumed:])
        X_seen = X[:consumed]
        picked = to_label[:consumed]
        env.record(samples=consumed)
        X_lab = X_seen[picked]
        y = env.query_batch(X_lab, b)
        xs.append(X_lab)
        ys.append(y)
        have += X_lab.shape[0]
        if skips_left is not None:
            skips_left -= consumed - X_lab.shape[0]
        if disable_at is not None and disable_at < consumed:
            filter_on = False

    X_all = np.concatenate(xs) if len(xs) > 1 else xs[0]
    y_all = np.concatenate(ys) if len(ys) > 1 else ys[0]
    return LabeledSet(X_all, y_all), skips_left
