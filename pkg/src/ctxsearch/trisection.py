"""Trisection search for the label-balancing action.

Shrinks an action interval by a factor 2/3 per outer iteration, testing the
two interior third-points with anytime Hoeffding intervals until one of them
is confidently separated from a 1/2 positive-label rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .environment import Environment
from .errors import BudgetExhaustedError, LabelCapExceeded

DEFAULT_MAX_LABELS = 10_000_000


@dataclass(frozen=True)
class TrisectionConfig:
    eps_s: float
    delta_s: float
    b_bound: float = 5.0
    max_labels: int | None = DEFAULT_MAX_LABELS

    def __post_init__(self):
        if not (0.0 < self.eps_s < 2.0 * self.b_bound):
            raise ValueError(
                f"eps_s must lie in (0, 2*b_bound), got {self.eps_s} with "
                f"b_bound {self.b_bound}"
            )
        if not (0.0 < self.delta_s < 1.0):
            raise ValueError(f"delta_s must be in (0, 1), got {self.delta_s}")
        if self.max_labels is not None and self.max_labels < 2:
            raise ValueError("max_labels must allow at least one query pair")


@dataclass(frozen=True)
class TrisectionResult:
    b1: float
    b2: float
    labels_used: int
    samples_seen: int
    iterations: int

    def __post_init__(self):
        if self.b1 > self.b2:
            raise ValueError(f"bracket inverted: b1={self.b1} > b2={self.b2}")

    @property
    def width(self) -> float:
        return self.b2 - self.b1

    def contains(self, b: float) -> bool:
        return self.b1 <= b <= self.b2


def trisection_search(env: Environment, cfg: TrisectionConfig) -> TrisectionResult:
    """Locate a bracket [b1, b2] of width <= eps_s around the label-balancing
    action, consuming two labels per inner iteration (one context queried at
    each interior point).

    Raises :class:`BudgetExhaustedError` carrying the partial bracket when
    ``cfg.max_labels`` queries would be exceeded.
    """
    labels_at_start = env.labels_used
    samples_at_start = env.samples_seen
    b1, b2 = -cfg.b_bound, cfg.b_bound
    n_global = 0  # cumulative inner-loop count across the whole run
    iterations = 0
    log_delta = math.log(8.0 / cfg.delta_s)

    def partial() -> TrisectionResult:
        return TrisectionResult(
            b1, b2, env.labels_used - labels_at_start,
            env.samples_seen - samples_at_start, iterations,
        )

    while b2 - b1 > cfg.eps_s:
        b3 = b1 + (b2 - b1) / 3.0
        b4 = b2 - (b2 - b1) / 3.0
        n_hat = 0
        r3 = 0
        r4 = 0
        p3_low = p4_low = 0.0
        stopped = False
        while not stopped:
            if cfg.max_labels is not None:
                allowance = (cfg.max_labels - (env.labels_used - labels_at_start)) // 2
                if allowance < 1:
                    raise BudgetExhaustedError(
                        f"trisection exceeded max_labels={cfg.max_labels} "
                        f"at bracket [{b1:.6g}, {b2:.6g}]",
                        partial=partial(),
                    )
            else:
                allowance = None
            block = max(64, min(8192, n_hat))
            if allowance is not None:
                block = min(block, allowance)

            # One block of inner iterations: a (b3, b4) query pair each.
            X = env.context_stream.take(2 * block)
            xi = env.noise_stream.take(2 * block)
            y3 = env.label_for(env.truth.value(X[0::2]), xi[0::2], b3) == 1
            y4 = env.label_for(env.truth.value(X[1::2]), xi[1::2], b4) == 1
            r3_cum = r3 + np.cumsum(y3)
            r4_cum = r4 + np.cumsum(y4)
            n_hat_arr = n_hat + np.arange(1, block + 1)
            n_arr = n_global + np.arange(1, block + 1)
            halfwidth = np.sqrt((log_delta + 2.0 * np.log(n_arr)) / (2.0 * n_hat_arr))
            p3 = r3_cum / n_hat_arr
            p4 = r4_cum / n_hat_arr
            outside = (
                (p3 - halfwidth > 0.5)
                | (p3 + halfwidth < 0.5)
                | (p4 - halfwidth > 0.5)
                | (p4 + halfwidth < 0.5)
            )
            hit = np.nonzero(outside)[0]
            consumed = int(hit[0]) + 1 if hit.size else block
            env.context_stream.put_back(X[2 * consumed :])
            env.noise_stream.put_back(xi[2 * consumed :])
            try:
                env.record(samples=2 * consumed, labels=2 * consumed)
            except LabelCapExceeded as exc:
                raise BudgetExhaustedError(
                    f"environment label cap hit at bracket [{b1:.6g}, {b2:.6g}]",
                    partial=partial(),
                ) from exc
            n_hat += consumed
            n_global += consumed
            r3 = int(r3_cum[consumed - 1])
            r4 = int(r4_cum[consumed - 1])
            if hit.size:
                j = consumed - 1
                p3_low = float(p3[j] - halfwidth[j])
                p4_low = float(p4[j] - halfwidth[j])
                stopped = True

        if p3_low > 0.5 or p4_low > 0.5:
            b1 = b3
        else:
            b2 = b4
        iterations += 1

    return partial()
