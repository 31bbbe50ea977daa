"""Synthetic feedback environment for contextual search experiments.

The environment owns the ground-truth linear utility, the context and noise
distributions, and the per-trial random streams.  It is the only source of
binary feedback for the search algorithms, and it additionally exposes
experimenter-side diagnostics (label rate, excess classification error) that
run on a dedicated random substream so they never perturb the labeled/total
sample counters reported for a trial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LabelCapExceeded
from .mathstats import RngStream

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class LinearUtility:
    """Linear mean-utility model ``value(x) = <x, w> - mu``."""

    w: np.ndarray
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))

    @property
    def d(self) -> int:
        return self.w.shape[0]

    def value(self, x: np.ndarray) -> float | np.ndarray:
        """Mean utility of a single context (d,) or a batch (n, d)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(x @ self.w - self.mu)
        return x @ self.w - self.mu

    def check_bound(self, bound: float) -> None:
        if np.linalg.norm(self.w) > bound + 1e-12 or abs(self.mu) > bound + 1e-12:
            raise ValueError(
                f"utility parameters exceed the configured bound {bound}: "
                f"|w|={np.linalg.norm(self.w):.6g}, |mu|={abs(self.mu):.6g}"
            )


class NoiseDistribution:
    """Zero-median noise with an exactly evaluable CDF.

    Three families are supported: symmetric uniform on [-h, h], logistic with
    scale s, and centered Gaussian with standard deviation sigma.  When the
    density admits honest (A3)-style bounds on [-2, 2] they are recorded in
    ``density_bounds = (c_lo, c_hi)``; a uniform with half-width < 2 has zero
    density inside [-2, 2] and carries no lower bound.
    """

    def __init__(self, kind: str, param: float, density_bounds=None):
        if kind not in ("uniform", "logistic", "gaussian"):
            raise ValueError(f"unknown noise kind {kind!r}")
        if param <= 0:
            raise ValueError("noise scale parameter must be positive")
        self.kind = kind
        self.param = float(param)
        self.density_bounds = density_bounds

    @classmethod
    def uniform(cls, half_width: float = 1.0) -> "NoiseDistribution":
        h = float(half_width)
        bounds = (1.0 / (2 * h), 1.0 / (2 * h)) if h >= 2.0 else None
        return cls("uniform", h, bounds)

    @classmethod
    def logistic(cls, scale: float = 1.0) -> "NoiseDistribution":
        s = float(scale)
        e2 = math.exp(2.0 / s)
        c_lo = e2 / (s * (1.0 + e2) ** 2)  # density at |t| = 2
        c_hi = 1.0 / (4.0 * s)             # density at 0
        return cls("logistic", s, (c_lo, c_hi))

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "NoiseDistribution":
        s = float(sigma)
        c_hi = 1.0 / (s * math.sqrt(2 * math.pi))
        c_lo = c_hi * math.exp(-2.0 / (s * s))  # density at |t| = 2
        return cls("gaussian", s, (c_lo, c_hi))

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "uniform":
            h = self.param
            out = np.clip((t + h) / (2.0 * h), 0.0, 1.0)
        elif self.kind == "logistic":
            out = 1.0 / (1.0 + np.exp(-np.clip(t / self.param, -500, 500)))
        else:
            out = 0.5 * (1.0 + _erf_vec(t / (self.param * _SQRT2)))
        return float(out) if out.ndim == 0 else out

    def phi(self, delta):
        """Label-rate deviation ``F(0) - F(-delta)``; odd-signed, zero at zero."""
        return self.cdf(0.0) - self.cdf(-np.asarray(delta, dtype=float)) + 0.0

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            return gen.uniform(-self.param, self.param, size)
        if self.kind == "logistic":
            return gen.logistic(0.0, self.param, size)
        return gen.normal(0.0, self.param, size)


def _erf_vec(t):
    return np.vectorize(math.erf, otypes=[float])(t)


class ContextDistribution:
    """Context law supported on the unit ball.

    ``uniform_ball`` is the isotropic default.  ``density_tilted`` multiplies
    the uniform density by ``1 + tilt * x_1`` (rejection-sampled), so the
    density ratio to uniform stays inside [1 - tilt, 1 + tilt].
    """

    def __init__(self, d: int, kind: str = "uniform_ball", tilt: float = 0.0):
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        if kind not in ("uniform_ball", "density_tilted"):
            raise ValueError(f"unknown context kind {kind!r}")
        if kind == "density_tilted" and not (0.0 < tilt < 1.0):
            raise ValueError("tilt must be in (0, 1) for the tilted variant")
        self.d = int(d)
        self.kind = kind
        self.tilt = float(tilt) if kind == "density_tilted" else 0.0

    @classmethod
    def tilted_from_bounds(cls, d: int, c_x: float, C_x: float) -> "ContextDistribution":
        """Build a tilted law whose density ratio provably stays in [c_x, C_x]."""
        if not (0.0 < c_x <= 1.0 <= C_x):
            raise ValueError("need c_x <= 1 <= C_x with c_x > 0")
        gamma = min(1.0 - c_x, C_x - 1.0)
        if gamma <= 0.0:
            return cls(d, "uniform_ball")
        return cls(d, "density_tilted", gamma)

    @property
    def density_ratio_bounds(self) -> tuple[float, float]:
        return (1.0 - self.tilt, 1.0 + self.tilt)

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        x = _uniform_ball(gen, size, self.d)
        if self.kind == "uniform_ball":
            return x
        # Rejection against the envelope (1 + tilt)/|B|; expected acceptance
        # rate is 1/(1 + tilt) >= 1/2, so a couple of top-up rounds suffice.
        accept = gen.random(size) * (1.0 + self.tilt) <= 1.0 + self.tilt * x[:, 0]
        out = x[accept]
        while out.shape[0] < size:
            need = size - out.shape[0]
            extra = _uniform_ball(gen, max(need * 2, 16), self.d)
            keep = gen.random(extra.shape[0]) * (1.0 + self.tilt) <= (
                1.0 + self.tilt * extra[:, 0]
            )
            out = np.concatenate([out, extra[keep]])
        return out[:size]


def _uniform_ball(gen: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = gen.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return g / norms * gen.random((n, 1)) ** (1.0 / d)


@dataclass(frozen=True)
class FeedbackSample:
    """One observed interaction: context, queried action, binary outcome."""

    x: np.ndarray
    b: float
    y: int

    def __post_init__(self):
        if self.y not in (-1, 1):
            raise ValueError(f"label must be +1 or -1, got {self.y}")


class _BufferedStream:
    """FIFO buffer over a chunked random draw, with push-back.

    Consumers may take blocks of any size and return unconsumed tails; the
    observed sequence is identical to element-by-element consumption because
    the underlying generator always advances in fixed-size chunks.
    """

    def __init__(self, draw, chunk: int = 4096):
        self._draw = draw
        self._chunk = chunk
        self._pending: list[np.ndarray] = []

    def take(self, n: int) -> np.ndarray:
        if n <= 0:
            if not self._pending:
                self._pending.append(self._draw(self._chunk))
            return self._pending[0][:0]
        parts = []
        got = 0
        while got < n:
            if not self._pending:
                # Refills are always one fixed-size chunk so the delivered
                # sequence is independent of how consumers batch their takes.
                self._pending.append(self._draw(self._chunk))
            head = self._pending.pop(0)
            if head.shape[0] <= n - got:
                parts.append(head)
                got += head.shape[0]
            else:
                parts.append(head[: n - got])
                self._pending.insert(0, head[n - got :])
                got = n
        return parts[0] if len(parts) == 1 else np.concatenate(parts)

    def put_back(self, tail: np.ndarray) -> None:
        if tail.shape[0]:
            self._pending.insert(0, tail)


class Environment:
    """Binary-feedback world: contexts in, +/-1 labels out.

    Counters: ``samples_seen`` advances once per context drawn (labeled or
    skipped), ``labels_used`` once per query.  The batched helpers
    (:meth:`next_contexts`, :meth:`query_batch`, the raw stream handles) are
    throughput paths with semantics identical to calling the scalar operations
    in a loop.
    """

    def __init__(
        self,
        truth: LinearUtility,
        noise: NoiseDistribution,
        contexts: ContextDistribution,
        rng: RngStream,
        bound: float = 5.0,
        label_cap: int | None = None,
    ):
        if truth.d != contexts.d:
            raise ValueError(
                f"utility dimension {truth.d} != context dimension {contexts.d}"
            )
        truth.check_bound(bound)
        self.truth = truth
        self.noise = noise
        self.contexts = contexts
        self.rng = rng
        self.bound = float(bound)
        self.label_cap = label_cap
        self.labels_used = 0
        self.samples_seen = 0
        ctx_gen = rng.child("contexts").generator
        noise_gen = rng.child("noise").generator
        self._diag_gen = rng.child("diagnostics").generator
        self.context_stream = _BufferedStream(
            lambda n: contexts.sample(ctx_gen, n)
        )
        self.noise_stream = _BufferedStream(lambda n: noise.sample(noise_gen, n))

    @property
    def d(self) -> int:
        return self.truth.d

    # -- counter bookkeeping -------------------------------------------------

    def record(self, samples: int = 0, labels: int = 0) -> None:
        """Advance the counters for draws consumed through the raw streams."""
        if samples < 0 or labels < 0:
            raise ValueError("counters are monotone; negative increments rejected")
        if self.label_cap is not None and self.labels_used + labels > self.label_cap:
            raise LabelCapExceeded(
                f"label cap {self.label_cap} exceeded "
                f"(used {self.labels_used}, requested {labels})"
            )
        self.samples_seen += samples
        self.labels_used += labels

    # -- interaction protocol ------------------------------------------------

    def next_context(self) -> np.ndarray:
        """Draw the next incoming context; counts one sample."""
        x = self.context_stream.take(1)[0]
        self.record(samples=1)
        return x

    def next_contexts(self, n: int) -> np.ndarray:
        """Draw the next ``n`` contexts at once; counts ``n`` samples."""
        x = self.context_stream.take(n)
        self.record(samples=n)
        return x

    def label_for(self, values, xi, b: float):
        """The feedback rule: +1 iff utility >= action, ties resolve to +1."""
        return np.where(np.asarray(values) + xi - b >= 0.0, 1, -1)

    def query(self, x: np.ndarray, b: float) -> int:
        """Query action ``b`` against context ``x``; counts one label."""
        xi = self.noise_stream.take(1)[0]
        self.record(labels=1)
        return int(self.label_for(self.truth.value(x), xi, b))

    def query_batch(self, X: np.ndarray, b: float) -> np.ndarray:
        """Query the same action against each row of ``X``; counts len(X) labels."""
        n = X.shape[0]
        xi = self.noise_stream.take(n)
        self.record(labels=n)
        return self.label_for(self.truth.value(X), xi, b)

    # -- analytic quantities ---------------------------------------------------

    def phi(self, delta):
        return self.noise.phi(delta)

    def eta(self, x: np.ndarray, b: float):
        """Conditional positive-label probability ``1/2 + phi(value(x) - b)``."""
        return 0.5 + self.noise.phi(self.truth.value(x) - b)

    # -- experimenter-side diagnostics (dedicated RNG, counters untouched) ----

    def win_rate(self, b: float, n_mc: int) -> float:
        """Monte-Carlo estimate of the marginal positive-label rate at ``b``."""
        if n_mc < 1:
            raise ValueError("n_mc must be >= 1")
        X = self.contexts.sample(self._diag_gen, n_mc)
        return float(np.mean(0.5 + self.noise.phi(self.truth.value(X) - b)))

    def excess_error(self, cand, b: float, n_mc: int) -> float:
        """Monte-Carlo excess classification error of ``cand`` at action ``b``.

        Noise is integrated analytically: conditional on x, the candidate
        loses exactly ``2|eta(x) - 1/2|`` relative to the Bayes rule wherever
        their signs disagree, so only contexts are sampled.
        """
        if n_mc < 1:
            raise ValueError("n_mc must be >= 1")
        X = self.contexts.sample(self._diag_gen, n_mc)
        margins = self.truth.value(X) - b
        eta_dev = self.noise.phi(margins)
        bayes_pos = margins >= 0.0
        cand_pos = (X @ cand.w - cand.beta) >= 0.0
        return float(2.0 * np.mean(np.abs(eta_dev) * (bayes_pos != cand_pos)))


def benchmark_truth(d: int) -> LinearUtility:
    """The benchmark ground truth: w = (2/sqrt(d), ..., 2/sqrt(d)), mu = -2.5."""
    return LinearUtility(np.full(d, 2.0 / math.sqrt(d)), -2.5)


def make_environment(
    d: int,
    rng: RngStream,
    truth: LinearUtility | None = None,
    noise: NoiseDistribution | None = None,
    tilt: float = 0.0,
    bound: float = 5.0,
    label_cap: int | None = None,
) -> Environment:
    """Assemble the default benchmark environment (uniform-ball contexts,
    uniform noise on [-1, 1], benchmark ground truth) with optional overrides."""
    if truth is None:
        truth = benchmark_truth(d)
    if noise is None:
        noise = NoiseDistribution.uniform(1.0)
    kind = "density_tilted" if tilt > 0.0 else "uniform_ball"
    contexts = ContextDistribution(d, kind, tilt)
    return Environment(truth, noise, contexts, rng, bound=bound, label_cap=label_cap)
