"""Seedable numeric primitives shared by the rest of the package.

Everything here is a pure function of its arguments and the state of the
:class:`RngStream` it is handed; no module-level randomness, no hidden state.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

_U64 = 2**64


def mix_to_stream_id(*keys) -> int:
    """Hash an arbitrary tuple of ints/strings to a stable 64-bit stream id.

    Uses SHA-256 over the decimal/string forms so the mapping is identical
    across platforms and Python processes (``hash()`` is salted and unusable).
    """
    h = hashlib.sha256()
    for k in keys:
        h.update(str(k).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "little")


@dataclass
class RngStream:
    """A named, reproducible random stream.

    Identical ``(seed, stream_id)`` pairs produce identical draw sequences
    regardless of process, thread schedule or platform.  A stream is
    single-owner: never share one instance across concurrent consumers.
    """

    seed: int
    stream_id: int = 0
    _generator: np.random.Generator | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        if not (0 <= self.seed < _U64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not (0 <= self.stream_id < _U64):
            raise ValueError(
                f"stream_id must be a 64-bit unsigned integer, got {self.stream_id}"
            )

    @property
    def generator(self) -> np.random.Generator:
        """The underlying generator, created lazily on first use."""
        if self._generator is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
            self._generator = np.random.default_rng(ss)
        return self._generator

    def child(self, *keys) -> "RngStream":
        """Derive an independent substream keyed by ``keys``.

        The child's id mixes this stream's id with the keys, so distinct key
        tuples give statistically independent streams while staying fully
        reproducible from the root seed.
        """
        return RngStream(self.seed, mix_to_stream_id(self.stream_id, *keys))


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def halfwidth(self) -> float:
        return (self.upper - self.lower) / 2.0


def sample_uniform_ball(
    d: int, rng: RngStream, size: int | None = None
) -> np.ndarray:
    """Draw uniformly from the closed unit Euclidean ball in ``d`` dimensions.

    Gaussian direction times a ``U**(1/d)`` radius, which is exact in any
    dimension and O(d) per draw.

    Parameters
    ----------
    d : ambient dimension, >= 1
    rng : stream to draw from
    size : if None return a single vector of shape (d,), otherwise an array
        of shape (size, d)

    Returns
    -------
    np.ndarray with Euclidean norm(s) <= 1
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    n = 1 if size is None else int(size)
    gen = rng.generator
    g = gen.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # Probability-zero guard: a zero Gaussian vector would divide by zero.
    norms[norms == 0.0] = 1.0
    radii = gen.random((n, 1)) ** (1.0 / d)
    x = g / norms * radii
    return x[0] if size is None else x


def hoeffding_interval(
    successes: int, trials: int, global_n: int, delta_s: float
) -> ConfidenceInterval:
    """Anytime Hoeffding interval for an empirical success rate.

    Center ``successes/trials`` with half-width
    ``sqrt(ln(8*global_n**2/delta_s) / (2*trials))``, where ``global_n`` is the
    cumulative sample counter of the surrounding search.  Endpoints are NOT
    clipped to [0, 1]: the trisection stopping rule compares raw endpoints
    against 0.5 and clipping could only delay termination.
    """
    if trials < 1:
        raise ZeroDivisionError("trials must be >= 1")
    if global_n < 1:
        raise ValueError("global_n must be >= 1")
    if not (0.0 < delta_s < 1.0):
        raise ValueError(f"delta_s must be in (0, 1), got {delta_s}")
    if successes > trials or successes < 0:
        raise ValueError(f"successes {successes} outside [0, trials={trials}]")
    center = successes / trials
    halfwidth = math.sqrt(math.log(8.0 * global_n * global_n / delta_s) / (2.0 * trials))
    return ConfidenceInterval(center - halfwidth, center + halfwidth)


def fit_loglog_slope(points) -> tuple[float, float]:
    """Ordinary least squares of ln(err) on ln(n).

    Parameters
    ----------
    points : iterable of (n, err) with n >= 1 and err > 0

    Returns
    -------
    (slope, intercept) of the fitted line in log-log space
    """
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("need at least 2 points for a log-log fit")
    ns = np.asarray([p[0] for p in pts], dtype=float)
    errs = np.asarray([p[1] for p in pts], dtype=float)
    if np.any(ns < 1):
        raise ValueError("all n must be >= 1")
    if np.any(errs <= 0):
        raise ValueError("all err must be > 0")
    if np.unique(ns).size < 2:
        raise ValueError("degenerate fit: need at least 2 distinct n values")
    lx = np.log(ns)
    ly = np.log(errs)
    lx_mean = lx.mean()
    ly_mean = ly.mean()
    slope = float(np.sum((lx - lx_mean) * (ly - ly_mean)) / np.sum((lx - lx_mean) ** 2))
    intercept = float(ly_mean - slope * lx_mean)
    return slope, intercept


def angle_between(w1: np.ndarray, w2: np.ndarray) -> float:
    """Angle in radians between two unit vectors, in [0, pi]."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    n1 = np.linalg.norm(w1)
    n2 = np.linalg.norm(w2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("angle_between is undefined for a zero vector")
    if abs(n1 - 1.0) > 1e-9 or abs(n2 - 1.0) > 1e-9:
        raise ValueError("inputs must be unit-norm within 1e-9")
    return float(math.acos(min(1.0, max(-1.0, float(np.dot(w1, w2))))))


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-8) -> float:
    """Adaptive Simpson quadrature of ``f`` on [a, b] to relative tolerance."""
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = max(abs(whole), 1e-300)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, rtol * scale, depth=50)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1
    )


def ball_marginal_bounds(d: int, a: float, b: float) -> tuple[float, float]:
    """Analytic envelope for Pr[x_1 in [a, b]] under the uniform unit-ball law.

    Returns (lower, upper) where
    ``lower = sqrt((d+1)/(16*pi)) * I`` and ``upper = sqrt((d+1)/(2*pi)) * I``
    with ``I = integral of exp(-(d-1)u^2/2) over [a, b]``.  The lower bound is
    only valid for [a, b] inside [-1/sqrt(2), 1/sqrt(2)].
    """
    if d < 2:
        raise ValueError("bounds require d >= 2")
    integral = adaptive_simpson(lambda u: math.exp(-0.5 * (d - 1) * u * u), a, b)
    lower = math.sqrt((d + 1) / (16.0 * math.pi)) * integral
    upper = math.sqrt((d + 1) / (2.0 * math.pi)) * integral
    return lower, upper
