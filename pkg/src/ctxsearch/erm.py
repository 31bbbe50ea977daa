"""Classifier fitting: logistic surrogate and a brute-force 0/1-loss oracle.

Both fitters return a normalized linear rule ``sgn(<x, w> - beta)`` with
``|w| = 1``; the sign convention everywhere is ``sgn(0) = +1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SeparationError

LOGISTIC_GRAD_TOL = 1e-11  # contract requires <= 1e-8; we converge tighter
LOGISTIC_MAX_ITER = 500
DEFAULT_RIDGE = 1e-6


@dataclass(frozen=True)
class UnitClassifier:
    """Normalized linear classifier: predict +1 iff ``<x, w> - beta >= 0``."""

    w: np.ndarray
    beta: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "w", w)
        norm = np.linalg.norm(w)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"classifier direction must be unit-norm, |w| = {norm!r}")

    @property
    def d(self) -> int:
        return self.w.shape[0]

    def decision(self, X: np.ndarray):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return float(X @ self.w - self.beta)
        return X @ self.w - self.beta

    def predict(self, X: np.ndarray):
        scores = self.decision(X)
        return np.where(np.asarray(scores) >= 0.0, 1, -1)


@dataclass(frozen=True)
class LabeledSet:
    """A classification dataset: contexts in the unit ball, labels in {+1, -1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array of shape (n, d)")
        if y.shape != (X.shape[0],):
            raise ValueError("y must be a 1-d array matching X's first axis")
        if not np.all(np.isin(y, (-1, 1))):
            raise ValueError("labels must be +1 or -1")
        if X.shape[0] and np.max(np.linalg.norm(X, axis=1)) > 1.0 + 1e-9:
            raise ValueError("contexts must lie in the unit ball")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def fit_logistic(data: LabeledSet, ridge: float = DEFAULT_RIDGE) -> UnitClassifier:
    """Ridge-regularized logistic regression, normalized after optimization.

    Minimizes the mean log-loss of ``y * (<x, w> - beta)`` plus
    ``ridge * (|w|^2 + beta^2) / 2`` over unconstrained (w, beta) by damped
    Newton with backtracking, then rescales both parameters by ``1/|w|``.
    """
    if len(data) == 0:
        raise ValueError("cannot fit an empty dataset")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if ridge == 0.0 and np.all(data.y == data.y[0]):
        raise SeparationError(
            "single-label data with ridge=0 has no finite minimizer"
        )

    # Augment with a -1 column so theta = (w, beta) and score = Xa @ theta.
    n, d = data.X.shape
    Xa = np.concatenate([data.X, -np.ones((n, 1))], axis=1)
    y = data.y.astype(float)
    theta = np.zeros(d + 1)

    def objective(t):
        z = y * (Xa @ t)
        return float(np.mean(np.logaddexp(0.0, -z)) + 0.5 * ridge * t @ t)

    def normalized(t):
        scale = np.linalg.norm(t[:d])
        return t / scale if scale > 1e-12 else t

    obj = objective(theta)
    stationary = 0
    for _ in range(LOGISTIC_MAX_ITER):
        z = y * (Xa @ theta)
        s = _sigmoid(-z)  # d(logloss)/dz weight
        grad = -(Xa.T @ (y * s)) / n + ridge * theta
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= LOGISTIC_GRAD_TOL:
            break
        p = _sigmoid(z) * s
        hess = (Xa.T * p) @ Xa / n + ridge * np.eye(d + 1)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad
        # Backtracking line search on the objective.
        before = normalized(theta)
        t_size = 1.0
        for _ in range(30):
            cand = theta - t_size * step
            cand_obj = objective(cand)
            if cand_obj <= obj - 1e-4 * t_size * float(grad @ step):
                theta, obj = cand, cand_obj
                break
            t_size *= 0.5
        else:
            break  # no decrease possible at machine precision
        # On near-separable data the raw optimum diverges while the returned
        # normalized classifier freezes; stop once it stops moving.
        if float(np.max(np.abs(normalized(theta) - before))) <= 1e-13:
            stationary += 1
            if stationary >= 3:
                break
        else:
            stationary = 0

    w, beta = theta[:d], float(theta[d])
    norm = float(np.linalg.norm(w))
    if norm < 1e-12:
        raise SeparationError("fitted direction collapsed to zero; cannot normalize")
    return UnitClassifier(w / norm, beta / norm)


def _sigmoid(t):
    return 1.0 / (1.0 + np.exp(-np.clip(t, -500.0, 500.0)))


def fit_zero_one_brute(
    data: LabeledSet, beta_0: float, grid_steps: int
) -> UnitClassifier:
    """Exhaustive grid minimizer of the empirical 0/1 loss.

    Searches unit directions on an angular grid (``grid_steps`` per angular
    dimension, one local refinement pass) crossed with a ``grid_steps``-point
    intercept grid on [-beta_0, beta_0].  Intended as a small-scale oracle:
    d <= 3 and at most a few hundred points.

    Tie-break among minimizers: smallest |beta|, then lexicographically
    smallest direction.
    """
    if data.d > 3:
        raise ValueError(f"brute-force search supports d <= 3, got d={data.d}")
    if len(data) > 200:
        raise ValueError("brute-force search is limited to 200 points")
    if grid_steps < 8:
        raise ValueError("grid_steps must be >= 8")
    if beta_0 <= 0:
        raise ValueError("beta_0 must be positive")

    d = data.d
    betas = _midpoint_grid(beta_0, grid_steps)
    angles, spacings = _coarse_angles(d, grid_steps)
    best = _grid_minimum(data, _dirs_from_angles(d, angles), angles, betas)

    # One refinement level around the coarse winner.
    if d > 1:
        fine_axes = [
            np.linspace(a - s, a + s, grid_steps)
            for a, s in zip(best["angles"], spacings)
        ]
        fine_angles = _angle_product(fine_axes)
    else:
        fine_angles = angles
    beta_spacing = 2.0 * beta_0 / grid_steps
    fine_betas = np.clip(
        np.linspace(best["beta"] - beta_spacing, best["beta"] + beta_spacing, grid_steps),
        -beta_0,
        beta_0,
    )
    refined = _grid_minimum(
        data, _dirs_from_angles(d, fine_angles), fine_angles, fine_betas
    )

    winner = min(best, refined, key=lambda r: r["key"])
    return UnitClassifier(winner["w"], winner["beta"])


def _midpoint_grid(beta_0: float, g: int) -> np.ndarray:
    # Cell midpoints of [-beta_0, beta_0]; nested under odd grid refinements.
    return -beta_0 + (2.0 * np.arange(g) + 1.0) * beta_0 / g


def _coarse_angles(d: int, g: int):
    """Angle tuples covering the unit sphere, plus per-axis grid spacings."""
    if d == 1:
        return [(), ()], ()
    if d == 2:
        return [(a,) for a in 2.0 * math.pi * np.arange(g) / g], (2.0 * math.pi / g,)
    polar = np.linspace(0.0, math.pi, g)
    azimuth = 2.0 * math.pi * np.arange(g) / g
    return (
        [(p, a) for p in polar for a in azimuth],
        (math.pi / (g - 1), 2.0 * math.pi / g),
    )


def _angle_product(axes):
    if len(axes) == 1:
        return [(a,) for a in axes[0]]
    return [(p, a) for p in axes[0] for a in axes[1]]


def _dirs_from_angles(d: int, angles) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    ws = np.empty((len(angles), d))
    for i, ang in enumerate(angles):
        if d == 2:
            (theta,) = ang
            ws[i] = (math.cos(theta), math.sin(theta))
        else:
            polar, azim = ang
            sp = math.sin(polar)
            ws[i] = (sp * math.cos(azim), sp * math.sin(azim), math.cos(polar))
    return ws


def _grid_minimum(data: LabeledSet, ws: np.ndarray, angles, betas: np.ndarray) -> dict:
    best = None
    y_pos = data.y[:, None, None] == 1
    # Chunk the direction axis so the (n, D, B) sign tensor stays small.
    chunk = max(1, int(4_000_000 / max(1, len(data) * betas.size)))
    for lo in range(0, ws.shape[0], chunk):
        w_blk = ws[lo : lo + chunk]
        proj = data.X @ w_blk.T  # (n, D)
        preds = proj[:, :, None] - betas[None, None, :] >= 0.0
        errs = (preds != y_pos).sum(axis=0)  # (D, B)
        min_err = int(errs.min())
        di, bi = np.nonzero(errs == min_err)
        cand_w = w_blk[di]
        cand_beta = betas[bi]
        # Tie-break: smallest |beta|, then lexicographically smallest w.
        keys = [cand_w[:, k] for k in range(cand_w.shape[1] - 1, -1, -1)]
        keys.append(np.abs(cand_beta))
        j = int(np.lexsort(keys)[0])
        key = (min_err, float(abs(cand_beta[j])), tuple(cand_w[j]))
        if best is None or key < best["key"]:
            best = {
                "key": key,
                "w": cand_w[j],
                "beta": float(cand_beta[j]),
                "angles": angles[lo + int(di[j])],
            }
    return best


def training_error(c: UnitClassifier, data: LabeledSet) -> int:
    """Number of points misclassified by ``c`` (``sgn(0) = +1``)."""
    if len(data) == 0:
        return 0
    if c.d != data.d:
        raise ValueError(f"dimension mismatch: classifier {c.d}, data {data.d}")
    return int(np.sum(c.predict(data.X) != data.y))
