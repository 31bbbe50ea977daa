"""End-to-end estimation of the linear utility model.

The active pipeline locates two label-balanced actions by trisection, learns a
normalized classifier at each with margin-based active learning, and undoes
the scale ambiguity by solving the two-action linear system.  The passive
baseline replaces the two active-learning runs with plain logistic fits that
label every incoming context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .environment import Environment, LinearUtility
from .erm import LabeledSet, UnitClassifier, fit_logistic
from .errors import BudgetExhaustedError, DegenerateReconstructionError
from .margin_al import MarginALConfig, epoch_row, margin_based_active_learning
from .records import RunRecord
from .trisection import TrisectionConfig, TrisectionResult, trisection_search

TRI_BUDGET_FRACTION = 1.0 / 3.0  # share of a label budget the trisection may spend


@dataclass(frozen=True)
class Overrides:
    """Explicit phase parameters, taking precedence over the derived defaults."""

    eps_s: float | None = None
    delta_s: float | None = None
    eps_a: float | None = None
    delta_a: float | None = None
    eps_0: float | None = None


@dataclass(frozen=True)
class MetaConfig:
    eps: float = 0.05
    delta: float = 0.1
    kappa_m: float = 1.0
    kappa_n: float | None = None  # None: derived from d, eps_a and delta
    kappa_eps: float | None = None  # None: 1/d
    beta_0: float | None = None  # None: 1/sqrt(d)
    overrides: Overrides | None = None
    label_budget: int | None = None  # fixed-budget protocol when set
    unlabeled_budget: int | None = None
    fit_mode: str = "logistic_surrogate"
    average_directions: bool = False  # exploratory; never used in benchmarks

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0) or not (0.0 < self.delta < 1.0):
            raise ValueError("eps and delta must lie in (0, 1)")
        if self.label_budget is not None and self.label_budget < 10:
            raise ValueError("label_budget must be >= 10")


@dataclass(frozen=True)
class ResolvedParams:
    eps_s: float
    delta_s: float
    eps_a: float
    delta_a: float
    eps_0: float
    kappa_m: float
    kappa_n: float
    beta_0: float


def resolve_params(cfg: MetaConfig, d: int) -> ResolvedParams:
    """Fill in the derived per-phase parameters for dimension ``d``."""
    ov = cfg.overrides or Overrides()
    kappa_eps = cfg.kappa_eps if cfg.kappa_eps is not None else 1.0 / d
    eps_a = ov.eps_a
    if eps_a is None:
        eps_a = kappa_eps * cfg.eps**2 / math.log(1.0 / cfg.eps) ** 2
    eps_0 = ov.eps_0 if ov.eps_0 is not None else math.sqrt(eps_a)
    eps_s = ov.eps_s
    if eps_s is None:
        if d < 2:
            raise ValueError("derived eps_s needs d >= 2; pass an override for d=1")
        eps_s = 0.1 / math.sqrt(d - 1)
    delta_s = ov.delta_s if ov.delta_s is not None else cfg.delta / 3.0
    delta_a = ov.delta_a if ov.delta_a is not None else cfg.delta / 3.0
    kappa_n = cfg.kappa_n
    if kappa_n is None:
        loglog = math.log(max(math.log(1.0 / eps_a), math.e))
        kappa_n = d + loglog + math.log(1.0 / cfg.delta)
    beta_0 = cfg.beta_0 if cfg.beta_0 is not None else 1.0 / math.sqrt(d)
    return ResolvedParams(
        eps_s, delta_s, min(eps_a, eps_0), delta_a, eps_0, cfg.kappa_m, kappa_n, beta_0
    )


def paper_sec5_config(
    d: int,
    label_budget: int | None = None,
    unlabeled_budget: int | None = None,
    eps_a: float | None = None,
) -> MetaConfig:
    """The benchmark parameterization: eps_s=0.5, delta_s=0.1, eps_0=0.2,
    kappa_m=1, kappa_n = d + ln(label budget), logistic surrogate fits."""
    n_for_kappa = label_budget if label_budget is not None else 10_000
    return MetaConfig(
        kappa_m=1.0,
        kappa_n=d + math.log(n_for_kappa),
        beta_0=1.0 / math.sqrt(d),
        overrides=Overrides(eps_s=0.5, delta_s=0.1, eps_0=0.2, eps_a=eps_a),
        label_budget=label_budget,
        unlabeled_budget=unlabeled_budget,
    )


def theorem1_config(
    d: int,
    label_budget: int | None = None,
    unlabeled_budget: int | None = None,
    eps: float = 0.05,
    delta: float = 0.1,
) -> MetaConfig:
    """Parameter scalings from the sample-complexity analysis: kappa_eps = 1/d,
    beta_0 = 1/sqrt(d), kappa_n = d + loglog(1/eps_a) + log(1/delta)."""
    return MetaConfig(
        eps=eps,
        delta=delta,
        kappa_m=1.0,
        label_budget=label_budget,
        unlabeled_budget=unlabeled_budget,
    )


PRESETS = {"paper-sec5": paper_sec5_config, "theorem1": theorem1_config}


@dataclass(frozen=True)
class UtilityEstimate:
    v_hat: LinearUtility
    alpha_hat: float
    b1: float
    b2: float
    classifiers: tuple[UnitClassifier, UnitClassifier]


def reconstruct(
    b1: float, b2: float, c1: UnitClassifier, c2: UnitClassifier
) -> UtilityEstimate:
    """Solve the two-action system for the utility scale and intercept.

    ``alpha = (b2 - b1) / (beta2 - beta1)``, ``w = alpha * w1``,
    ``mu = alpha * beta1 - b1``.
    """
    if b1 == b2:
        raise ValueError("reconstruction requires two distinct actions")
    denom = c2.beta - c1.beta
    if abs(denom) < 1e-12:
        raise DegenerateReconstructionError(
            "learned intercepts are indistinguishable "
            f"(|beta2 - beta1| = {abs(denom):.3g})"
        )
    alpha = (b2 - b1) / denom
    w = alpha * c1.w
    mu = alpha * c1.beta - b1
    return UtilityEstimate(LinearUtility(w, mu), alpha, b1, b2, (c1, c2))


def reconstruct_averaged(
    b1: float, b2: float, c1: UnitClassifier, c2: UnitClassifier
) -> UtilityEstimate:
    """Variant that averages the two learned directions before scaling.

    Exploratory only; the benchmark runs always use :func:`reconstruct`.
    """
    base = reconstruct(b1, b2, c1, c2)
    mixed = c1.w + c2.w
    norm = np.linalg.norm(mixed)
    if norm < 1e-12:
        return base
    w = base.alpha_hat * mixed / norm
    mu = 0.5 * (
        (base.alpha_hat * c1.beta - b1) + (base.alpha_hat * c2.beta - b2)
    )
    return UtilityEstimate(
        LinearUtility(w, mu), base.alpha_hat, b1, b2, (c1, c2)
    )


def estimation_error(est: UtilityEstimate, truth: LinearUtility) -> float:
    """Reported error: ``|w_hat - w*|_2 + |mu_hat - mu*|``."""
    if est.v_hat.d != truth.d:
        raise ValueError("dimension mismatch between estimate and truth")
    return float(
        np.linalg.norm(est.v_hat.w - truth.w) + abs(est.v_hat.mu - truth.mu)
    )


def run_active(env: Environment, cfg: MetaConfig) -> tuple[UtilityEstimate, RunRecord]:
    """Trisection, two margin-AL runs, reconstruction.

    With ``cfg.label_budget`` set, the fixed-budget protocol applies: the
    trisection may spend at most a third of the budget (a partial bracket is
    used if it runs out), and the epoch count of each active-learning run is
    the largest whose schedule fits half the remaining labels.
    """
    params = resolve_params(cfg, env.d)
    labels0, samples0 = env.labels_used, env.samples_seen

    tri = _run_trisection(env, cfg, params)
    labels_tri = env.labels_used - labels0

    if cfg.label_budget is not None:
        per_al = (cfg.label_budget - labels_tri) // 2
        eps_a_eff, k_0, kappa_n_eff = backsolve_eps_a(params, env.d, per_al)
    else:
        per_al = None
        eps_a_eff, k_0, kappa_n_eff = params.eps_a, None, params.kappa_n

    skip_pool = cfg.unlabeled_budget
    if k_0 == 0:
        # Budget too small for even one epoch: plain warm-up fit at each action.
        n_warm = max(2, min(per_al, math.ceil(params.kappa_n / params.eps_0**2)))
        c1 = _passive_fit(env, tri.b1, n_warm)
        labels_al1 = env.labels_used - labels0 - labels_tri
        c2 = _passive_fit(env, tri.b2, n_warm)
    else:
        al_cfg = MarginALConfig(
            eps_a=eps_a_eff,
            delta_a=params.delta_a,
            kappa_m=params.kappa_m,
            kappa_n=kappa_n_eff,
            eps_0=params.eps_0,
            beta_0=params.beta_0,
            unlabeled_budget=skip_pool,
            fit_mode=cfg.fit_mode,
        )
        pre_samples, pre_labels = env.samples_seen, env.labels_used
        c1, _ = margin_based_active_learning(env, tri.b1, al_cfg)
        labels_al1 = env.labels_used - labels0 - labels_tri
        if skip_pool is not None:
            skipped1 = (env.samples_seen - pre_samples) - (env.labels_used - pre_labels)
            al_cfg = MarginALConfig(
                eps_a=eps_a_eff,
                delta_a=params.delta_a,
                kappa_m=params.kappa_m,
                kappa_n=kappa_n_eff,
                eps_0=params.eps_0,
                beta_0=params.beta_0,
                unlabeled_budget=max(0, skip_pool - skipped1),
                fit_mode=cfg.fit_mode,
            )
        c2, _ = margin_based_active_learning(env, tri.b2, al_cfg)
    labels_al2 = env.labels_used - labels0 - labels_tri - labels_al1

    build = reconstruct_averaged if cfg.average_directions else reconstruct
    est = build(tri.b1, tri.b2, c1, c2)
    record = RunRecord(
        study="",
        algo="active",
        d=env.d,
        trial=0,
        seed=env.rng.seed,
        n_labeled=env.labels_used - labels0,
        m_total=env.samples_seen - samples0,
        rho_configured=None,
        err=estimation_error(est, env.truth),
        b1=tri.b1,
        b2=tri.b2,
        phase_labels=(labels_tri, labels_al1, labels_al2),
        wall_ms=0,
    )
    return est, record


def run_passive(
    env: Environment, cfg: MetaConfig, label_budget: int
) -> tuple[UtilityEstimate, RunRecord]:
    """Baseline: same trisection, then the remaining budget is split into two
    halves labeled without any filtering and fitted by logistic regression."""
    params = resolve_params(cfg, env.d)
    labels0, samples0 = env.labels_used, env.samples_seen

    tri = _run_trisection(env, cfg, params, budget=label_budget)
    labels_tri = env.labels_used - labels0
    remaining = label_budget - labels_tri
    if remaining < 4:
        raise BudgetExhaustedError(
            f"passive budget {label_budget} leaves only {remaining} labels "
            "after trisection",
            partial=tri,
        )
    n1 = remaining // 2
    n2 = remaining - n1
    c1 = _passive_fit(env, tri.b1, n1)
    labels_h1 = env.labels_used - labels0 - labels_tri
    c2 = _passive_fit(env, tri.b2, n2)
    labels_h2 = env.labels_used - labels0 - labels_tri - labels_h1

    est = reconstruct(tri.b1, tri.b2, c1, c2)
    record = RunRecord(
        study="",
        algo="passive",
        d=env.d,
        trial=0,
        seed=env.rng.seed,
        n_labeled=env.labels_used - labels0,
        m_total=env.samples_seen - samples0,
        rho_configured=None,
        err=estimation_error(est, env.truth),
        b1=tri.b1,
        b2=tri.b2,
        phase_labels=(labels_tri, labels_h1, labels_h2),
        wall_ms=0,
    )
    return est, record


def backsolve_eps_a(
    params: ResolvedParams, d: int, label_budget: int
) -> tuple[float, int, float]:
    """Fit the epoch schedule to a label budget.

    Picks the largest epoch count ``k0`` whose full schedule fits
    ``label_budget`` labels, then scales ``kappa_n`` up so the schedule
    consumes (almost exactly) the whole budget, leaving the per-epoch
    ``n_k = ceil(kappa_n*d/eps_k)`` structure intact.  Returns the effective
    excess-error target ``eps_0 * 2**-k0``, ``k0`` (0 when not even the
    warm-up plus one epoch fits) and the scaled ``kappa_n``.
    """
    n_0 = math.ceil(params.kappa_n / params.eps_0**2)
    total = n_0
    k = 0
    while k < 60:
        _, _, _, n_next = epoch_row(params.eps_0, params.kappa_m, params.kappa_n, d, k + 1)
        if total + n_next > label_budget:
            break
        total += n_next
        k += 1
    if k == 0:
        return params.eps_a, 0, params.kappa_n
    kappa_eff = params.kappa_n * label_budget / total
    while _schedule_total(kappa_eff, params.eps_0, params.kappa_m, d, k) > label_budget:
        kappa_eff *= 0.999  # ceil() rounding can overshoot by a few labels
    return params.eps_0 * 2.0**-k, k, kappa_eff


def _schedule_total(kappa_n: float, eps_0: float, kappa_m: float, d: int, k_0: int) -> int:
    total = math.ceil(kappa_n / eps_0**2)
    for k in range(1, k_0 + 1):
        total += epoch_row(eps_0, kappa_m, kappa_n, d, k)[3]
    return total


def _run_trisection(
    env: Environment, cfg: MetaConfig, params: ResolvedParams, budget: int | None = None
) -> TrisectionResult:
    label_budget = cfg.label_budget if budget is None else budget
    if label_budget is not None:
        cap = max(2, math.ceil(label_budget * TRI_BUDGET_FRACTION))
        tri_cfg = TrisectionConfig(
            params.eps_s, params.delta_s, b_bound=env.bound, max_labels=cap
        )
        try:
            return trisection_search(env, tri_cfg)
        except BudgetExhaustedError as exc:
            return exc.partial  # continue with the wide bracket
    tri_cfg = TrisectionConfig(params.eps_s, params.delta_s, b_bound=env.bound)
    return trisection_search(env, tri_cfg)


def _passive_fit(env: Environment, b: float, n: int) -> UnitClassifier:
    xs, ys = [], []
    left = n
    while left > 0:
        X = env.next_contexts(min(8192, left))
        ys.append(env.query_batch(X, b))
        xs.append(X)
        left -= X.shape[0]
    data = LabeledSet(
        np.concatenate(xs) if len(xs) > 1 else xs[0],
        np.concatenate(ys) if len(ys) > 1 else ys[0],
    )
    return fit_logistic(data)
