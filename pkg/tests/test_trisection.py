import numpy as np
import pytest

from ctxsearch.environment import LinearUtility, make_environment
from ctxsearch.errors import BudgetExhaustedError
from ctxsearch.mathstats import RngStream
from ctxsearch.trisection import TrisectionConfig, TrisectionResult, trisection_search

BENCH = dict(eps_s=0.5, delta_s=0.1, b_bound=5.0)


def run_once(seed, trial, cfg=None, **env_kw):
    env = make_environment(2, RngStream(seed, trial), **env_kw)
    return trisection_search(env, cfg or TrisectionConfig(**BENCH)), env


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrisectionConfig(eps_s=0.0, delta_s=0.1)
        with pytest.raises(ValueError):
            TrisectionConfig(eps_s=11.0, delta_s=0.1, b_bound=5.0)
        with pytest.raises(ValueError):
            TrisectionConfig(eps_s=0.5, delta_s=1.0)
        with pytest.raises(ValueError):
            TrisectionConfig(eps_s=0.5, delta_s=0.1, max_labels=1)

    def test_result_invariants(self):
        with pytest.raises(ValueError):
            TrisectionResult(1.0, 0.0, 0, 0, 0)


class TestSearch:
    def test_bracket_and_width(self):
        hits = 0
        for trial in range(30):
            res, env = run_once(100, trial)
            assert res.width <= 0.5 + 1e-12
            assert -5.0 <= res.b1 < res.b2 <= 5.0
            hits += res.contains(2.5)
        assert hits >= 26  # nominal coverage is ~1 - delta_s

    def test_width_contraction_identity(self):
        # Each outer iteration multiplies the width by exactly 2/3.
        res, _ = run_once(101, 0)
        assert res.width == pytest.approx(10.0 * (2.0 / 3.0) ** res.iterations, rel=1e-9)

    def test_counter_accounting(self):
        res, env = run_once(102, 0)
        assert res.labels_used == res.samples_seen == env.labels_used
        assert res.labels_used % 2 == 0  # one query pair per inner iteration

    def test_determinism(self):
        r1, _ = run_once(103, 7)
        r2, _ = run_once(103, 7)
        assert (r1.b1, r1.b2, r1.labels_used) == (r2.b1, r2.b2, r2.labels_used)

    def test_context_free_root(self):
        # Degenerate utility w*=0: the positive-label rate is 1/2+phi(2.5-b)
        # exactly, root at 2.5.
        truth = LinearUtility(np.zeros(2), -2.5)
        hits = 0
        for trial in range(100):
            res, _ = run_once(104, trial, truth=truth)
            hits += res.contains(2.5)
            assert res.width <= 0.5 + 1e-12
        assert hits >= 87  # 1 - delta_s nominal, small-sample slack

    def test_labels_grow_as_eps_shrinks(self):
        med = {}
        for eps_s in (0.5, 0.25):
            med[eps_s] = np.median(
                [
                    run_once(105, t, TrisectionConfig(eps_s=eps_s, delta_s=0.1))[
                        0
                    ].labels_used
                    for t in range(5)
                ]
            )
        assert med[0.25] > med[0.5]

    def test_budget_exhaustion_carries_partial(self):
        env = make_environment(2, RngStream(106, 0))
        cfg = TrisectionConfig(eps_s=0.5, delta_s=0.1, max_labels=100)
        with pytest.raises(BudgetExhaustedError) as exc_info:
            trisection_search(env, cfg)
        partial = exc_info.value.partial
        assert isinstance(partial, TrisectionResult)
        assert partial.b1 < partial.b2
        assert partial.labels_used <= 100
        assert partial.width > 0.5  # stopped early, bracket still wide

    def test_anytime_interval_validity(self):
        # Instrumented replay: at every inner step the Hoeffding interval for
        # each interior point should contain that point's true label rate
        # (up to Monte-Carlo error of the rate oracle).  Nominal failure
        # probability per run is delta_s; these seeds have zero violations.
        from ctxsearch.mathstats import hoeffding_interval

        covered_runs = 0
        for seed in (600, 601, 602, 603, 604, 605):
            env = make_environment(2, RngStream(seed))
            cfg = TrisectionConfig(eps_s=1.0, delta_s=0.1, b_bound=5.0)
            b1, b2 = -cfg.b_bound, cfg.b_bound
            n = 0
            violations = 0
            while b2 - b1 > cfg.eps_s:
                b3 = b1 + (b2 - b1) / 3.0
                b4 = b2 - (b2 - b1) / 3.0
                rate3 = env.win_rate(b3, 200_000)
                rate4 = env.win_rate(b4, 200_000)
                mc_slack = 3.0 / np.sqrt(200_000)
                n_hat = r3 = r4 = 0
                while True:
                    y3 = env.query(env.next_context(), b3)
                    y4 = env.query(env.next_context(), b4)
                    n += 1
                    n_hat += 1
                    r3 += y3 == 1
                    r4 += y4 == 1
                    ci3 = hoeffding_interval(r3, n_hat, n, cfg.delta_s)
                    ci4 = hoeffding_interval(r4, n_hat, n, cfg.delta_s)
                    if not (ci3.lower - mc_slack <= rate3 <= ci3.upper + mc_slack):
                        violations += 1
                    if not (ci4.lower - mc_slack <= rate4 <= ci4.upper + mc_slack):
                        violations += 1
                    if not (ci3.contains(0.5) and ci4.contains(0.5)):
                        break
                if ci3.lower > 0.5 or ci4.lower > 0.5:
                    b1 = b3
                else:
                    b2 = b4
            covered_runs += violations == 0
        assert covered_runs >= 5

    def test_matches_scalar_reference(self):
        # Independent oracle: the same search written as a plain one-pair-at-
        # a-time loop over the scalar environment operations.  The block-
        # processing implementation must reproduce it exactly.
        import math

        from ctxsearch.mathstats import hoeffding_interval

        def scalar_trisection(env, cfg):
            b1, b2 = -cfg.b_bound, cfg.b_bound
            n = 0
            iterations = 0
            while b2 - b1 > cfg.eps_s:
                b3 = b1 + (b2 - b1) / 3.0
                b4 = b2 - (b2 - b1) / 3.0
                n_hat = r3 = r4 = 0
                while True:
                    x = env.next_context()
                    y3 = env.query(x, b3)
                    x2 = env.next_context()
                    y4 = env.query(x2, b4)
                    n += 1
                    n_hat += 1
                    r3 += y3 == 1
                    r4 += y4 == 1
                    ci3 = hoeffding_interval(r3, n_hat, n, cfg.delta_s)
                    ci4 = hoeffding_interval(r4, n_hat, n, cfg.delta_s)
                    if not (ci3.contains(0.5) and ci4.contains(0.5)):
                        break
                if ci3.lower > 0.5 or ci4.lower > 0.5:
                    b1 = b3
                else:
                    b2 = b4
                iterations += 1
            return b1, b2, env.labels_used, iterations

        for seed in (500, 501, 502):
            cfg = TrisectionConfig(eps_s=1.0, delta_s=0.2, b_bound=5.0)
            env_ref = make_environment(2, RngStream(seed))
            ref = scalar_trisection(env_ref, cfg)
            env_vec = make_environment(2, RngStream(seed))
            got = trisection_search(env_vec, cfg)
            assert math.isclose(got.b1, ref[0], rel_tol=0, abs_tol=0)
            assert math.isclose(got.b2, ref[1], rel_tol=0, abs_tol=0)
            assert got.labels_used == ref[2]
            assert got.iterations == ref[3]
