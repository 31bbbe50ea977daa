import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxsearch.environment import (
    ContextDistribution,
    Environment,
    FeedbackSample,
    LinearUtility,
    NoiseDistribution,
    make_environment,
    benchmark_truth,
)
from ctxsearch.erm import UnitClassifier
from ctxsearch.errors import LabelCapExceeded
from ctxsearch.mathstats import RngStream


def env_d2(seed=0, stream=0, **kw):
    return make_environment(2, RngStream(seed, stream), **kw)


class TestLinearUtility:
    def test_value(self):
        u = LinearUtility(np.array([1.0, -2.0]), 0.5)
        assert u.value(np.array([1.0, 1.0])) == pytest.approx(-1.5)
        batch = u.value(np.array([[1.0, 1.0], [0.0, 0.0]]))
        assert batch == pytest.approx([-1.5, -0.5])

    def test_bound_check(self):
        with pytest.raises(ValueError):
            LinearUtility(np.array([10.0, 0.0]), 0.0).check_bound(5.0)
        with pytest.raises(ValueError):
            LinearUtility(np.array([1.0]), -7.0).check_bound(5.0)
        benchmark_truth(4).check_bound(5.0)

    def test_benchmark_truth(self):
        t = benchmark_truth(9)
        assert np.linalg.norm(t.w) == pytest.approx(2.0)
        assert t.mu == -2.5


class TestNoiseDistribution:
    def test_uniform_phi_values(self):
        n = NoiseDistribution.uniform(1.0)
        assert n.phi(0.0) == 0.0
        assert n.phi(0.5) == pytest.approx(0.25)
        assert n.phi(2.0) == pytest.approx(0.5)  # saturated beyond support
        assert n.phi(-0.5) == pytest.approx(-0.25)

    @pytest.mark.parametrize(
        "noise",
        [
            NoiseDistribution.uniform(1.0),
            NoiseDistribution.logistic(0.7),
            NoiseDistribution.gaussian(1.3),
        ],
    )
    def test_median_zero(self, noise):
        assert noise.cdf(0.0) == pytest.approx(0.5)

    @given(delta=st.floats(-3, 3, allow_nan=False))
    @settings(max_examples=60, deadline=None)
    def test_phi_sign(self, delta):
        n = NoiseDistribution.logistic(1.0)
        assert math.copysign(1.0, n.phi(delta)) == math.copysign(1.0, delta) or n.phi(
            delta
        ) == 0.0

    def test_density_bounds(self):
        assert NoiseDistribution.uniform(1.0).density_bounds is None
        assert NoiseDistribution.uniform(2.5).density_bounds == (0.2, 0.2)
        lo, hi = NoiseDistribution.logistic(1.0).density_bounds
        assert 0 < lo < hi == pytest.approx(0.25)
        lo, hi = NoiseDistribution.gaussian(1.0).density_bounds
        assert hi == pytest.approx(1.0 / math.sqrt(2 * math.pi))
        assert lo == pytest.approx(hi * math.exp(-2.0))

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            NoiseDistribution("cauchy", 1.0)
        with pytest.raises(ValueError):
            NoiseDistribution.uniform(0.0)


class TestContextDistribution:
    def test_uniform_support(self):
        x = ContextDistribution(3).sample(RngStream(1).generator, 4000)
        assert np.all(np.linalg.norm(x, axis=1) <= 1.0 + 1e-12)

    def test_tilted_bounds_and_bias(self):
        dist = ContextDistribution.tilted_from_bounds(2, c_x=0.6, C_x=1.4)
        lo, hi = dist.density_ratio_bounds
        assert 0.6 <= lo <= 1.0 <= hi <= 1.4
        x = dist.sample(RngStream(2).generator, 200_000)
        assert np.all(np.linalg.norm(x, axis=1) <= 1.0 + 1e-12)
        # Tilt 0.4 shifts E[x_1] to 0.4 * E[x_1^2] = 0.4/(d+2) = 0.1.
        assert float(x[:, 0].mean()) == pytest.approx(0.1, abs=0.01)

    def test_validation(self):
        with pytest.raises(ValueError):
            ContextDistribution(0)
        with pytest.raises(ValueError):
            ContextDistribution(2, "density_tilted", tilt=1.5)


class TestFeedbackSample:
    def test_label_domain(self):
        FeedbackSample(np.zeros(2), 0.0, 1)
        with pytest.raises(ValueError):
            FeedbackSample(np.zeros(2), 0.0, 0)


class TestEnvironmentProtocol:
    def test_next_context_counts_and_support(self):
        env = make_environment(3, RngStream(3))
        x = env.next_context()
        assert np.linalg.norm(x) <= 1.0 + 1e-12
        assert env.samples_seen == 1 and env.labels_used == 0

    def test_determinism_across_fresh_environments(self):
        a = env_d2(seed=4).next_context()
        b = env_d2(seed=4).next_context()
        assert np.array_equal(a, b)

    def test_first_coordinate_balanced(self):
        env = env_d2(seed=5)
        X = env.next_contexts(1_000_000)
        assert float(np.mean(X[:, 0] >= 0)) == pytest.approx(0.5, abs=0.002)

    def test_query_deterministic_margins(self):
        # margin 2.5 exceeds the noise half-width 1, so labels are certain
        env = env_d2(seed=6)
        x = np.zeros(2)  # value(x) = 2.5
        assert all(env.query(x, 0.0) == 1 for _ in range(64))
        assert all(env.query(x, 5.0) == -1 for _ in range(64))

    def test_query_balanced_at_value(self):
        env = env_d2(seed=7)
        X = np.zeros((100_000, 2))
        y = env.query_batch(X, 2.5)
        assert float(np.mean(y == 1)) == pytest.approx(0.5, abs=0.01)

    def test_query_frequency_matches_eta(self):
        env = env_d2(seed=8)
        x = env.next_context()
        for b in (2.0, 2.5, 3.0):
            n = 40_000
            y = env.query_batch(np.tile(x, (n, 1)), b)
            p_hat = float(np.mean(y == 1))
            eta = env.eta(x, b)
            sigma = math.sqrt(max(eta * (1 - eta), 1e-12) / n)
            assert abs(p_hat - eta) <= 3 * sigma + 1e-9

    def test_counter_discipline(self):
        env = env_d2(seed=9)
        env.next_contexts(5)
        assert (env.samples_seen, env.labels_used) == (5, 0)
        env.query_batch(np.zeros((3, 2)), 0.0)
        assert (env.samples_seen, env.labels_used) == (5, 3)
        env.win_rate(2.5, 1000)
        env.excess_error(UnitClassifier(np.array([1.0, 0.0]), 0.0), 2.5, 1000)
        assert (env.samples_seen, env.labels_used) == (5, 3)

    def test_label_cap(self):
        env = env_d2(seed=10, label_cap=2)
        env.query(np.zeros(2), 0.0)
        env.query(np.zeros(2), 0.0)
        with pytest.raises(LabelCapExceeded):
            env.query(np.zeros(2), 0.0)

    def test_batch_matches_scalar_consumption(self):
        a = env_d2(seed=11)
        xs = [a.next_context() for _ in range(7)]
        b = env_d2(seed=11)
        X = b.next_contexts(7)
        assert np.allclose(np.stack(xs), X)
        ya = [env_d2(seed=12).query(np.zeros(2), 2.5) for _ in range(1)]
        env = env_d2(seed=12)
        yb = env.query_batch(np.zeros((1, 2)), 2.5)
        assert ya[0] == yb[0]

    def test_multichunk_batch_matches_scalar_consumption(self):
        # A take spanning several refill chunks must deliver exactly the
        # sequence a one-at-a-time consumer would see.
        n = 10_000
        a = env_d2(seed=26)
        xs = np.stack([a.next_context() for _ in range(n)])
        b = env_d2(seed=26)
        X = b.next_contexts(n)
        assert np.array_equal(xs, X)
        env = env_d2(seed=27)
        y_scalar = np.array([env.query(np.zeros(2), 2.5) for _ in range(n)])
        env2 = env_d2(seed=27)
        y_batch = env2.query_batch(np.zeros((n, 2)), 2.5)
        assert np.array_equal(y_scalar, y_batch)


class TestEtaPhi:
    def test_eta_examples(self):
        env = env_d2(seed=13)
        x = np.zeros(2)  # value 2.5
        assert env.eta(x, 2.5) == pytest.approx(0.5)
        assert env.eta(x, 2.0) == pytest.approx(0.75)  # margin 0.5 under U[-1,1]
        assert env.eta(x, -7.5) == pytest.approx(1.0)  # saturated margin 10

    def test_eta_sandwich_with_density_bounds(self):
        noise = NoiseDistribution.logistic(1.0)
        env = make_environment(2, RngStream(14), noise=noise)
        c_lo, c_hi = noise.density_bounds
        gen = RngStream(15).generator
        for _ in range(200):
            x = env.contexts.sample(gen, 1)[0]
            b = float(gen.uniform(1.0, 4.0))
            margin = env.truth.value(x) - b
            dev = abs(env.eta(x, b) - 0.5)
            assert dev <= c_hi * abs(margin) + 1e-12
            if abs(margin) <= 2.0:
                assert dev >= c_lo * abs(margin) - 1e-12


class TestWinRate:
    def test_always_win_limit(self):
        env = env_d2(seed=16)
        assert env.win_rate(-1e6, 1000) == 1.0

    def test_balanced_at_2p5(self):
        env = env_d2(seed=17)
        assert env.win_rate(2.5, 1_000_000) == pytest.approx(0.5, abs=0.002)

    def test_monotone_in_b(self):
        env = env_d2(seed=18)
        n = 200_000
        rates = [env.win_rate(b, n) for b in (1.0, 1.8, 2.5, 3.2, 4.0)]
        sigma = 3.0 / math.sqrt(n)
        for lo, hi in zip(rates[1:], rates[:-1]):
            assert lo <= hi + sigma

    def test_deviation_bounds_near_root(self):
        # With a noise family carrying honest density bounds, the win-rate
        # deviation from 1/2 is sandwiched linearly in |b - b0| (b0 = 2.5).
        noise = NoiseDistribution.gaussian(1.0)
        env = make_environment(2, RngStream(19), noise=noise)
        c_lo, c_hi = noise.density_bounds
        n = 400_000
        tol = 3.0 / math.sqrt(n)
        for b in (2.0, 2.25, 2.75, 3.0):
            dev = abs(env.win_rate(b, n) - 0.5)
            assert dev <= c_hi * abs(b - 2.5) + tol
            assert dev >= 0.07 * 1.0 * c_lo * abs(b - 2.5) - tol


class TestExcessError:
    def bayes(self, env, b):
        w = env.truth.w
        alpha = np.linalg.norm(w)
        return UnitClassifier(w / alpha, (env.truth.mu + b) / alpha)

    def test_bayes_is_zero_exactly(self):
        env = env_d2(seed=20)
        for b in (2.0, 2.5, 3.3):
            assert env.excess_error(self.bayes(env, b), b, 50_000) == 0.0

    def test_flipped_matches_brute_force_oracle(self):
        env = env_d2(seed=21)
        b = 2.5
        bayes = self.bayes(env, b)
        flipped = UnitClassifier(-bayes.w, -bayes.beta)
        got = env.excess_error(flipped, b, 1_000_000)

        # Independent oracle: sample contexts AND noise, difference of raw
        # 0/1 errors between candidate and the Bayes rule.
        rng = RngStream(22)
        X = env.contexts.sample(rng.child("x").generator, 1_000_000)
        xi = env.noise.sample(rng.child("xi").generator, 1_000_000)
        y = np.where(env.truth.value(X) + xi - b >= 0, 1, -1)
        err_c = np.mean(flipped.predict(X) != y)
        err_b = np.mean(bayes.predict(X) != y)
        assert got == pytest.approx(float(err_c - err_b), abs=5e-3)

        # And the closed-form value for the maximal-disagreement candidate.
        direct = float(2.0 * np.mean(np.abs(env.phi(env.truth.value(X) - b))))
        assert got == pytest.approx(direct, abs=5e-3)

    def test_nonnegative(self):
        env = env_d2(seed=23)
        gen = RngStream(24).generator
        for _ in range(10):
            w = gen.standard_normal(2)
            w /= np.linalg.norm(w)
            cand = UnitClassifier(w, float(gen.uniform(-0.5, 0.5)))
            assert env.excess_error(cand, 2.5, 20_000) >= 0.0
