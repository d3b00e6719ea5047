import math

import numpy as np
import pytest

from fgdm.schedule import (
    NoiseSchedule,
    forward_from_noise,
    forward_marginal_stats,
    forward_sample,
    make_schedule,
    posterior_coefficients,
    posterior_from_noise,
    posterior_sample,
)


def cosine_alpha(t, T, s=0.008, floor=1e-5):
    # independent re-evaluation of the closed form used by make_schedule
    f = math.cos((t / T + s) / (1 + s) * math.pi / 2) ** 2
    f0 = math.cos(s / (1 + s) * math.pi / 2) ** 2
    return min(max(f / f0, floor), 1.0)


class TestMakeSchedule:
    def test_T1_shape_and_range(self):
        sched = make_schedule(1)
        assert sched.alpha.shape == (1,)
        assert 0 < sched.alpha[0] < 1

    def test_T8_strictly_decreasing(self):
        a = make_schedule(8).alpha
        assert np.all(np.diff(a) < 0)

    def test_closed_form_match(self):
        sched = make_schedule(8)
        # t=5 exercises the plain formula, t=8 the 1e-5 floor
        assert sched.alpha_at(5) == pytest.approx(cosine_alpha(5, 8), abs=1e-15)
        assert sched.alpha_at(8) == pytest.approx(1e-5, abs=0)

    def test_zero_T_rejected(self):
        with pytest.raises(ValueError):
            make_schedule(0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            make_schedule(4, kind="linear")

    def test_json_round_trip(self):
        sched = make_schedule(8)
        back = NoiseSchedule.from_json(sched.to_json())
        assert back.T == sched.T
        assert np.array_equal(back.alpha, sched.alpha)
        assert back.sigma2 == sched.sigma2

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            NoiseSchedule(T=2, alpha=np.array([0.5, 0.5]))  # not strictly decreasing
        with pytest.raises(ValueError):
            NoiseSchedule(T=1, alpha=np.array([1.5]))


class TestForwardMarginals:
    def test_identity_limit(self):
        sched = NoiseSchedule(T=1, alpha=np.array([1.0]))
        s0 = np.full((4, 4), 0.7)
        mean, var = forward_marginal_stats(s0, 1, sched)
        assert np.array_equal(mean, s0)
        assert var == 0.0

    def test_direct_substitution(self):
        sched = NoiseSchedule(T=1, alpha=np.array([0.25]), sigma2=1.0)
        mean, var = forward_marginal_stats(np.ones((3, 3)), 1, sched)
        assert np.allclose(mean, 0.5)
        assert var == pytest.approx(0.75)

    def test_out_of_range_t(self):
        sched = make_schedule(4)
        with pytest.raises(ValueError):
            forward_marginal_stats(np.zeros((4, 4)), 5, sched)
        with pytest.raises(ValueError):
            forward_marginal_stats(np.zeros((4, 4)), 0, sched)

    def test_monte_carlo_marginals(self):
        # 1e5 draws on a small grid: per-pixel mean and variance within
        # 3 standard errors of the analytic marginal
        sched = make_schedule(8)
        t = 4
        rng = np.random.default_rng(11)
        s0 = np.random.default_rng(5).random((4, 4))
        mean, var = forward_marginal_stats(s0, t, sched)
        n = 100_000
        total = np.zeros_like(s0)
        total_sq = np.zeros_like(s0)
        for _ in range(n):
            draw = forward_sample(s0, t, sched, rng)
            total += draw
            total_sq += draw * draw
        emp_mean = total / n
        emp_var = total_sq / n - emp_mean**2
        se_mean = np.sqrt(var / n)
        se_var = var * np.sqrt(2.0 / (n - 1))
        assert np.all(np.abs(emp_mean - mean) < 3 * se_mean)
        assert np.all(np.abs(emp_var - var) < 3 * se_var)


class TestForwardSample:
    def test_alpha_one_exact_identity(self):
        sched = NoiseSchedule(T=1, alpha=np.array([1.0]))
        s0 = np.random.default_rng(0).random((8, 8))
        out = forward_sample(s0, 1, sched, np.random.default_rng(1))
        assert np.array_equal(out, s0)

    def test_alpha_zero_limit_pure_noise(self):
        # alpha ~ 0: the output is essentially the noise field
        sched = NoiseSchedule(T=1, alpha=np.array([1e-18]))
        s0 = np.random.default_rng(2).random((256, 256))
        out = forward_sample(s0, 1, sched, np.random.default_rng(3))
        assert abs(out.mean()) < 3.0 / 256

    def test_same_seed_bit_identical(self):
        sched = make_schedule(8)
        s0 = np.random.default_rng(4).random((16, 16))
        a = forward_sample(s0, 3, sched, np.random.default_rng(42))
        b = forward_sample(s0, 3, sched, np.random.default_rng(42))
        assert np.array_equal(a, b)


class TestPosterior:
    def test_t1_returns_clean_estimate(self):
        sched = make_schedule(8)
        s0_hat = np.random.default_rng(0).random((8, 8))
        s_t = np.random.default_rng(1).random((8, 8))
        out = posterior_sample(s_t, s0_hat, 1, sched, np.random.default_rng(2))
        assert np.array_equal(out, s0_hat)

    def test_degenerate_no_noise_limit(self):
        # alpha_{t-1} -> alpha_t: the step collapses onto the current state
        # (variance ~2e-12, so the sampled residual is of order 1e-6)
        sched = NoiseSchedule(T=2, alpha=np.array([0.5, 0.5 - 1e-12]))
        state = np.random.default_rng(3).random((6, 6))
        coef_clean, coef_state, var = posterior_coefficients(2, sched)
        assert var == pytest.approx(0.0, abs=1e-11)
        assert coef_clean == pytest.approx(0.0, abs=1e-11)
        assert coef_state == pytest.approx(1.0, abs=1e-11)
        out = posterior_sample(state, state, 2, sched, np.random.default_rng(4))
        assert np.allclose(out, state, atol=1e-5)

    def test_out_of_range_t(self):
        sched = make_schedule(4)
        img = np.zeros((4, 4))
        with pytest.raises(ValueError):
            posterior_sample(img, img, 0, sched, np.random.default_rng(0))
        with pytest.raises(ValueError):
            posterior_sample(img, img, 5, sched, np.random.default_rng(0))

    def test_chain_with_oracle_recovers_exactly(self):
        # forward to t = T, then posterior steps feeding the true clean
        # image: the final t = 1 step returns it exactly
        sched = make_schedule(8)
        rng = np.random.default_rng(9)
        s0 = np.random.default_rng(10).random((16, 16))
        state = forward_sample(s0, sched.T, sched, rng)
        for t in range(sched.T, 0, -1):
            state = posterior_sample(state, s0, t, sched, rng)
        assert np.array_equal(state, s0)

    def test_noiseless_consistency_identity(self):
        # With s0_hat = c and s_t = sqrt(alpha_t) * c the posterior mean is
        # exactly sqrt(alpha_{t-1}) * c, i.e.
        # coef_clean + coef_state * sqrt(alpha_t) == sqrt(alpha_{t-1}).
        sched = make_schedule(8)
        for t in range(2, sched.T + 1):
            coef_clean, coef_state, _ = posterior_coefficients(t, sched)
            lhs = coef_clean + coef_state * math.sqrt(sched.alpha_at(t))
            assert lhs == pytest.approx(math.sqrt(sched.alpha_at(t - 1)), abs=1e-10)

    def test_posterior_from_noise_matches_sample(self):
        sched = make_schedule(8)
        s_t = np.random.default_rng(0).random((8, 8))
        s0_hat = np.random.default_rng(1).random((8, 8))
        z = np.random.default_rng(7).normal(size=(8, 8))
        manual = posterior_from_noise(s_t, s0_hat, 5, sched, z)
        rng = np.random.default_rng(7)
        sampled = posterior_sample(s_t, s0_hat, 5, sched, rng)
        assert np.array_equal(manual, sampled)


class TestMarginalConsistencyInvariant:
    def test_mean_variance_convergence(self):
        # N = 1e4 draws, 4-standard-error tolerance, pooled over pixels
        sched = make_schedule(8)
        t = 6
        s0 = np.random.default_rng(21).random((8, 8))
        mean, var = forward_marginal_stats(s0, t, sched)
        rng = np.random.default_rng(22)
        n = 10_000
        draws = np.stack([forward_sample(s0, t, sched, rng) for _ in range(n)])
        emp_mean = draws.mean(axis=0)
        emp_var = draws.var(axis=0)
        assert np.all(np.abs(emp_mean - mean) < 4 * np.sqrt(var / n))
        assert np.all(np.abs(emp_var - var) < 4 * var * np.sqrt(2.0 / (n - 1)))


def test_forward_from_noise_is_linear_combination():
    sched = make_schedule(8)
    s0 = np.random.default_rng(1).random((8, 8))
    z = np.random.default_rng(2).normal(size=(8, 8))
    t = 3
    a = sched.alpha_at(t)
    expected = np.sqrt(a) * s0 + np.sqrt(1 - a) * z
    assert np.array_equal(forward_from_noise(s0, t, sched, z), expected)
