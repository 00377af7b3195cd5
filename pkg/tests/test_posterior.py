import math

import numpy as np
import pytest

from oracles import random_instance
from snhmm.hmm import ObservedSeries, forward_log_likelihood
from snhmm.posterior import (
    log_likelihood,
    log_likelihood_and_grad,
    log_posterior,
    log_posterior_and_grad,
)
from snhmm.priors import PriorConfig, log_prior
from snhmm.scenarios import two_state_scenario
from snhmm.skewnormal import inverse_mills
from snhmm.transforms import ParameterSpace


def richardson_grad(f, theta, h=1e-3):
    """Central differences with one Richardson extrapolation step."""
    dim = theta.size
    out = np.empty(dim)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        step = h * max(1.0, abs(theta[i]))

        def d(s):
            return (f(theta + s * e) - f(theta - s * e)) / (2 * s)

        out[i] = (4.0 * d(step / 2) - d(step)) / 3.0
    return out


class TestLikelihood:
    def test_matches_hmm_forward_on_model(self):
        space = ParameterSpace(2, 2)
        rng = np.random.default_rng(0)
        theta = rng.normal(0, 0.5, size=space.dim)
        values = rng.uniform(-3, 3, size=40)
        direct = forward_log_likelihood(
            space.to_model(theta), ObservedSeries(values=values)
        )
        assert log_likelihood(theta, values, space) == pytest.approx(direct, rel=1e-12)

    def test_posterior_is_sum_of_parts(self):
        space = ParameterSpace(2, 2)
        cfg = PriorConfig.default()
        rng = np.random.default_rng(1)
        theta = rng.normal(0, 0.5, size=space.dim)
        values = rng.uniform(-3, 3, size=25)
        total = log_posterior(theta, values, space, cfg)
        parts = log_prior(theta, space, cfg) + log_likelihood(theta, values, space)
        assert total == pytest.approx(parts, abs=1e-12)

    def test_shift_property(self):
        # shifting the data and the locations together changes the posterior
        # only through the prior's xi terms
        space = ParameterSpace(2, 2)
        cfg = PriorConfig.default()
        rng = np.random.default_rng(2)
        theta = rng.normal(0, 0.5, size=space.dim)
        values = rng.uniform(-3, 3, size=30)
        c = 1.7
        shifted = theta.copy()
        b = space._blocks()
        shifted[b["xi"]] += c
        lik0 = log_likelihood(theta, values, space)
        lik1 = log_likelihood(shifted, values + c, space)
        assert lik1 == pytest.approx(lik0, rel=1e-10)
        post_delta = log_posterior(shifted, values + c, space, cfg) - log_posterior(
            theta, values, space, cfg
        )
        xi0 = theta[b["xi"]]
        prior_delta = float(
            np.sum(-0.5 * ((xi0 + c) / cfg.xi_sd) ** 2 + 0.5 * (xi0 / cfg.xi_sd) ** 2)
        )
        assert post_delta == pytest.approx(prior_delta, abs=1e-9)

    def test_prior_only_mode(self):
        space = ParameterSpace(2, 2)
        cfg = PriorConfig.default()
        theta = np.zeros(space.dim)
        values = np.array([1.0, 2.0])
        assert log_posterior(theta, values, space, cfg, prior_only=True) == pytest.approx(
            log_prior(theta, space, cfg), rel=1e-14
        )


class TestGradient:
    def test_lambda_derivative_formula(self):
        # d log g / d lambda = u * phi(lambda u) / Phi(lambda u)
        space = ParameterSpace(2, 1)
        rng = np.random.default_rng(3)
        values = rng.uniform(-2, 2, size=1)
        theta = rng.normal(0, 0.4, size=space.dim)
        cfg = PriorConfig(lam_sd=1e9)  # flatten the prior so the data term shows
        val, grad = log_posterior_and_grad(theta, values, space, cfg)
        fd = richardson_grad(lambda t: log_posterior(t, values, space, cfg), theta, h=1e-4)
        b = space._blocks()
        for i in range(b["lam"].start, b["lam"].stop):
            assert grad[i] == pytest.approx(fd[i], rel=1e-6, abs=1e-9)

    def test_full_gradient_small_instances(self):
        rng = np.random.default_rng(4)
        cfg = PriorConfig.default()
        for z, k, t in ((2, 1, 5), (2, 2, 10), (3, 2, 7)):
            space = ParameterSpace(z, k)
            values = rng.uniform(-4, 4, size=t)
            theta = rng.normal(0, 0.8, size=space.dim)
            val, grad = log_posterior_and_grad(theta, values, space, cfg)
            fd = richardson_grad(lambda th: log_posterior(th, values, space, cfg), theta)
            err = np.abs(grad - fd) / np.maximum(1.0, np.abs(fd))
            assert err.max() < 1e-5, (z, k, t, err.max())

    def test_gradient_shared_weights(self):
        rng = np.random.default_rng(5)
        cfg = PriorConfig.default()
        space = ParameterSpace(2, 2, shared_weights=True)
        values = rng.uniform(-4, 4, size=20)
        theta = rng.normal(0, 0.7, size=space.dim)
        _, grad = log_posterior_and_grad(theta, values, space, cfg)
        fd = richardson_grad(lambda th: log_posterior(th, values, space, cfg), theta)
        err = np.abs(grad - fd) / np.maximum(1.0, np.abs(fd))
        assert err.max() < 1e-5

    def test_gradient_at_scenario_scale(self):
        sc = two_state_scenario()
        space = ParameterSpace(2, 2)
        cfg = PriorConfig.default()
        from snhmm.hmm import simulate

        series, _, _ = simulate(sc.model, 50, np.random.default_rng(6))
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(10):
            theta = rng.normal(0, 1.0, size=space.dim)
            _, grad = log_posterior_and_grad(theta, series.values, space, cfg)
            fd = richardson_grad(
                lambda th: log_posterior(th, series.values, space, cfg), theta
            )
            err = np.abs(grad - fd) / np.maximum(1.0, np.abs(fd))
            worst = max(worst, err.max())
        assert worst < 1e-5

    def test_likelihood_gradient_alone(self):
        rng = np.random.default_rng(8)
        space = ParameterSpace(2, 2)
        values = rng.uniform(-3, 3, size=15)
        theta = rng.normal(0, 0.6, size=space.dim)
        val, grad = log_likelihood_and_grad(theta, values, space)
        fd = richardson_grad(lambda th: log_likelihood(th, values, space), theta)
        err = np.abs(grad - fd) / np.maximum(1.0, np.abs(fd))
        assert err.max() < 1e-5
        assert val == pytest.approx(log_likelihood(theta, values, space), rel=1e-14)
