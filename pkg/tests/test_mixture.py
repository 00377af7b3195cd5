import math

import numpy as np
import pytest
from scipy import integrate

from snhmm.errors import ConfigurationError
from snhmm.mixture import (
    MixtureEmission,
    component_responsibilities,
    mixture_log_density,
    sample_mixture,
)
from snhmm.skewnormal import SkewNormalParams, log_pdf, moments

SQRT_2PI = math.sqrt(2.0 * math.pi)


def table_state1() -> MixtureEmission:
    return MixtureEmission(
        weights=np.array([0.9048, 0.0951]),
        components=(
            SkewNormalParams(5.6328, math.sqrt(0.9526), 0.9777),
            SkewNormalParams(4.8938, math.sqrt(0.9686), -0.8351),
        ),
    )


class TestConstruction:
    def test_near_one_weights_renormalized(self):
        e = table_state1()
        assert e.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_far_off_weights_rejected(self):
        with pytest.raises(ConfigurationError):
            MixtureEmission(
                weights=np.array([0.5, 0.4]),
                components=(SkewNormalParams(0, 1, 0), SkewNormalParams(1, 1, 0)),
            )

    def test_negative_weights_rejected(self):
        with pytest.raises(ConfigurationError):
            MixtureEmission(
                weights=np.array([1.2, -0.2]),
                components=(SkewNormalParams(0, 1, 0), SkewNormalParams(1, 1, 0)),
            )

    def test_component_count_mismatch_rejected(self):
        with pytest.raises(ConfigurationError):
            MixtureEmission(weights=np.array([1.0]), components=())

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            MixtureEmission(weights=np.array([]), components=())


class TestLogDensity:
    def test_single_component_degenerate(self):
        e = MixtureEmission(weights=np.array([1.0]), components=(SkewNormalParams(0, 1, 0),))
        assert mixture_log_density(e, 0.0) == pytest.approx(-math.log(SQRT_2PI), rel=1e-14)

    def test_identical_components_collapse(self):
        c = SkewNormalParams(1.0, 2.0, -0.7)
        e = MixtureEmission(weights=np.array([0.5, 0.5]), components=(c, c))
        for y in (-3.0, 0.0, 4.2):
            assert mixture_log_density(e, y) == pytest.approx(log_pdf(c, y), rel=1e-13)

    def test_table_state1_against_high_precision(self):
        # mpmath (50 dps) direct non-log summation
        e = table_state1()
        assert mixture_log_density(e, 6.0) == pytest.approx(-0.7971026513886746, rel=1e-13)
        assert mixture_log_density(e, 2.0) == pytest.approx(-6.892302330185069, rel=1e-13)

    def test_integrates_to_one(self):
        rng = np.random.default_rng(77)
        for k in (1, 2, 3):
            weights = rng.dirichlet(np.ones(k))
            comps = tuple(
                SkewNormalParams(rng.uniform(-4, 4), rng.uniform(0.3, 3), rng.uniform(-4, 4))
                for _ in range(k)
            )
            e = MixtureEmission(weights=weights, components=comps)
            cuts = [-np.inf] + sorted(c.xi for c in comps) + [np.inf]
            total = sum(
                integrate.quad(
                    lambda y: math.exp(mixture_log_density(e, y)), a, b, limit=300
                )[0]
                for a, b in zip(cuts[:-1], cuts[1:])
            )
            assert total == pytest.approx(1.0, abs=1e-8)

    def test_permutation_invariant(self):
        e = table_state1()
        swapped = MixtureEmission(
            weights=e.weights[::-1].copy(), components=e.components[::-1]
        )
        for y in np.linspace(0, 12, 25):
            assert mixture_log_density(e, y) == pytest.approx(
                mixture_log_density(swapped, y), abs=1e-12
            )

    def test_vectorized_matches_scalar(self):
        e = table_state1()
        ys = np.linspace(2, 9, 13)
        vec = mixture_log_density(e, ys)
        assert vec.shape == ys.shape
        for y, v in zip(ys, vec):
            assert v == pytest.approx(mixture_log_density(e, float(y)), rel=1e-14)


class TestResponsibilities:
    def test_identical_components_return_weights(self):
        c = SkewNormalParams(0, 1, 0)
        e = MixtureEmission(weights=np.array([0.3, 0.7]), components=(c, c))
        for y in (-2.0, 0.0, 3.0):
            assert component_responsibilities(e, y) == pytest.approx([0.3, 0.7], abs=1e-14)

    def test_single_component(self):
        e = MixtureEmission(weights=np.array([1.0]), components=(SkewNormalParams(0, 1, 0),))
        assert component_responsibilities(e, 1.3) == pytest.approx([1.0])

    def test_well_separated_components(self):
        e = MixtureEmission(
            weights=np.array([0.5, 0.5]),
            components=(SkewNormalParams(0, 0.5, 0), SkewNormalParams(20, 0.5, 0)),
        )
        r = component_responsibilities(e, 0.0)
        assert r[0] >= 0.99
        # direct density ratio oracle
        w0 = 0.5 * math.exp(log_pdf(e.components[0], 0.0))
        w1 = 0.5 * math.exp(log_pdf(e.components[1], 0.0))
        assert r[0] == pytest.approx(w0 / (w0 + w1), rel=1e-12)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(4)
        e = table_state1()
        for _ in range(50):
            r = component_responsibilities(e, rng.uniform(-5, 15))
            assert r.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(r >= 0)

    def test_underflow_falls_back_to_uniform(self):
        e = MixtureEmission(
            weights=np.array([0.4, 0.6]),
            components=(SkewNormalParams(0, 1e-300, 0), SkewNormalParams(1, 1e-300, 0)),
        )
        with pytest.warns(RuntimeWarning):
            r = component_responsibilities(e, 1e6)
        assert r == pytest.approx([0.5, 0.5])


class TestSampleMixture:
    def test_degenerate_weight_always_first(self):
        e = MixtureEmission(
            weights=np.array([1.0, 0.0]),
            components=(SkewNormalParams(0, 1, 0), SkewNormalParams(50, 1, 0)),
        )
        rng = np.random.default_rng(0)
        for _ in range(200):
            _, k = sample_mixture(e, rng)
            assert k == 0

    def test_balanced_weights_frequency(self):
        c = SkewNormalParams(0, 1, 0)
        e = MixtureEmission(weights=np.array([0.5, 0.5]), components=(c, c))
        rng = np.random.default_rng(6)
        n = 100_000
        ks = np.array([sample_mixture(e, rng)[1] for k in range(n)])
        se = math.sqrt(0.25 / n)
        assert abs(ks.mean() - 0.5) < 4 * se

    def test_table_state1_mean(self):
        e = table_state1()
        analytic = sum(
            w * moments(c)[0] for w, c in zip(e.weights, e.components)
        )
        rng = np.random.default_rng(13)
        n = 200_000
        draws = np.array([sample_mixture(e, rng)[0] for _ in range(n)])
        se = draws.std(ddof=1) / math.sqrt(n)
        assert abs(draws.mean() - analytic) < 4 * se
