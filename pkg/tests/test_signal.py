"""Bayes updates, entropies and mutual information for discrete signals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from infodyn.errors import InvalidParameter, ZeroMarginal
from infodyn.signal import (
    NoiseDensity,
    Observation,
    SignalModel,
    entropy_change,
    marginal_density,
    mean_entropy_change,
    mutual_information,
    mutual_information_bits,
    noise_entropy,
    noise_entropy_quadrature,
    observation_entropy,
    posterior,
    posterior_mean,
    posterior_sequence,
    sample_observation,
    sample_observations,
    shannon_entropy,
)

LN2 = math.log(2.0)


def scipy_density(noise):
    """Reference densities from scipy.stats, independent of NoiseDensity."""
    if noise.kind == "gaussian":
        return stats.norm(scale=noise.scale)
    if noise.kind == "uniform":
        return stats.uniform(loc=-noise.scale, scale=2 * noise.scale)
    return stats.laplace(scale=noise.scale)


def grid_posterior(values, prior, sigma, xi, half=0.5e-6):
    """Bayes by integrating the gaussian likelihood over a tiny window around xi."""
    f = [stats.norm.cdf(xi + half, x, sigma) - stats.norm.cdf(xi - half, x, sigma) for x in values]
    w = np.asarray(prior) * np.asarray(f)
    return w / w.sum()


def riemann_mixture_entropy(values, prior, sigma, n=400_001):
    lo, hi = min(values) - 12 * sigma, max(values) + 12 * sigma
    y = np.linspace(lo, hi, n)
    dens = sum(p * stats.norm.pdf(y, x, sigma) for x, p in zip(values, prior))
    integrand = np.where(dens > 0, -dens * np.log(np.where(dens > 0, dens, 1.0)), 0.0)
    return float(np.sum(integrand[:-1] + integrand[1:]) * 0.5 * (y[1] - y[0]))


noise_families = st.sampled_from(["gaussian", "uniform", "laplace"])


@st.composite
def signal_models(draw, max_size=5):
    n = draw(st.integers(1, max_size))
    values = draw(
        st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n, unique=True).filter(
            lambda v: min(np.diff(sorted(v)), default=1.0) > 1e-3
        )
    )
    weights = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)))
    kind = draw(noise_families)
    scale = draw(st.floats(0.2, 2.0))
    return SignalModel(values, weights / weights.sum(), NoiseDensity(kind, scale))


class TestNoiseDensity:
    @pytest.mark.parametrize("kind", ["gaussian", "uniform", "laplace"])
    def test_pdf_matches_scipy(self, kind):
        noise = NoiseDensity(kind, 0.7)
        x = np.linspace(-3, 3, 101)
        x = x[np.abs(np.abs(x) - 0.7) > 1e-9]
        np.testing.assert_allclose(noise.pdf(x), scipy_density(noise).pdf(x), rtol=1e-12, atol=1e-300)

    @pytest.mark.parametrize("kind", ["gaussian", "uniform", "laplace"])
    def test_sample_moments(self, kind):
        noise = NoiseDensity(kind, 1.3)
        draws = noise.sample(np.random.default_rng(5), 200_000)
        ref = scipy_density(noise)
        assert abs(draws.mean()) < 4 * ref.std() / math.sqrt(draws.size)
        assert draws.std() == pytest.approx(ref.std(), rel=0.01)

    @pytest.mark.parametrize("scale", [0.0, -1.0, math.inf, math.nan])
    def test_rejects_bad_scale(self, scale):
        with pytest.raises(InvalidParameter):
            NoiseDensity("gaussian", scale)

    def test_rejects_unknown_kind(self):
        with pytest.raises(InvalidParameter):
            NoiseDensity("cauchy", 1.0)


class TestSignalModel:
    def test_prior_must_normalise(self):
        with pytest.raises(InvalidParameter):
            SignalModel([0.0, 1.0], [0.5, 0.4], NoiseDensity.gaussian(1.0))

    def test_values_must_be_distinct(self):
        with pytest.raises(InvalidParameter):
            SignalModel([1.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(1.0))

    def test_negative_prior_rejected(self):
        with pytest.raises(InvalidParameter):
            SignalModel([0.0, 1.0], [1.5, -0.5], NoiseDensity.gaussian(1.0))

    def test_arrays_are_read_only(self):
        m = SignalModel([0.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(1.0))
        with pytest.raises(ValueError):
            m.prior[0] = 1.0

    def test_from_continuous_discretises_density(self):
        m = SignalModel.from_continuous(stats.norm.pdf, -4, 4, 81, NoiseDensity.gaussian(0.5))
        assert m.size == 81
        assert m.prior.sum() == pytest.approx(1.0, abs=1e-12)
        assert float(m.prior @ m.values) == pytest.approx(0.0, abs=1e-12)


class TestMarginalDensity:
    def test_single_value_is_noise_density(self):
        m = SignalModel([0.0], [1.0], NoiseDensity.gaussian(1.0))
        assert marginal_density(m, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)

    def test_symmetric_pair(self):
        m = SignalModel([-1.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(1.0))
        for xi in (0.0, 0.3, 2.2):
            assert marginal_density(m, xi) == pytest.approx(marginal_density(m, -xi), rel=1e-14)

    def test_three_values_against_direct_sum(self):
        m = SignalModel([0.0, 1.0, 2.0], [0.2, 0.3, 0.5], NoiseDensity.gaussian(0.7))
        ref = sum(p * stats.norm.pdf(1.3, x, 0.7) for x, p in zip([0, 1, 2], [0.2, 0.3, 0.5]))
        assert marginal_density(m, 1.3) == pytest.approx(ref, rel=1e-12)


class TestPosterior:
    def test_symmetric_observation_returns_prior(self):
        m = SignalModel([-2.0, 2.0], [0.5, 0.5], NoiseDensity.laplace(1.0))
        np.testing.assert_allclose(posterior(m, 0.0).probs, [0.5, 0.5], atol=1e-15)

    @pytest.mark.parametrize("xi", [-3.0, 0.1, 7.5])
    def test_degenerate_prior_is_fixed_point(self, xi):
        m = SignalModel([0.0, 1.0, 2.0], [0.0, 1.0, 0.0], NoiseDensity.gaussian(0.4))
        np.testing.assert_array_equal(posterior(m, xi).probs, [0.0, 1.0, 0.0])

    def test_two_values_against_grid_oracle(self):
        m = SignalModel([0.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(0.5))
        ref = grid_posterior([0.0, 1.0], [0.5, 0.5], 0.5, 0.8)
        np.testing.assert_allclose(posterior(m, 0.8).probs, ref, rtol=1e-9)

    def test_accepts_observation_object(self):
        m = SignalModel([0.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(0.5))
        post = posterior(m, Observation(0.8))
        assert float(post.conditioning_observation) == pytest.approx(0.8)

    def test_zero_marginal(self):
        m = SignalModel([0.0, 1.0], [0.5, 0.5], NoiseDensity.uniform(0.5))
        with pytest.raises(ZeroMarginal):
            posterior(m, 10.0)

    def test_gaussian_tail_stays_finite(self):
        m = SignalModel([0.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(0.1))
        probs = posterior(m, 3.5).probs
        assert probs[1] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.isfinite(probs))

    def test_gaussian_underflow_raises(self):
        m = SignalModel([0.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(0.1))
        with pytest.raises(ZeroMarginal):
            posterior(m, 40.0)

    def test_sequence_composes_single_updates(self):
        m = SignalModel([0.0, 1.0, 2.0], [0.2, 0.3, 0.5], NoiseDensity.gaussian(0.9))
        xis = [0.4, 1.7, 1.1]
        seq = posterior_sequence(m, xis)
        probs = m.prior
        for xi, post in zip(xis, seq):
            probs = posterior(SignalModel(m.values, probs, m.noise), xi).probs
            np.testing.assert_allclose(post.probs, probs, atol=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(signal_models(), st.floats(-8, 8))
    def test_normalisation_and_bayes_identity(self, model, xi):
        try:
            post = posterior(model, xi)
        except ZeroMarginal:
            assert model.noise.kind == "uniform"
            return
        assert post.probs.sum() == pytest.approx(1.0, abs=1e-12)
        joint = model.prior * model.noise.pdf(xi - model.values)
        np.testing.assert_allclose(post.probs * marginal_density(model, xi), joint, rtol=1e-12, atol=1e-300)


class TestPosteriorMean:
    def test_degenerate_prior(self):
        m = SignalModel([-1.0, 4.0], [0.0, 1.0], NoiseDensity.gaussian(1.0))
        assert posterior_mean(m, 0.0) == 4.0

    def test_symmetric_case(self):
        m = SignalModel([-3.0, 3.0], [0.5, 0.5], NoiseDensity.gaussian(1.0))
        assert posterior_mean(m, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_asymmetric_against_grid_oracle(self):
        values, prior = [0.0, 1.0, 3.0], [0.2, 0.5, 0.3]
        m = SignalModel(values, prior, NoiseDensity.gaussian(0.8))
        ref = float(np.dot(values, grid_posterior(values, prior, 0.8, 1.4)))
        assert posterior_mean(m, 1.4) == pytest.approx(ref, rel=1e-9)


class TestSampling:
    def test_tiny_noise_single_value(self):
        m = SignalModel([3.0], [1.0], NoiseDensity.gaussian(1e-9))
        obs = sample_observation(m, np.random.default_rng(0))
        assert isinstance(obs, Observation)
        assert abs(float(obs) - 3.0) < 1e-6

    def test_seed_determinism(self):
        m = SignalModel([0.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(1.0))
        a = sample_observations(m, np.random.default_rng(9), 1000)
        b = sample_observations(m, np.random.default_rng(9), 1000)
        np.testing.assert_array_equal(a, b)

    def test_empirical_mean(self):
        m = SignalModel([0.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(1.0))
        x = sample_observations(m, np.random.default_rng(3), 100_000)
        se = x.std(ddof=1) / math.sqrt(x.size)
        assert abs(x.mean() - 0.5) < 3 * se


class TestEntropyChange:
    def test_identity(self):
        assert entropy_change([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_full_collapse(self):
        assert entropy_change([0.5, 0.5], [1.0, 0.0]) == pytest.approx(-LN2, abs=1e-15)

    def test_shannon_of_uniform(self):
        assert shannon_entropy(np.full(64, 1 / 64)) == pytest.approx(math.log(64), rel=1e-14)


class TestNoiseEntropy:
    def test_gaussian(self):
        n = NoiseDensity.gaussian(1.0)
        assert noise_entropy(n) == pytest.approx(1.41894, abs=1e-5)
        assert noise_entropy_quadrature(n) == pytest.approx(0.5 * math.log(2 * math.pi * math.e), abs=1e-8)

    def test_unit_width_uniform(self):
        n = NoiseDensity.uniform(0.5)
        assert noise_entropy(n) == 0.0
        assert noise_entropy_quadrature(n) == pytest.approx(0.0, abs=1e-8)

    def test_laplace(self):
        n = NoiseDensity.laplace(1.0)
        assert noise_entropy(n) == pytest.approx(1.69315, abs=1e-5)
        assert noise_entropy_quadrature(n) == pytest.approx(1 + LN2, abs=1e-8)

    @pytest.mark.parametrize("kind", ["gaussian", "uniform", "laplace"])
    @pytest.mark.parametrize("scale", [0.05, 0.6, 7.0])
    def test_matches_scipy(self, kind, scale):
        n = NoiseDensity(kind, scale)
        assert noise_entropy(n) == pytest.approx(float(scipy_density(n).entropy()), abs=1e-12)


class TestObservationEntropy:
    def test_single_value_equals_noise_entropy(self):
        n = NoiseDensity.laplace(0.6)
        m = SignalModel([2.0], [1.0], n)
        assert observation_entropy(m) == pytest.approx(noise_entropy(n), abs=1e-8)

    def test_separated_mixture(self):
        n = NoiseDensity.gaussian(0.1)
        m = SignalModel([-5.0, 5.0], [0.5, 0.5], n)
        assert observation_entropy(m) == pytest.approx(noise_entropy(n) + LN2, abs=1e-6)

    def test_against_riemann_oracle(self):
        m = SignalModel([0.0, 1.0], [0.5, 0.5], NoiseDensity.gaussian(1.0))
        assert observation_entropy(m) == pytest.approx(riemann_mixture_entropy([0, 1], [0.5, 0.5], 1.0), abs=1e-8)


class TestMutualInformation:
    def test_single_value(self):
        m = SignalModel([1.0], [1.0], NoiseDensity.gaussian(1.0))
        assert mutual_information(m) == 0.0
        assert mutual_information_bits(m) == 0.0

    def test_separated_mixture(self):
        m = SignalModel([-5.0, 5.0], [0.5, 0.5], NoiseDensity.gaussian(0.1))
        assert mutual_information(m) == pytest.approx(LN2, abs=1e-6)
        assert mutual_information_bits(m) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("kind", ["gaussian", "uniform", "laplace"])
    def test_equals_minus_mean_entropy_change(self, kind):
        m = SignalModel([0.0, 0.8, 2.0], [0.3, 0.3, 0.4], NoiseDensity(kind, 0.7))
        mean, se = mean_entropy_change(m, 100_000, np.random.default_rng(21))
        assert abs(mutual_information(m) + mean) < 3 * se

    def test_monotone_in_sigma(self):
        values, prior = [0.0, 1.0, 2.5], [0.2, 0.5, 0.3]
        sigmas = np.geomspace(0.05, 10, 25)
        j = [mutual_information(SignalModel(values, prior, NoiseDensity.gaussian(s))) for s in sigmas]
        assert np.all(np.diff(j) <= 1e-8)

    @settings(max_examples=25, deadline=None)
    @given(signal_models())
    def test_nonnegative_and_bounded_by_prior_entropy(self, model):
        j = mutual_information(model)
        assert j >= 0
        assert j <= shannon_entropy(model.prior) + 1e-7
        s = observation_entropy(model) - noise_entropy(model.noise)
        assert j == pytest.approx(max(s, 0.0), abs=1e-7)
