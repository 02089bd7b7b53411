"""Bearing inference on a circle, tracking a drifting source, and erasure cost."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infodyn.errors import InvalidParameter, NegativeBits
from infodyn.plant import (
    CircularScenario,
    InfoLedger,
    circular_mean,
    cuscuta_step,
    growth_direction,
    landauer_update,
    run_cuscuta,
    run_heliotropism,
    wrap,
)
from infodyn.signal import LN2, shannon_entropy

K_B = 1.380649e-23


def grid_bayes(means, prior, sigma, xi):
    """Posterior on a fixed alphabet via explicit gaussian weights."""
    w = np.asarray(prior) * np.exp(-0.5 * ((xi - np.asarray(means)) / sigma) ** 2)
    return w / w.sum()


class TestCircularHelpers:
    def test_wrap_range(self):
        a = wrap(np.linspace(-20, 20, 1001))
        assert np.all(a > -math.pi) and np.all(a <= math.pi)
        assert wrap(-math.pi) == math.pi

    def test_circular_mean_across_zero(self):
        assert circular_mean([0.5, 0.5], [0.1, 2 * math.pi - 0.1]) == pytest.approx(0.0, abs=1e-12)


class TestScenario:
    @pytest.mark.parametrize(
        "kw",
        [dict(n_bins=3), dict(kappa=0.0), dict(sensor_sigma=-1.0), dict(erasure_fraction=1.5), dict(memory_horizon=0.5)],
    )
    def test_invalid(self, kw):
        base = dict(n_bins=8, true_bearing=0.0, kappa=1.0, sensor_sigma=0.1)
        with pytest.raises(InvalidParameter):
            CircularScenario(**{**base, **kw})

    def test_prior_must_normalise(self):
        with pytest.raises(InvalidParameter):
            CircularScenario(8, 0.0, 1.0, 0.1, prior=np.full(8, 0.1))


class TestCuscutaStep:
    def test_vanishing_gradient_leaves_belief(self):
        sc = CircularScenario(16, 1.0, 1e-12, 1.0)
        prior = sc.prior
        post, bits = cuscuta_step(sc, prior, 0, np.random.default_rng(0))
        np.testing.assert_allclose(post, prior, atol=1e-12)
        assert bits == pytest.approx(0.0, abs=1e-10)

    def test_four_bins_against_grid_oracle(self):
        sc = CircularScenario(4, 0.7, 1.0, 0.5, sweep_period=16)
        t = 3
        rng = np.random.default_rng(1)
        post, bits = cuscuta_step(sc, sc.prior, t, rng)
        xi = math.cos(0.7 - 2 * math.pi * t / 16) + 0.5 * np.random.default_rng(1).standard_normal()
        means = [math.cos(2 * math.pi * k / 4 - 2 * math.pi * t / 16) for k in range(4)]
        ref = grid_bayes(means, np.full(4, 0.25), 0.5, xi)
        np.testing.assert_allclose(post, ref, atol=1e-13)
        assert bits == pytest.approx((math.log(4) - shannon_entropy(ref)) / LN2, abs=1e-12)

    def test_rotation_equivariance(self):
        m, shift = 32, 5
        angle = 2 * math.pi * shift / m
        rng = np.random.default_rng(2)
        prior = rng.dirichlet(np.ones(m))
        a = CircularScenario(m, 0.4, 2.0, 0.3, prior=prior)
        b = CircularScenario(m, 0.4 + angle, 2.0, 0.3, heading0=angle, prior=np.roll(prior, shift))
        for t in range(4):
            pa, ba = cuscuta_step(a, prior if t == 0 else pa, t, np.random.default_rng(10 + t))
            pb, bb = cuscuta_step(b, np.roll(prior, shift) if t == 0 else pb, t, np.random.default_rng(10 + t))
            np.testing.assert_allclose(pb, np.roll(pa, shift), atol=1e-12)
            assert bb == pytest.approx(ba, abs=1e-12)

    def test_memory_relaxes_toward_prior(self):
        base = CircularScenario(16, 0.0, 1.0, 0.1)
        forgetful = CircularScenario(16, 0.0, 1.0, 0.1, memory_horizon=30.0)
        pa, _ = cuscuta_step(base, base.prior, 0, np.random.default_rng(3))
        pb, _ = cuscuta_step(forgetful, forgetful.prior, 0, np.random.default_rng(3))
        np.testing.assert_allclose(pb, (29 * pa + base.prior) / 30, atol=1e-14)


class TestRunCuscuta:
    def test_degenerate_prior(self):
        m = 16
        prior = np.zeros(m)
        prior[5] = 1.0
        sc = CircularScenario(m, 2 * math.pi * 5 / m, 1.0, 0.1, prior=prior)
        run = run_cuscuta(sc, 20, np.random.default_rng(4))
        assert run.growth_direction == pytest.approx(wrap(2 * math.pi * 5 / m), abs=1e-12)
        assert run.cumulative_bits == 0.0

    def test_telescoping_and_bounds(self):
        sc = CircularScenario(64, 2.0, 1.0, 0.1)
        run = run_cuscuta(sc, 100, np.random.default_rng(5))
        total = (shannon_entropy(run.posteriors[0]) - shannon_entropy(run.posteriors[-1])) / LN2
        assert shannon_entropy(run.posteriors[0]) / LN2 == pytest.approx(6.0, abs=1e-12)
        assert run.cumulative_bits == pytest.approx(total, abs=1e-9)
        assert run.cumulative_bits <= 6.0 + 1e-9
        assert run.ledger.bits_erased == pytest.approx(run.cumulative_bits, abs=1e-12)

    def test_concentrates_on_true_bearing(self):
        rng = np.random.default_rng(6)
        errs, bits = [], []
        for child in rng.spawn(200):
            sc = CircularScenario(64, child.uniform(0, 2 * math.pi), 1.0, 0.1)
            run = run_cuscuta(sc, 100, child)
            errs.append(run.bearing_error)
            bits.append(run.cumulative_bits)
        assert np.mean(np.array(errs) <= 2 * math.pi / 64) >= 0.95
        assert np.mean((np.array(bits) >= 5) & (np.array(bits) <= 6)) >= 0.90

    def test_information_monotone_in_snr(self):
        means = []
        for snr in (0.5, 1.0, 2.0, 4.0):
            total = 0.0
            for child in np.random.default_rng(7).spawn(1000):
                sc = CircularScenario(16, child.uniform(0, 2 * math.pi), snr, 1.0)
                total += run_cuscuta(sc, 16, child).cumulative_bits
            means.append(total / 1000)
        assert np.all(np.diff(means) >= 0)

    def test_argmax_direction_is_a_bin(self):
        sc = CircularScenario(32, 1.0, 1.0, 0.1)
        run = run_cuscuta(sc, 50, np.random.default_rng(8), direction="argmax")
        assert run.growth_direction in set(sc.bins)
        with pytest.raises(InvalidParameter):
            growth_direction(sc, sc.prior, "median")


class TestHeliotropism:
    def test_static_source_converges(self):
        rec = run_heliotropism(0.0, 5.0, 200, np.random.default_rng(9))
        assert rec.errors[-50:].mean() < 2 * math.pi / 64

    def test_no_coupling_is_prior_only(self):
        errs = [run_heliotropism(0.05, 0.0, 100, g).mean_error for g in np.random.default_rng(10).spawn(100)]
        assert np.mean(errs) == pytest.approx(math.pi / 2, abs=0.25)

    def test_error_nondecreasing_in_drift(self):
        drifts = [0.0, 0.02, 0.1, 0.3, 1.0]
        means = []
        for d in drifts:
            means.append(np.mean([run_heliotropism(d, 5.0, 200, g).mean_error for g in np.random.default_rng(11).spawn(20)]))
        assert np.all(np.diff(means) >= 0)

    def test_ratio(self):
        rec = run_heliotropism(0.2, 4.0, 5, np.random.default_rng(0))
        assert rec.ratio == pytest.approx(0.05)

    def test_negative_drift_rejected(self):
        with pytest.raises(InvalidParameter):
            run_heliotropism(-0.1, 1.0, 5, np.random.default_rng(0))


class TestLandauer:
    def test_zero_bits(self):
        ledger = landauer_update(InfoLedger(300.0, landauer_heat=1e-20), 0.0)
        assert ledger.landauer_heat == 1e-20

    def test_one_bit_at_room_temperature(self):
        ledger = landauer_update(InfoLedger(300.0), 1.0)
        assert abs(ledger.landauer_heat - 2.871e-21) < 1e-24
        assert ledger.landauer_heat == pytest.approx(K_B * 300.0 * math.log(2), rel=1e-15)

    def test_efficiency(self):
        ledger = landauer_update(InfoLedger(300.0, external_energy=1e-9), 1e6)
        assert ledger.efficiency == pytest.approx(2.871e-6, rel=1e-3)

    def test_negative_bits(self):
        with pytest.raises(NegativeBits):
            landauer_update(InfoLedger(300.0), -0.5)

    def test_bad_temperature(self):
        with pytest.raises(InvalidParameter):
            InfoLedger(0.0)

    @settings(max_examples=50)
    # tiny positive bit counts push k_B T ln2 * bits into subnormals, where a relative check is meaningless
    @given(st.lists(st.just(0.0) | st.floats(1e-6, 1e3), min_size=1, max_size=20), st.floats(1.0, 1e4))
    def test_heat_per_bit_identity(self, bits, temperature):
        ledger = InfoLedger(temperature)
        for b in bits:
            ledger = landauer_update(ledger.record(b), b)
        if ledger.bits_processed > 0:
            ratio = ledger.landauer_heat / (ledger.bits_processed * K_B * temperature * math.log(2))
            assert ratio == pytest.approx(1.0, abs=1e-12)
