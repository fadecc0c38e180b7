import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcadetect.estimation import energy_feature, ls_estimate
from pcadetect.signal_model import (UplinkConfig, generate_pilots,
                                    synthesize_estimate)


class TestLsEstimate:
    def test_noiseless_recovery(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        x = generate_pilots(1, 8)[0]
        estimate = ls_estimate(np.outer(h, x), x, 1.0)
        assert np.allclose(estimate, h, rtol=1e-12)

    def test_power_normalization_cancels(self):
        # Pk = 4 means the transmit amplitude is 2; the estimator undoes it.
        rng = np.random.default_rng(1)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        x = generate_pilots(1, 8)[0]
        estimate = ls_estimate(2.0 * np.outer(h, x), x, 4.0)
        assert np.allclose(estimate, h, rtol=1e-12)

    def test_null_energy_oracle(self):
        # mean ||h_hat||^2 / M over trials estimates 1 + sigma^2/N; with 3000
        # trials at M=256 the standard error is ~0.00114, so +/-0.004 is >3 SE.
        config = UplinkConfig(256, 1, 0.1, pilot_length=300)
        pilots = generate_pilots(1, 300)
        rng = np.random.default_rng(2)
        from pcadetect.signal_model import simulate_uplink
        energies = [
            energy_feature(ls_estimate(simulate_uplink(config, pilots, rng)[0], pilots[0], 1.0))
            for _ in range(3000)
        ]
        assert np.mean(energies) == pytest.approx(1.0 + 0.1 / 300, abs=0.004)

    def test_linearity(self):
        rng = np.random.default_rng(3)
        x = generate_pilots(1, 6)[0]
        y1 = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
        y2 = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
        a, b = 2.5 - 1j, -0.75 + 0.5j
        combined = ls_estimate(a * y1 + b * y2, x, 1.0)
        separate = a * ls_estimate(y1, x, 1.0) + b * ls_estimate(y2, x, 1.0)
        assert np.allclose(combined, separate, rtol=1e-12)

    def test_invalid_args(self):
        y = np.zeros((2, 4), dtype=complex)
        x = generate_pilots(1, 4)[0]
        with pytest.raises(ValueError):
            ls_estimate(y, x, 0.0)
        with pytest.raises(ValueError):
            ls_estimate(y, np.zeros(4, dtype=complex), 1.0)
        with pytest.raises(ValueError):
            ls_estimate(y, generate_pilots(1, 6)[0], 1.0)


class TestEnergyFeature:
    def test_arithmetic(self):
        assert energy_feature(np.array([3.0, 4.0j])) == pytest.approx(12.5, rel=1e-15)

    def test_all_zero(self):
        assert energy_feature(np.zeros(5, dtype=complex)) == 0.0

    def test_batch_shape(self):
        batch = np.ones((7, 3), dtype=complex)
        out = energy_feature(batch)
        assert out.shape == (7,)
        assert np.allclose(out, 1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            energy_feature(np.array([]))

    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_scaling_property(self, re, im):
        scale = complex(re, im)
        rng = np.random.default_rng(4)
        taps = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        scaled = energy_feature(scale * taps)
        assert scaled == pytest.approx(abs(scale) ** 2 * energy_feature(taps),
                                       rel=1e-9, abs=1e-12)

    def test_null_sample_mean_oracle(self):
        # sigma0^2 oracle at sigma^2 = 0.1, N = 300 over 1e4 fast-path draws.
        config = UplinkConfig(256, 1, 0.1, pilot_length=300)
        energies = energy_feature(
            synthesize_estimate(config, np.random.default_rng(5), size=10_000))
        assert np.mean(energies) == pytest.approx(1.0 + 0.1 / 300, abs=0.01)

    def test_concentration_across_antennas(self):
        # Standard deviation of E over trials is about sigma0^2 / sqrt(M).
        config = UplinkConfig(256, 1, 0.1, pilot_length=300)
        energies = energy_feature(
            synthesize_estimate(config, np.random.default_rng(6), size=10_000))
        expected = (1.0 + 0.1 / 300) / 16.0
        assert abs(np.std(energies) - expected) / expected < 0.20
