"""
Unit tests for class maxima and power-law fits.
"""

import math

import numpy as np
import pytest

from ramsey_echo.core.core import NoiseModel
from ramsey_echo.optimizer import scaling
from ramsey_echo.optimizer.landscape import ProtocolClass

LARGE_N = [64, 128, 256, 512, 1024, 2048, 4096]


class TestClassRegion:
    """Test cases for class regions."""

    def test_regions_at_thirty_two_particles(self):
        threshold = 4 / math.sqrt(32)
        (mu_min, mu_max), (nu_min, nu_max) = scaling.class_region(ProtocolClass.SQUEEZING, 32)
        assert (mu_min, mu_max) == pytest.approx((0.0, threshold))
        assert (nu_min, nu_max) == pytest.approx((-threshold, threshold))

        (mu_min, mu_max), _ = scaling.class_region(ProtocolClass.GHZ, 32)
        assert (mu_min, mu_max) == pytest.approx((math.pi - threshold, math.pi))

        (mu_min, mu_max), (nu_min, nu_max) = scaling.class_region(ProtocolClass.OVER_UN_TWISTING, 32)
        assert (mu_min, mu_max) == pytest.approx((threshold, math.pi - threshold))
        assert (nu_min, nu_max) == pytest.approx((-math.pi, math.pi))

    def test_no_over_un_twisting_band_for_tiny_ensembles(self):
        with pytest.raises(ValueError, match="No over-un-twisting band"):
            scaling.class_region(ProtocolClass.OVER_UN_TWISTING, 4)


class TestFitPowerLaw:
    """Test cases for log-log fits."""

    def test_recovers_exact_power_law(self):
        n_values = [16, 32, 64, 128]
        fit = scaling.fit_power_law(n_values, [3 * n**0.75 for n in n_values])
        assert fit.c == pytest.approx(3.0, rel=1e-10)
        assert fit.alpha == pytest.approx(0.75, rel=1e-10)
        assert fit.residual < 1e-12
        assert fit.n_range == (16, 32, 64, 128)

    def test_single_point_is_rejected(self):
        with pytest.raises(ValueError, match="at least two"):
            scaling.fit_power_law([16], [4.0])

    def test_non_positive_snr_is_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            scaling.fit_power_law([16, 32], [4.0, 0.0])


class TestFitScaling:
    """Test cases for fit_scaling input validation and results."""

    def test_too_few_particle_numbers(self):
        with pytest.raises(ValueError, match="at least 4"):
            scaling.fit_scaling(ProtocolClass.GHZ, NoiseModel(), [16, 32, 64])

    def test_particle_numbers_must_increase(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            scaling.fit_scaling(ProtocolClass.GHZ, NoiseModel(), [16, 64, 32, 128])

    def test_small_ensembles_are_rejected(self):
        with pytest.raises(ValueError, match="N >= 16"):
            scaling.fit_scaling(ProtocolClass.GHZ, NoiseModel(), [8, 16, 32, 64])

    def test_resolution_is_checked(self):
        with pytest.raises(ValueError, match="Resolution"):
            scaling.class_maximum(ProtocolClass.GHZ, 32, NoiseModel(), resolution=2)

    def test_class_maximum_stays_in_its_class(self):
        maximum = scaling.class_maximum(ProtocolClass.SQUEEZING, 32, NoiseModel())
        assert maximum is not None
        assert maximum.protocol_class is ProtocolClass.SQUEEZING
        threshold = 4 / math.sqrt(32)
        assert 0 <= maximum.mu <= threshold
        assert abs(maximum.nu) <= threshold
        assert maximum.snr > math.sqrt(32)

    @pytest.mark.slow
    @pytest.mark.parametrize("sigma", [0.0, 0.01, 0.1, 0.5])
    def test_over_un_twisting_has_heisenberg_scaling(self, sigma):
        fit = scaling.fit_scaling(ProtocolClass.OVER_UN_TWISTING, NoiseModel(collective=sigma), LARGE_N)
        assert fit.alpha == pytest.approx(1.0, abs=0.05)

    @pytest.mark.slow
    def test_ghz_falls_behind_under_collective_noise(self):
        noise = NoiseModel(collective=0.5)
        ghz = scaling.fit_scaling(ProtocolClass.GHZ, noise, LARGE_N)
        out = scaling.fit_scaling(ProtocolClass.OVER_UN_TWISTING, noise, LARGE_N)
        assert ghz.alpha < out.alpha - 0.2

    @pytest.mark.slow
    def test_ghz_loses_more_than_over_un_twisting_to_collective_noise(self):
        drops = {}
        for protocol_class in (ProtocolClass.GHZ, ProtocolClass.OVER_UN_TWISTING):
            clean = scaling.class_maximum(protocol_class, 32, NoiseModel())
            noisy = scaling.class_maximum(protocol_class, 32, NoiseModel(collective=0.1))
            assert clean is not None
            assert noisy is not None
            drops[protocol_class] = noisy.snr / clean.snr
        assert drops[ProtocolClass.GHZ] < drops[ProtocolClass.OVER_UN_TWISTING]

    # Squeezing at big_sigma = 2 is still pre-asymptotic over this window (alpha near 1.12).
    @pytest.mark.slow
    @pytest.mark.parametrize(
        ("protocol_class", "big_sigma"),
        [
            (ProtocolClass.OVER_UN_TWISTING, 0.5),
            (ProtocolClass.OVER_UN_TWISTING, 2.0),
            (ProtocolClass.GHZ, 0.5),
            (ProtocolClass.GHZ, 2.0),
            (ProtocolClass.SQUEEZING, 0.5),
        ],
    )
    def test_individual_noise_gives_linear_scaling(self, protocol_class, big_sigma):
        fit = scaling.fit_scaling(protocol_class, NoiseModel(individual=big_sigma), LARGE_N)
        assert fit.alpha == pytest.approx(1.0, abs=0.1)
        assert np.isfinite(fit.c)
