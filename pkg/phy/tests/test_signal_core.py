import numpy as np
from django.test import SimpleTestCase

from phy.exceptions import FrameError, GridMismatchError, PulseConfigError, SupportError
from phy.services.signal_core import (
    DenseSignal,
    Pulse,
    PulseConfig,
    calibrate_noise,
    complex_noise,
    convolve_filter,
    pulse_values,
    rc_pulse,
    rrc_pulse,
    shape_symbols,
    sinc2_reconstruct,
    sinc_kernel,
)


class PulseConfigTests(SimpleTestCase):

    def test_rejects_out_of_range_rolloff(self):
        with self.assertRaises(PulseConfigError):
            PulseConfig(beta=1.5)
        with self.assertRaises(PulseConfigError):
            PulseConfig(beta=-0.1)

    def test_rejects_odd_oversampling(self):
        with self.assertRaises(PulseConfigError):
            PulseConfig(beta=0.5, M=15)

    def test_front_end_span_not_shorter_than_pulse_span(self):
        with self.assertRaises(PulseConfigError):
            PulseConfig(beta=0.5, span=16, front_end_span=8)

    def test_from_settings(self):
        cfg = PulseConfig.from_settings(0.75)
        self.assertEqual(cfg.beta, 0.75)
        self.assertEqual(cfg.M, 16)
        self.assertAlmostEqual(cfg.dt, cfg.T / cfg.M)


class PulseShapeTests(SimpleTestCase):

    def test_rrc_has_unit_energy(self):
        for beta in (0.25, 0.5, 1.0):
            cfg = PulseConfig(beta=beta)
            t = np.arange(-cfg.span * cfg.M, cfg.span * cfg.M + 1) * cfg.dt
            energy = np.sum(rrc_pulse(t, cfg) ** 2) * cfg.dt
            self.assertAlmostEqual(energy, 1.0, delta=2e-3)

    def test_rrc_singular_points(self):
        cfg = PulseConfig(beta=0.5)
        self.assertAlmostEqual(rrc_pulse(0.0, cfg), 1 - 0.5 + 2 / np.pi)
        edge = rrc_pulse(0.5, cfg)
        self.assertAlmostEqual(edge, (rrc_pulse(0.5 - 1e-6, cfg) + rrc_pulse(0.5 + 1e-6, cfg)) / 2, places=5)

    def test_rrc_is_zero_beyond_span(self):
        cfg = PulseConfig(beta=0.5, span=8)
        self.assertEqual(rrc_pulse(8.5, cfg), 0.0)

    def test_rc_nyquist_zeros(self):
        for beta in (0.0, 0.5, 1.0):
            cfg = PulseConfig(beta=beta)
            values = rc_pulse(np.arange(-10, 11, dtype=float), cfg)
            expected = np.zeros(21)
            expected[10] = 1.0
            np.testing.assert_array_equal(values, expected)

    def test_rc_edge_value(self):
        cfg = PulseConfig(beta=1.0)
        self.assertAlmostEqual(rc_pulse(0.5, cfg), 0.5)

    def test_scalar_in_scalar_out(self):
        cfg = PulseConfig(beta=0.5)
        self.assertIsInstance(rc_pulse(0.3, cfg), float)
        self.assertIsInstance(rrc_pulse(0.3, cfg), float)
        self.assertEqual(rc_pulse(np.zeros((2, 3)), cfg).shape, (2, 3))

    def test_sinc_kernel(self):
        self.assertEqual(sinc_kernel(0.5, 2), 0.0)
        self.assertEqual(sinc_kernel(0.0, 2), 1.0)
        self.assertAlmostEqual(sinc_kernel(0.25, 2), np.sinc(0.5))
        with self.assertRaises(PulseConfigError):
            sinc_kernel(0.1, 3)

    def test_front_end_low_pass_has_unit_gain(self):
        cfg = PulseConfig(beta=0.5)
        t = np.arange(-cfg.front_end_span * cfg.M, cfg.front_end_span * cfg.M + 1) * cfg.dt
        self.assertAlmostEqual(np.sum(pulse_values(t, Pulse.SINC2, cfg)) * cfg.dt, 1.0, delta=1e-2)


class SynthesisTests(SimpleTestCase):

    def setUp(self):
        self.cfg = PulseConfig(beta=0.5)

    def test_shape_symbols_matches_direct_sum(self):
        cfg = self.cfg
        symbols = np.array([1.0, -1.0, 1.0, 1.0])
        delay = 0.3
        sig = shape_symbols(symbols, delay, Pulse.RRC, cfg)
        for k in (-5, 0, 7, 23, 40, 61):
            t = k * cfg.dt
            expected = sum(s * rrc_pulse(t - i * cfg.T - delay, cfg) for i, s in enumerate(symbols))
            self.assertAlmostEqual(sig.at_index(k), expected, places=12)

    def test_shape_symbols_rejects_bad_input(self):
        with self.assertRaises(FrameError):
            shape_symbols([], 0.0, Pulse.RRC, self.cfg)
        with self.assertRaises(FrameError):
            shape_symbols([1.0], 1.0, Pulse.RRC, self.cfg)

    def test_matched_filter_output_is_raised_cosine(self):
        cfg = self.cfg
        y = convolve_filter(shape_symbols([1.0], 0.0, Pulse.RRC, cfg), Pulse.RRC, cfg)
        for k in (0, cfg.M // 2, cfg.M, 3 * cfg.M // 2, 2 * cfg.M, 5):
            self.assertAlmostEqual(y.at_index(k).real, rc_pulse(k * cfg.dt, cfg), delta=1e-3)

    def test_convolve_filter_rejects_foreign_grid(self):
        sig = DenseSignal(start_index=0, dt=0.1, samples=np.ones(4, dtype=complex))
        with self.assertRaises(GridMismatchError):
            convolve_filter(sig, Pulse.RRC, self.cfg)

    def test_dense_signal_reads(self):
        sig = DenseSignal(start_index=-2, dt=0.25, samples=np.array([1, 2, 3, 4], dtype=complex))
        self.assertEqual(sig.at_index(-2), 1)
        self.assertEqual(sig.at_index(5), 0)
        self.assertEqual(sig.at_time(0.25), 4)
        with self.assertRaises(GridMismatchError):
            sig.at_time(0.1)
        with self.assertRaises(FrameError):
            DenseSignal(start_index=0, dt=0.25, samples=np.array([], dtype=complex))


class ReconstructionTests(SimpleTestCase):

    def setUp(self):
        self.cfg = PulseConfig(beta=0.5)
        # half-baud samples of one RRC pulse over +/- 24T
        self.origin = -48
        self.lattice = np.arange(self.origin, 49)
        self.samples = rrc_pulse(self.lattice * self.cfg.T / 2, self.cfg)

    def test_exact_at_sample_instants(self):
        value = sinc2_reconstruct(self.samples, 1.0, self.cfg, origin=self.origin)
        self.assertAlmostEqual(value, self.samples[2 - self.origin], places=12)

    def test_band_limited_pulse_between_samples(self):
        t = np.array([-0.8, 0.3, 1.7, 4.1])
        values = sinc2_reconstruct(self.samples, t, self.cfg, origin=self.origin)
        np.testing.assert_allclose(values.real, rrc_pulse(t, self.cfg), atol=1e-3)

    def test_out_of_support(self):
        with self.assertRaises(SupportError):
            sinc2_reconstruct(self.samples, 30.0, self.cfg, origin=self.origin)


class NoiseTests(SimpleTestCase):

    def test_calibrate_noise(self):
        cfg = PulseConfig(beta=0.5)
        self.assertAlmostEqual(calibrate_noise(0.5, cfg), np.sqrt(0.25 / cfg.dt))
        with self.assertRaises(PulseConfigError):
            calibrate_noise(0.0, cfg)

    def test_complex_noise_power(self):
        rng = np.random.default_rng(7)
        noise = complex_noise(rng, 200000, 2.0)
        self.assertAlmostEqual(np.mean(np.abs(noise) ** 2), 4.0, delta=0.05)
        self.assertAlmostEqual(np.mean(noise.real ** 2), 2.0, delta=0.05)

    def test_matched_filter_noise_variance(self):
        cfg = PulseConfig(beta=0.5)
        N0 = 0.5
        rng = np.random.default_rng(11)
        dense = DenseSignal(start_index=0, dt=cfg.dt, samples=complex_noise(rng, 200000, calibrate_noise(N0, cfg)))
        y = convolve_filter(dense, Pulse.RRC, cfg)
        baud = y.samples[cfg.span * cfg.M * 2:-cfg.span * cfg.M * 2:cfg.M]
        self.assertAlmostEqual(np.var(baud) / (N0 / (2 * cfg.T)), 1.0, delta=0.05)


class PulseIdentityTests(SimpleTestCase):
    """Half-baud sums of shifted RRC pulses, weighted by the sample spacing T/2."""

    def half_baud_sum(self, s, cfg):
        k = np.arange(-2 * (cfg.span + 5), 2 * (cfg.span + 5) + 1)
        t = k * cfg.T / 2
        return cfg.T / 2 * np.sum(rrc_pulse(t, cfg) * rrc_pulse(t - s, cfg))

    def test_shifts_by_whole_symbols_are_orthogonal(self):
        for beta in (0.25, 0.5, 0.75, 1.0):
            cfg = PulseConfig(beta=beta)
            for j in range(-4, 5):
                with self.subTest(beta=beta, j=j):
                    self.assertAlmostEqual(self.half_baud_sum(j * cfg.T, cfg), float(j == 0), delta=1e-3)

    def test_weight_follows_symbol_duration(self):
        cfg = PulseConfig(beta=0.5, T=2.0)
        for j in range(-4, 5):
            self.assertAlmostEqual(self.half_baud_sum(j * cfg.T, cfg), float(j == 0), delta=1e-3)

    def test_arbitrary_shift_gives_raised_cosine(self):
        rng = np.random.default_rng(17)
        for beta in (0.25, 0.5, 0.75, 1.0):
            cfg = PulseConfig(beta=beta)
            for s in rng.uniform(-4.0, 4.0, 25):
                with self.subTest(beta=beta, s=s):
                    self.assertAlmostEqual(self.half_baud_sum(s, cfg), rc_pulse(s, cfg), delta=1e-3)

    def test_pulses_are_even(self):
        t = np.random.default_rng(5).uniform(0.0, 20.0, 500)
        t = np.concatenate([t, [0.25, 0.5, 1.0, 1.0 / 3.0]])
        for beta in (0.0, 0.25, 0.5, 0.75, 1.0):
            cfg = PulseConfig(beta=beta)
            np.testing.assert_allclose(rrc_pulse(-t, cfg), rrc_pulse(t, cfg), rtol=0, atol=1e-14)
            np.testing.assert_allclose(rc_pulse(-t, cfg), rc_pulse(t, cfg), rtol=0, atol=1e-14)
