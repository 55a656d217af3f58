"""Propagation, reflection, noise and superposition."""

import numpy as np
import pytest

from fmcwlab.channel import (LinkBudget, Target, add_thermal_noise, db2lin,
                             noise_power_dbm, one_way_propagate,
                             one_way_rx_power_dbm, reflect_and_propagate,
                             sample_rcs, superpose, two_way_rx_power_dbm)
from fmcwlab.waveforms import SPEED_OF_LIGHT, IQBuffer, synth_frame


class TestReflect:
    def test_round_trip_delay(self, small_cfg, budget):
        tx = synth_frame(small_cfg)
        rx = reflect_and_propagate(tx, Target(75.0, 0.0), small_cfg, budget)
        t_d = 2 * 75.0 / SPEED_OF_LIGHT
        assert t_d == pytest.approx(500.35e-9, abs=0.01e-9)
        shift = round(t_d * small_cfg.sim_rate)
        assert np.all(rx.samples[:shift] == 0)
        # delayed content matches the tx scaled by a constant complex gain
        ratio = rx.samples[shift] / tx.samples[0]
        np.testing.assert_allclose(rx.samples[shift:] / ratio,
                                   tx.samples[:len(tx) - shift], atol=1e-9)

    def test_stationary_target_has_no_interchirp_phase(self, small_cfg, budget):
        tx = synth_frame(small_cfg)
        rx = reflect_and_propagate(tx, Target(60.0, 0.0), small_cfg, budget)
        spc = small_cfg.samples_per_chirp
        shift = round(2 * 60.0 / SPEED_OF_LIGHT * small_cfg.sim_rate)
        blocks = rx.samples[shift:shift + 8 * spc].reshape(8, spc)
        phases = np.angle(blocks[:, 64])
        np.testing.assert_allclose(np.diff(phases), 0.0, atol=1e-12)

    def test_receding_interchirp_phase_matches_doppler_formula(self, budget):
        # v = 10 m/s at 77 GHz / 20.93 us chirps: 4 pi v T / lambda = 0.6755 rad
        from fmcwlab.waveforms import MHZ_PER_US, RadarConfig
        cfg = RadarConfig(f_c=77e9, bandwidth=150e6, slope=150e6 / 20e-6,
                          t_chirp=20.93e-6, n_chirps=8, t_frame=1e-3,
                          f_samp=15e6, sim_rate=150e6)
        expected = 4 * np.pi * 10.0 * cfg.t_chirp / cfg.wavelength
        assert expected == pytest.approx(0.6755, abs=2e-4)
        tx = synth_frame(cfg)
        rx = reflect_and_propagate(tx, Target(40.0, 10.0), cfg, budget)
        spc = cfg.samples_per_chirp
        shift = round(2 * 40.0 / SPEED_OF_LIGHT * cfg.sim_rate)
        blocks = rx.samples[shift:shift + 7 * spc].reshape(7, spc)
        # mixing conjugates the echo, so the IF phase advances by +0.6755
        mixed = tx.samples[:7 * spc].reshape(7, spc) * np.conj(blocks)
        steps = np.angle(mixed[1:, 256] / mixed[:-1, 256])
        np.testing.assert_allclose(steps, expected, atol=1e-6)

    def test_linearity(self, small_cfg, budget):
        tx = synth_frame(small_cfg)
        tgt = Target(100.0, 5.0)
        a = reflect_and_propagate(tx, tgt, small_cfg, budget)
        scaled_tx = IQBuffer(2.5 * tx.samples, tx.rate, tx.t0)
        b = reflect_and_propagate(scaled_tx, tgt, small_cfg, budget)
        np.testing.assert_allclose(b.samples, 2.5 * a.samples, rtol=1e-12)

    def test_power_falls_as_d4(self, budget):
        lam = 0.2
        p1 = two_way_rx_power_dbm(budget, lam, 50.0, 15.0)
        p2 = two_way_rx_power_dbm(budget, lam, 100.0, 15.0)
        assert p1 - p2 == pytest.approx(40 * np.log10(2), rel=1e-12)

    def test_rejects_nonpositive_range(self, small_cfg, budget):
        with pytest.raises(ValueError):
            Target(0.0, 0.0)


class TestOneWay:
    def test_delay(self, small_cfg, budget):
        assert 15.0 / SPEED_OF_LIGHT == pytest.approx(50.03e-9, abs=0.01e-9)
        tx = synth_frame(small_cfg)
        rx = one_way_propagate(tx, 15.0, 0.0, small_cfg, budget)
        shift = round(15.0 / SPEED_OF_LIGHT * small_cfg.sim_rate)
        assert np.all(rx.samples[:shift] == 0)

    def test_inverse_square_loss(self, budget):
        p1 = one_way_rx_power_dbm(budget, 0.2, 20.0)
        p2 = one_way_rx_power_dbm(budget, 0.2, 40.0)
        assert p1 - p2 == pytest.approx(6.0206, abs=1e-3)

    def test_zero_velocity_no_phase_drift(self, small_cfg, budget):
        tx = synth_frame(small_cfg)
        rx = one_way_propagate(tx, 30.0, 0.0, small_cfg, budget)
        spc = small_cfg.samples_per_chirp
        shift = round(30.0 / SPEED_OF_LIGHT * small_cfg.sim_rate)
        blocks = rx.samples[shift:shift + 4 * spc].reshape(4, spc)
        np.testing.assert_allclose(np.diff(np.angle(blocks[:, 32])), 0.0,
                                   atol=1e-12)

    def test_rejects_nonpositive_distance(self, small_cfg, budget):
        with pytest.raises(ValueError):
            one_way_propagate(synth_frame(small_cfg), -1.0, 0.0, small_cfg, budget)


class TestThermalNoise:
    def test_floor_at_25_mhz(self):
        raw = LinkBudget(noise_figure_db=0.0, rx_gain_db=0.0)
        assert noise_power_dbm(25e6, raw) == pytest.approx(-100.02, abs=0.01)

    def test_deterministic_given_seed(self, budget):
        buf = IQBuffer(np.zeros(1000, complex), rate=1e6)
        a = add_thermal_noise(buf, 1e6, budget, 42)
        b = add_thermal_noise(buf, 1e6, budget, 42)
        np.testing.assert_array_equal(a.samples, b.samples)
        c = add_thermal_noise(buf, 1e6, budget, 43)
        assert not np.array_equal(a.samples, c.samples)

    def test_measured_power_matches_configuration(self, budget):
        buf = IQBuffer(np.zeros(1_000_000, complex), rate=25e6)
        out = add_thermal_noise(buf, 25e6, budget, 7)
        measured = np.mean(np.abs(out.samples) ** 2)
        expected = db2lin(noise_power_dbm(25e6, budget))
        assert measured == pytest.approx(expected, rel=0.01)


class TestSampleRcs:
    def test_moments(self):
        rng = np.random.default_rng(1)
        draws = np.array([sample_rcs(rng) for _ in range(100_000)])
        assert draws.mean() == pytest.approx(15.0, abs=0.05)
        assert draws.var() == pytest.approx(5.0, abs=0.2)

    def test_same_seed_same_value(self):
        assert sample_rcs(123) == sample_rcs(123)


class TestSuperpose:
    def test_identity(self):
        buf = IQBuffer(np.arange(5, dtype=complex), 1e6, t0=0.5)
        out = superpose([buf])
        np.testing.assert_array_equal(out.samples, buf.samples)
        assert out.t0 == buf.t0

    def test_cancellation(self):
        buf = IQBuffer(np.arange(5, dtype=complex), 1e6)
        neg = IQBuffer(-buf.samples, 1e6)
        np.testing.assert_array_equal(superpose([buf, neg]).samples, 0.0)

    def test_two_path_interference_amplitude(self):
        # two copies of a tone delayed by k samples sum with the phasor gain
        # |1 + exp(-j 2 pi f k / fs)|
        fs, f0, k = 1e6, 123e3, 7
        n = 4096
        t = np.arange(n) / fs
        tone = IQBuffer(np.exp(2j * np.pi * f0 * t), fs, t0=0.0)
        delayed = IQBuffer(tone.samples, fs, t0=k / fs)
        out = superpose([tone, delayed])
        expected = abs(1 + np.exp(-2j * np.pi * f0 * k / fs))
        mid = out.samples[k: n]  # overlap region
        np.testing.assert_allclose(np.abs(mid), expected, rtol=1e-9)

    def test_union_span_and_zero_fill(self):
        a = IQBuffer(np.ones(4, complex), 1.0, t0=0.0)
        b = IQBuffer(np.ones(4, complex), 1.0, t0=6.0)
        out = superpose([a, b])
        assert len(out) == 10
        np.testing.assert_array_equal(out.samples[4:6], 0.0)

    def test_rate_mismatch_rejected(self):
        a = IQBuffer(np.ones(4, complex), 1.0)
        b = IQBuffer(np.ones(4, complex), 2.0)
        with pytest.raises(ValueError):
            superpose([a, b])

    def test_off_grid_rejected(self):
        a = IQBuffer(np.ones(4, complex), 1.0, t0=0.0)
        b = IQBuffer(np.ones(4, complex), 1.0, t0=0.5)
        with pytest.raises(ValueError):
            superpose([a, b])
