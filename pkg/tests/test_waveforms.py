"""Chirp/frame synthesis and closed-form metrics."""

import numpy as np
import pytest

from fmcwlab.waveforms import (CONFIG_PRESETS, MHZ_PER_US, SPEED_OF_LIGHT,
                               ConfigError, IQBuffer, RadarConfig,
                               derived_metrics, synth_chirp, synth_frame)


def make_cfg(**overrides) -> RadarConfig:
    base = dict(f_c=77e9, bandwidth=150e6, slope=15 * MHZ_PER_US, t_chirp=12e-6,
                n_chirps=16, t_frame=1e-3, f_samp=15e6, sim_rate=150e6)
    base.update(overrides)
    return RadarConfig(**base)


class TestRadarConfig:
    def test_invariants_enforced(self):
        with pytest.raises(ConfigError):
            make_cfg(slope=10 * MHZ_PER_US)  # sweep longer than chirp period
        with pytest.raises(ConfigError):
            make_cfg(t_frame=100e-6)  # frame shorter than n_chirps * t_chirp
        with pytest.raises(ConfigError):
            make_cfg(sim_rate=100e6)  # aliased sweep
        with pytest.raises(ConfigError):
            make_cfg(f_samp=200e6)  # ADC faster than the simulation

    def test_zero_slope_is_a_tone_for_the_whole_period(self):
        cfg = make_cfg(slope=0.0, bandwidth=0.0)
        assert cfg.t_active == cfg.t_chirp


class TestSynthChirp:
    def test_zero_slope_chirp_is_constant_one(self):
        cfg = make_cfg(slope=0.0, bandwidth=0.0)
        buf = synth_chirp(cfg)
        np.testing.assert_allclose(buf.samples, 1.0 + 0.0j)

    def test_phase_matches_quadratic_law(self):
        # sample at t = 10 us must carry phase pi*S*t^2 (mod 2pi)
        cfg = make_cfg(f_c=1.5e9, bandwidth=25e6, slope=0.05 * MHZ_PER_US,
                       t_chirp=501.12e-6, n_chirps=4, t_frame=3e-3,
                       f_samp=25e6, sim_rate=25e6)
        buf = synth_chirp(cfg)
        t = 10e-6
        k = round(t * cfg.sim_rate)
        expected = np.exp(1j * np.pi * cfg.slope * t * t)
        assert buf.samples[k] == pytest.approx(expected, abs=1e-12)

    def test_extra_phase_pi_negates(self):
        cfg = make_cfg()
        a = synth_chirp(cfg, extra_phase=0.0)
        b = synth_chirp(cfg, extra_phase=np.pi)
        np.testing.assert_allclose(b.samples, -a.samples, atol=1e-12)

    def test_silent_after_active_sweep(self):
        cfg = make_cfg(slope=30 * MHZ_PER_US, bandwidth=180e6, sim_rate=180e6)
        buf = synth_chirp(cfg)
        n_act = cfg.active_samples
        assert np.all(buf.samples[n_act:] == 0)
        assert np.all(np.abs(buf.samples[:n_act]) == pytest.approx(1.0))

    def test_instantaneous_frequency_tracks_slope(self):
        # discrete phase difference / (2 pi dt) must recover S*t within 1%
        cfg = make_cfg()
        buf = synth_chirp(cfg)
        n_act = cfg.active_samples
        dphase = np.angle(buf.samples[1:n_act] / buf.samples[:n_act - 1])
        # complex sampling represents frequencies modulo the sample rate
        inst = (dphase * cfg.sim_rate / (2 * np.pi)) % cfg.sim_rate
        t_mid = (np.arange(n_act - 1) + 0.5) / cfg.sim_rate
        interior = slice(n_act // 10, -n_act // 10)
        np.testing.assert_allclose(inst[interior],
                                   cfg.slope * t_mid[interior], rtol=0.01)


class TestSynthFrame:
    def test_identical_chirps(self):
        cfg = make_cfg(n_chirps=2)
        buf = synth_frame(cfg)
        spc = cfg.samples_per_chirp
        np.testing.assert_array_equal(buf.samples[:spc], buf.samples[spc:])

    def test_table4_frame_duration(self):
        cfg = CONFIG_PRESETS["table4"]
        buf = synth_frame(cfg)
        assert buf.duration == pytest.approx(256 * 501.12e-6, rel=1e-9)
        assert buf.duration == pytest.approx(128.287e-3, rel=1e-4)

    def test_per_chirp_phase_progression(self):
        cfg = make_cfg(n_chirps=8)
        phi = 0.6755
        buf = synth_frame(cfg, per_chirp_phases=[n * phi for n in range(8)])
        ref = synth_frame(cfg)
        spc = cfg.samples_per_chirp
        for n in range(8):
            np.testing.assert_allclose(
                buf.samples[n * spc:(n + 1) * spc],
                ref.samples[:spc] * np.exp(1j * n * phi), atol=1e-12)

    def test_phase_list_length_mismatch(self):
        with pytest.raises(ValueError):
            synth_frame(make_cfg(n_chirps=4), per_chirp_phases=[0.0] * 3)

    def test_deterministic(self):
        cfg = make_cfg()
        a, b = synth_frame(cfg), synth_frame(cfg)
        np.testing.assert_array_equal(a.samples, b.samples)


class TestDerivedMetrics:
    def test_exact_one_metre_resolution(self):
        # B = c/2 Hz makes d_res exactly 1 m
        cfg = make_cfg(bandwidth=149_896_229.0, slope=149_896_229.0 / 12e-6,
                       sim_rate=150e6)
        assert derived_metrics(cfg).d_res == 1.0

    def test_table2_c_velocity_numbers(self):
        cfg = CONFIG_PRESETS["table2-C"]
        m = derived_metrics(cfg)
        lam = SPEED_OF_LIGHT / 77e9
        assert m.v_res == pytest.approx(lam / (2 * 256 * 20.93e-6), rel=1e-12)
        assert m.v_res == pytest.approx(0.3633, abs=2e-4)
        assert m.v_max == pytest.approx(46.51, abs=0.02)

    def test_doubling_bandwidth_halves_resolution(self):
        a = derived_metrics(make_cfg())
        b = derived_metrics(make_cfg(bandwidth=300e6, slope=30 * MHZ_PER_US,
                                     sim_rate=300e6))
        assert b.d_res == pytest.approx(a.d_res / 2, rel=1e-12)

    def test_metric_identities(self):
        for name, cfg in CONFIG_PRESETS.items():
            m = derived_metrics(cfg)
            assert m.d_res * 2 * cfg.bandwidth == pytest.approx(
                SPEED_OF_LIGHT, rel=1e-12), name
            assert m.v_max == pytest.approx(cfg.n_chirps * m.v_res / 2,
                                            rel=1e-12), name
            assert m.v_res < m.v_max


class TestIQBuffer:
    def test_time_indexing(self):
        buf = IQBuffer(np.ones(10, complex), rate=1e6, t0=1.0)
        assert buf.times()[3] == pytest.approx(1.0 + 3e-6)
        assert buf.duration == pytest.approx(10e-6)

    def test_window_zero_pads(self):
        buf = IQBuffer(np.arange(5, dtype=complex), rate=1.0, t0=0.0)
        w = buf.window(-2.0, 5)
        np.testing.assert_array_equal(w.samples, [0, 0, 0, 1, 2])
        assert w.t0 == -2.0
