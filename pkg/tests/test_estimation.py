"""Black-box parameter estimation: frame detection, spectrogram, chirp
tracks, fits, aggregation, refinement, prediction, randomization test."""

import numpy as np
import pytest

from fmcwlab.channel import (LinkBudget, add_thermal_noise, noise_power_dbm,
                             one_way_propagate)
from fmcwlab.estimation import (ChirpTrack, DegenerateTrack, NoFrameDetected,
                                VictimEstimate, VictimSensor,
                                aggregate_estimates, detect_frame_start,
                                detect_randomization, extract_chirp_tracks,
                                fit_chirp, iqr_filter, predict_next_frame,
                                refine_frame_start, spectrogram)
from fmcwlab.waveforms import (MHZ_PER_US, SPEED_OF_LIGHT, IQBuffer,
                               RadarConfig, synth_frame)

RATE = 25e6
FLOOR_DB = -30.0  # unit tests use a synthetic -30 dB noise floor


def noise(n, rng, power_db=FLOOR_DB):
    sigma = np.sqrt(10 ** (power_db / 10) / 2)
    return sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def chirp_samples(slope, n, rate=RATE):
    t = np.arange(n) / rate
    return np.exp(1j * np.pi * slope * t * t)


class TestDetectFrameStart:
    def test_pure_noise_raises(self, rng):
        stream = IQBuffer(noise(50_000, rng), RATE)
        with pytest.raises(NoFrameDetected):
            detect_frame_start(stream, FLOOR_DB)

    def test_buried_chirp_found_within_one_window(self, rng):
        lead = noise(10_000, rng)
        sig = 10 ** (20 / 20) * np.sqrt(10 ** (FLOOR_DB / 10)) \
            * chirp_samples(0.1 * MHZ_PER_US, 30_000)
        stream = IQBuffer(np.concatenate([lead, sig + noise(30_000, rng)]), RATE)
        idx = detect_frame_start(stream, FLOOR_DB)
        assert 10_000 <= idx <= 10_016

    def test_chirp_at_origin(self, rng):
        sig = 100 * np.sqrt(10 ** (FLOOR_DB / 10)) \
            * chirp_samples(0.1 * MHZ_PER_US, 20_000)
        stream = IQBuffer(sig + noise(20_000, rng), RATE)
        assert detect_frame_start(stream, FLOOR_DB) <= 16


class TestSpectrogram:
    def test_constant_tone_peaks_at_its_bin(self):
        f0 = 4.5e6
        t = np.arange(10_000) / RATE
        spec = spectrogram(IQBuffer(np.exp(2j * np.pi * f0 * t), RATE))
        peaks = np.argmax(spec.power_db, axis=0)
        assert np.all(peaks == round(f0 / (RATE / spec.window_len)))

    def test_chirp_advances_one_mhz_per_column(self):
        # S = 0.5 MHz/us with 2 us columns: +1.0 MHz per column
        slope = 0.5 * MHZ_PER_US
        spec = spectrogram(IQBuffer(chirp_samples(slope, 1000), RATE))
        peak_freqs = spec.freqs[np.argmax(spec.power_db, axis=0)]
        steps = np.diff(peak_freqs)
        np.testing.assert_allclose(steps, 1.0e6, atol=0.26e6)  # half-bin quant

    def test_silence_is_floor(self):
        spec = spectrogram(IQBuffer(np.zeros(1000, complex), RATE))
        assert np.all(np.isneginf(spec.power_db))

    def test_short_buffer_rejected(self):
        with pytest.raises(ValueError):
            spectrogram(IQBuffer(np.ones(10, complex), RATE))

    def test_column_times_affine(self):
        spec = spectrogram(IQBuffer(np.ones(1000, complex), RATE, t0=1.0))
        assert spec.col_time(0) == pytest.approx(1.0 + 25e-9 * 50 / 50 + 9.75e-7)
        assert spec.col_time(3) - spec.col_time(2) == pytest.approx(spec.hop_s)


class TestExtractTracks:
    def test_single_chirp_forty_columns(self):
        slope = 0.2 * MHZ_PER_US  # sweeps 16 MHz over 80 us = 40 columns
        n = 40 * 50
        spec = spectrogram(IQBuffer(chirp_samples(slope, n), RATE))
        tracks = extract_chirp_tracks(spec)
        assert len(tracks) == 1
        assert len(tracks[0]) == 40

    def test_two_chirps_split_at_ramp_reset(self):
        slope = 0.2 * MHZ_PER_US
        t_chirp = 100e-6
        spc = int(t_chirp * RATE)
        one = chirp_samples(slope, spc)
        spec = spectrogram(IQBuffer(np.concatenate([one, one]), RATE))
        tracks = extract_chirp_tracks(spec)
        assert len(tracks) == 2
        s0, start0 = fit_chirp(tracks[0])
        s1, start1 = fit_chirp(tracks[1])
        assert start1 - start0 == pytest.approx(t_chirp, abs=1e-6)

    def test_noise_only_yields_no_tracks(self, rng):
        spec = spectrogram(IQBuffer(noise(5000, rng), RATE))
        # the absolute power gate is what rejects noise flickers
        tracks = extract_chirp_tracks(spec, min_peak_db=FLOOR_DB + 26.0)
        assert tracks == []


class TestFitChirp:
    def test_exact_line_recovered(self):
        t = np.arange(40) * 2e-6
        f = 5e11 * t - 100e3
        slope, start = fit_chirp(ChirpTrack(times=t, freqs=f))
        assert slope == pytest.approx(5e11, rel=1e-12)
        assert start == pytest.approx(2e-7, rel=1e-9)

    def test_quantized_points_keep_slope_within_half_percent(self, rng):
        # +-half-bin frequency quantization, 40 points, 500 kHz bins
        m, dt = 40, 2e-6
        t = np.arange(m) * dt
        true_slope = 0.3 * MHZ_PER_US
        errs = []
        for _ in range(300):
            f = true_slope * t + rng.uniform(-250e3, 250e3, size=m)
            slope, _ = fit_chirp(ChirpTrack(times=t, freqs=f))
            errs.append((slope - true_slope) / true_slope)
        rms = float(np.sqrt(np.mean(np.square(errs))))
        # OLS slope-variance oracle for uniform quantization noise
        sigma_f = 500e3 / np.sqrt(12)
        predicted = sigma_f * np.sqrt(12 / (m * (m**2 - 1))) / dt / true_slope
        assert rms == pytest.approx(predicted, rel=0.3)
        assert rms < 0.005

    def test_too_few_points(self):
        with pytest.raises(DegenerateTrack):
            fit_chirp(ChirpTrack(times=np.array([0.0, 1.0]),
                                 freqs=np.array([0.0, 1.0])))

    def test_degenerate_times(self):
        with pytest.raises(DegenerateTrack):
            fit_chirp(ChirpTrack(times=np.zeros(5), freqs=np.arange(5.0)))


class TestAggregate:
    def test_iqr_drops_textbook_outlier(self):
        fits = [[(10.0, 0.0), (10.0, 1.0), (10.0, 2.0), (10.0, 3.0),
                 (100.0, 4.0)]]
        est = aggregate_estimates(fits, [0.0])
        assert est.slope == pytest.approx(10.0)

    def test_frame_period_from_starts(self):
        fits = [[(1.0, 0.0)]] * 3
        est = aggregate_estimates(fits, [0.0, 30e-3, 60e-3])
        assert est.t_frame == pytest.approx(30e-3)

    def test_chirp_period_from_within_frame_diffs(self):
        fits = [[(1.0, 0.0), (1.0, 1e-4), (1.0, 2e-4)],
                [(1.0, 5.0), (1.0, 5.0 + 1.1e-4)]]
        est = aggregate_estimates(fits, [0.0, 5.0])
        diffs = [1e-4, 1e-4, 1.1e-4]
        assert est.t_chirp == pytest.approx(np.mean(diffs))

    def test_iqr_filter_idempotent(self, rng):
        v = np.concatenate([rng.normal(0, 1, 50), [40.0, -35.0]])
        once = iqr_filter(v)
        twice = iqr_filter(once)
        np.testing.assert_array_equal(once, twice)

    def test_small_samples_skip_filter(self):
        np.testing.assert_array_equal(iqr_filter([1.0, 100.0, 2.0]),
                                      [1.0, 100.0, 2.0])


class TestRefineFrameStart:
    def test_zero_offset_autocorrelation(self):
        slope = 0.2 * MHZ_PER_US
        cap = IQBuffer(chirp_samples(slope, 2000), RATE)
        est = VictimEstimate(slope=slope)
        t, confident = refine_frame_start(cap, est)
        assert confident
        assert t == pytest.approx(0.0, abs=1e-12)

    def test_known_offset_recovered_within_one_sample(self, rng):
        slope = 0.2 * MHZ_PER_US
        offset = 173
        sig = np.concatenate([np.zeros(offset, complex),
                              chirp_samples(slope, 4000)])
        sig = 10 * np.sqrt(10 ** (FLOOR_DB / 10)) * sig + noise(len(sig), rng)
        cap = IQBuffer(sig, RATE)
        t, confident = refine_frame_start(cap, VictimEstimate(slope=slope),
                                          coarse_index=offset + 9)
        assert confident
        assert abs(t - offset / RATE) <= 1 / RATE

    def test_noise_only_flags_low_confidence(self, rng):
        cap = IQBuffer(noise(4000, rng), RATE)
        t, confident = refine_frame_start(cap, VictimEstimate(slope=1e11),
                                          coarse_index=100)
        assert not confident
        assert t == pytest.approx(100 / RATE)


class TestPredict:
    def test_periodic_is_exact(self):
        est = VictimEstimate(frame_starts=[0.0, 30e-3, 60e-3])
        assert predict_next_frame(est, 1) == pytest.approx(90e-3, abs=1e-15)

    def test_timing_error_maps_to_three_metres(self):
        # Eq: range error = c * t_err / 2; 20 ns -> ~3 m
        assert SPEED_OF_LIGHT * 20e-9 / 2 == pytest.approx(3.0, abs=0.002)

    def test_jittered_prediction_residual(self):
        rng = np.random.default_rng(8)
        bad = 0
        for _ in range(200):
            starts = 30e-3 * np.arange(6) + rng.normal(0, 1e-6, 6)
            pred = predict_next_frame(VictimEstimate(frame_starts=list(starts)), 1)
            if abs(pred - 6 * 30e-3) > 3e-6:
                bad += 1
        assert bad / 200 <= 0.05

    def test_needs_two_starts(self):
        with pytest.raises(ValueError):
            predict_next_frame(VictimEstimate(frame_starts=[0.0]), 1)


class TestDetectRandomization:
    def test_periodic_not_flagged(self):
        est = VictimEstimate(frame_starts=list(30e-3 * np.arange(6)))
        assert not detect_randomization(est, rate=RATE)

    def test_gaussian_jitter_flagged(self):
        rng = np.random.default_rng(3)
        flagged = 0
        for _ in range(100):
            starts = 30e-3 * np.arange(6) + rng.normal(0, 1e-6, 6)  # 3sig=3us
            flagged += detect_randomization(
                VictimEstimate(frame_starts=list(starts)), rate=RATE)
        assert flagged >= 95

    def test_single_sample_jitter_not_flagged(self):
        rng = np.random.default_rng(4)
        flagged = 0
        for _ in range(100):
            starts = 30e-3 * np.arange(6) + rng.normal(0, 1 / RATE, 6)
            flagged += detect_randomization(
                VictimEstimate(frame_starts=list(starts)), rate=RATE)
        assert flagged <= 10

    def test_needs_five_starts(self):
        with pytest.raises(ValueError):
            detect_randomization(VictimEstimate(frame_starts=[0.0, 1.0]), RATE)


class TestVictimSensor:
    def test_converges_on_synthetic_victim(self, budget):
        cfg = RadarConfig(f_c=1.5e9, bandwidth=20e6, slope=0.25 * MHZ_PER_US,
                          t_chirp=round(120e-6 * RATE) / RATE, n_chirps=32,
                          t_frame=20e-3, f_samp=RATE, sim_rate=RATE)
        floor = noise_power_dbm(RATE, budget)
        sensor = VictimSensor(noise_floor_db=floor)
        tx = synth_frame(cfg)
        pre = 0.8e-3
        n_cap = int((pre + 2.6e-3) * RATE)
        for k in range(6):
            t_true = k * cfg.t_frame
            src = tx.retimed(t_true).window(t_true - pre, n_cap)
            obs = one_way_propagate(src, 40.0, 3.0, cfg, budget)
            cap = add_thermal_noise(obs, RATE, budget, (77, k))
            assert sensor.observe(cap)
        est = sensor.estimate
        assert est is not None and est.complete
        assert abs(est.slope - cfg.slope) / cfg.slope < 0.005
        assert abs(est.t_chirp - cfg.t_chirp) <= 40e-9
        assert est.t_frame == pytest.approx(cfg.t_frame, abs=1e-6)
        # next observed start: frame start plus the one-way flight time
        pred = sensor.predict_observed_start(1)
        truth = 6 * cfg.t_frame + (40.0 + 3.0 * 6 * cfg.t_frame) / SPEED_OF_LIGHT
        assert abs(pred - truth) <= 2e-6

    def test_noise_only_counts_as_miss(self, budget):
        floor = noise_power_dbm(RATE, budget)
        sensor = VictimSensor(noise_floor_db=floor)
        cap = IQBuffer(np.zeros(100_000, complex), RATE)
        cap = add_thermal_noise(cap, RATE, budget, 1)
        assert not sensor.observe(cap)
        assert sensor.misses == 1
        assert sensor.estimate is None
