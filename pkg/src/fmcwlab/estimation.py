"""Black-box victim parameter estimation from observed transmissions.

The attacker never sees the victim's configuration: it detects frames by a
rising-power edge, builds a short-time spectrogram of each capture, pulls
(time, frequency) tracks out of it, least-squares fits every chirp's slope
and start, then aggregates across chirps and frames with IQR outlier
rejection.  Frame starts are refined by cross-correlating the first few
microseconds of the capture against a chirp synthesized from the current
slope estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .waveforms import IQBuffer


class NoFrameDetected(RuntimeError):
    """The power-edge frame detector never crossed its threshold."""


class DegenerateTrack(ValueError):
    """A chirp track cannot support a line fit."""


@dataclass
class Spectrogram:
    """STFT magnitude (freq bins x time columns), dB.

    Frequencies span [0, rate) without centre-shift: the victim sweeps upward
    from the attacker's tuning frequency, so the unshifted axis keeps the
    whole ramp monotone.  Column k is stamped at its centre time.
    """

    power_db: np.ndarray
    freqs: np.ndarray
    times: np.ndarray
    rate: float
    window_len: int

    @property
    def hop_s(self) -> float:
        return self.window_len / self.rate

    def col_time(self, k) -> float:
        return self.times[0] + np.asarray(k) * self.hop_s


@dataclass
class ChirpTrack:
    """(time, frequency) points of one detected chirp ramp."""

    times: np.ndarray
    freqs: np.ndarray
    fitted_slope: float | None = None
    fitted_start: float | None = None

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class VictimEstimate:
    """Aggregated estimates of the victim waveform timing."""

    slope: float | None = None          # Hz/s
    t_chirp: float | None = None        # s
    t_frame: float | None = None        # s
    frame_starts: list[float] = field(default_factory=list)
    n_frames_observed: int = 0
    low_confidence: bool = False

    @property
    def complete(self) -> bool:
        return (self.slope is not None and self.t_chirp is not None
                and self.t_frame is not None and self.n_frames_observed >= 2)

    def to_dict(self) -> dict:
        return {
            "slope_hz_per_s": self.slope,
            "t_chirp_s": self.t_chirp,
            "t_frame_s": self.t_frame,
            "frame_starts_s": list(self.frame_starts),
            "n_frames_observed": self.n_frames_observed,
            "low_confidence": self.low_confidence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VictimEstimate":
        return cls(
            slope=d.get("slope_hz_per_s"),
            t_chirp=d.get("t_chirp_s"),
            t_frame=d.get("t_frame_s"),
            frame_starts=list(d.get("frame_starts_s", [])),
            n_frames_observed=int(d.get("n_frames_observed", 0)),
            low_confidence=bool(d.get("low_confidence", False)),
        )


DETECTOR_WINDOW = 16       # samples in the moving-average power window
DETECTOR_THRESHOLD_DB = 10.0


def detect_frame_start(stream: IQBuffer, noise_floor_db: float,
                       window: int = DETECTOR_WINDOW,
                       threshold_db: float = DETECTOR_THRESHOLD_DB) -> int:
    """First index whose trailing moving-average power exceeds the noise
    floor by threshold_db, confirmed one window later (2-window hysteresis)."""
    x = stream.samples
    if len(x) < 2 * window:
        raise NoFrameDetected("stream shorter than the detection window")
    power = np.abs(x) ** 2
    csum = np.concatenate(([0.0], np.cumsum(power)))
    ma = (csum[window:] - csum[:-window]) / window  # ma[i] = mean over [i, i+window)
    thr = 10.0 ** ((noise_floor_db + threshold_db) / 10.0)
    above = ma > thr
    # index reported for ma[i] is the window end i+window-1 (trailing window)
    hits = np.nonzero(above[:-window] & above[window:])[0]
    if len(hits) == 0:
        raise NoFrameDetected("no sustained power rise above the threshold")
    return int(hits[0]) + window - 1


def spectrogram(iq: IQBuffer, window_seconds: float = 2e-6) -> Spectrogram:
    """Hann-windowed STFT with hop = window (no overlap), so the frequency is
    sampled once per window_seconds."""
    w = int(round(window_seconds * iq.rate))
    if w < 2 or len(iq.samples) < w:
        raise ValueError("buffer shorter than one spectrogram window")
    n_cols = len(iq.samples) // w
    frames = iq.samples[: n_cols * w].reshape(n_cols, w)
    spec = np.fft.fft(frames * np.hanning(w)[None, :], axis=1)
    with np.errstate(divide="ignore"):
        power_db = 20.0 * np.log10(np.abs(spec.T))
    freqs = np.arange(w) * iq.rate / w
    times = iq.t0 + (np.arange(n_cols) + 0.5) * w / iq.rate
    return Spectrogram(power_db, freqs, times, iq.rate, w)


def _column_peaks(spec: Spectrogram, prominence_db: float, refine: bool,
                  min_peak_db: float | None) -> list[tuple[int, float]]:
    """(column, frequency) of every column whose peak clears the column
    median by prominence_db (and an optional absolute floor).  Peaks are
    refined to sub-bin accuracy with a three-point parabola on the dB
    magnitudes."""
    db = spec.power_db
    n_bins = db.shape[0]
    peaks = []
    idx = np.argmax(db, axis=0)
    med = np.median(db, axis=0)
    bin_hz = spec.rate / n_bins
    for k in range(db.shape[1]):
        p = idx[k]
        if not np.isfinite(db[p, k]) or not (db[p, k] - med[k] >= prominence_db):
            continue
        if min_peak_db is not None and db[p, k] < min_peak_db:
            continue
        f = spec.freqs[p]
        if refine and 0 < p < n_bins - 1:
            left, mid, right = db[p - 1, k], db[p, k], db[p + 1, k]
            denom = left - 2 * mid + right
            if np.isfinite(denom) and denom < 0:
                delta = 0.5 * (left - right) / denom
                f += float(np.clip(delta, -0.5, 0.5)) * bin_hz
        peaks.append((k, f))
    return peaks


def extract_chirp_tracks(spec: Spectrogram, prominence_db: float = 6.0,
                         max_gap_columns: int = 2, min_points: int = 3,
                         refine_peaks: bool = True, trim_edges: int = 0,
                         min_peak_db: float | None = None,
                         freq_guard_hz: float = 0.0) -> list[ChirpTrack]:
    """Segment column peaks into per-chirp ramps.

    A new track starts when the peak frequency falls by more than half the
    observed band between consecutive columns (ramp reset) or when more than
    max_gap_columns columns had no acceptable peak; tracks shorter than
    min_points are discarded.

    The optional cleanups matter for precision fits: min_peak_db rejects
    columns whose peak is plain noise (the median-prominence rule alone lets
    ~8 dB noise flickers through), freq_guard_hz drops points within a guard
    band of 0 or the sample rate where FFT wrap-around biases the peak, and
    trim_edges drops each track's first/last points, whose windows straddle
    the ramp edges.
    """
    peaks = _column_peaks(spec, prominence_db, refine_peaks, min_peak_db)
    if freq_guard_hz > 0:
        peaks = [(k, f) for k, f in peaks
                 if freq_guard_hz <= f <= spec.rate - freq_guard_hz]
    if not peaks:
        return []
    freqs = np.array([f for _, f in peaks])
    band = float(freqs.max() - freqs.min())
    if band <= 0:
        band = spec.rate
    tracks: list[list[tuple[int, float]]] = [[peaks[0]]]
    for (k_prev, f_prev), (k, f) in zip(peaks, peaks[1:]):
        if (k - k_prev > max_gap_columns + 1) or (f_prev - f > band / 2):
            tracks.append([])
        tracks[-1].append((k, f))
    out = []
    for tr in tracks:
        if trim_edges:
            tr = tr[trim_edges:-trim_edges or None]
        if len(tr) < min_points:
            continue
        cols = np.array([k for k, _ in tr])
        out.append(ChirpTrack(times=spec.col_time(cols),
                              freqs=np.array([f for _, f in tr])))
    return out


def fit_chirp(track: ChirpTrack, f_low: float = 0.0) -> tuple[float, float]:
    """Ordinary least squares of frequency on time.

    Returns (slope, start_time) where the start is the fitted line's crossing
    of f_low, the lower edge of the attacker's band (0 at baseband).
    """
    if len(track) < 3:
        raise DegenerateTrack(f"need >= 3 points, got {len(track)}")
    t = np.asarray(track.times, dtype=float)
    f = np.asarray(track.freqs, dtype=float)
    t_mean = t.mean()
    tc = t - t_mean
    sxx = float(np.dot(tc, tc))
    if sxx == 0.0:
        raise DegenerateTrack("all track points share one timestamp")
    slope = float(np.dot(tc, f - f.mean()) / sxx)
    if slope == 0.0:
        raise DegenerateTrack("flat track has no start time")
    start = t_mean + (f_low - f.mean()) / slope
    track.fitted_slope = slope
    track.fitted_start = start
    return slope, start


def iqr_filter(values) -> np.ndarray:
    """Drop samples outside [Q1 - 1.5*IQR, Q3 + 1.5*IQR].  Fewer than 4
    samples pass through unfiltered.  Idempotent on its own output only when
    reapplication keeps the quartiles; callers apply it once."""
    v = np.asarray(values, dtype=float)
    if len(v) < 4:
        return v
    q1, q3 = np.percentile(v, [25, 75])
    iqr = q3 - q1
    return v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]


def aggregate_estimates(frame_fits: list[list[tuple[float, float]]],
                        frame_start_times: list[float]) -> VictimEstimate:
    """Combine per-chirp fits from every observed frame.

    Slope: IQR-filtered mean over all chirp slopes.  Chirp period: filtered
    mean of consecutive chirp-start differences within each frame.  Frame
    period: filtered mean of consecutive frame-start differences.
    """
    if not frame_fits:
        raise ValueError("need fits from at least one frame")
    slopes = np.array([s for fits in frame_fits for s, _ in fits])
    diffs: list[float] = []
    for fits in frame_fits:
        starts = np.sort([st for _, st in fits])
        diffs.extend(np.diff(starts))
    est = VictimEstimate(n_frames_observed=len(frame_start_times),
                         frame_starts=list(frame_start_times))
    if len(slopes):
        est.slope = float(np.mean(iqr_filter(slopes)))
    if diffs:
        est.t_chirp = float(np.mean(iqr_filter(diffs)))
    if len(frame_start_times) >= 2:
        est.t_frame = float(np.mean(iqr_filter(np.diff(frame_start_times))))
    return est


def refine_frame_start(iq: IQBuffer, est: VictimEstimate, coarse_index: int = 0,
                       margin: int = 256,
                       ref_seconds: float = 10e-6) -> tuple[float, bool]:
    """Cross-correlate the first ref_seconds of the capture against a chirp
    synthesized from the estimated slope; the correlation peak places the
    frame start on the attacker's sample grid.

    Returns (refined start time, confident).  A peak below 3x the RMS of the
    correlation magnitude keeps the coarse estimate and flags low confidence.
    """
    if est.slope is None:
        raise ValueError("refinement needs a slope estimate")
    rate = iq.rate
    n_ref = int(round(ref_seconds * rate))
    t = np.arange(n_ref) / rate
    ref = np.exp(1j * np.pi * est.slope * t * t)
    lo = max(coarse_index - margin, 0)
    hi = min(coarse_index + margin + n_ref, len(iq.samples))
    seg = iq.samples[lo:hi]
    if len(seg) < n_ref:
        return iq.t0 + coarse_index / rate, False
    corr = np.abs(np.correlate(seg, ref, mode="valid"))
    rms = float(np.sqrt(np.mean(corr**2)))
    peak = int(np.argmax(corr))
    if rms == 0.0 or corr[peak] < 3.0 * rms:
        return iq.t0 + coarse_index / rate, False
    return iq.t0 + (lo + peak) / rate, True


def predict_next_frame(est: VictimEstimate, k: int = 1) -> float:
    """Extrapolate the OLS line through (index, frame start) k frames past
    the last observed one.  Exact for perfectly periodic victims."""
    starts = np.asarray(est.frame_starts, dtype=float)
    if len(starts) < 2:
        raise ValueError("prediction needs at least 2 frame starts")
    idx = np.arange(len(starts), dtype=float)
    slope, intercept = np.polyfit(idx, starts, 1)
    return float(intercept + slope * (len(starts) - 1 + k))


def frame_timing_residual_std(est: VictimEstimate) -> float:
    """Standard deviation of the OLS residuals of the frame-start history."""
    starts = np.asarray(est.frame_starts, dtype=float)
    idx = np.arange(len(starts), dtype=float)
    slope, intercept = np.polyfit(idx, starts, 1)
    resid = starts - (intercept + slope * idx)
    return float(np.sqrt(np.sum(resid**2) / max(len(starts) - 2, 1)))


def detect_randomization(est: VictimEstimate, rate: float = 25e6) -> bool:
    """Flag frame-start randomization when the timing residuals exceed
    max(3 sample periods, 0.5 us).  Stand-in for a full hypothesis test; the
    threshold separates quantization-level scatter from deliberate jitter."""
    if len(est.frame_starts) < 5:
        raise ValueError("randomization detection needs >= 5 frame starts")
    threshold = max(3.0 / rate, 0.5e-6)
    return frame_timing_residual_std(est) > threshold


class VictimSensor:
    """Sequential estimation state machine fed one capture per victim frame.

    Each observe() call runs frame detection, track extraction, chirp fits and
    frame-start refinement, then refreshes the aggregate estimate.  Captures
    that never trip the frame detector (or yield no usable tracks) count as
    misses and leave the estimate untouched.
    """

    def __init__(self, noise_floor_db: float, capture_seconds: float = 2.2e-3,
                 window_seconds: float = 2e-6, prominence_db: float = 6.0,
                 peak_gate_db: float = 26.0):
        self.noise_floor_db = noise_floor_db
        self.capture_seconds = capture_seconds
        self.window_seconds = window_seconds
        self.prominence_db = prominence_db
        # spectrogram noise bins sit ~13 dB over the per-sample floor for a
        # 50-sample Hann window; gate column peaks well above their tail
        self.min_peak_db = noise_floor_db + peak_gate_db
        self.frame_fits: list[list[tuple[float, float]]] = []
        self.frame_starts: list[float] = []
        self.low_confidence = False
        self.misses = 0

    def observe(self, capture: IQBuffer) -> bool:
        try:
            coarse = detect_frame_start(capture, self.noise_floor_db)
        except NoFrameDetected:
            self.misses += 1
            return False
        n_keep = int(round(self.capture_seconds * capture.rate))
        frame_part = IQBuffer(capture.samples[coarse: coarse + n_keep],
                              capture.rate, t0=capture.t0 + coarse / capture.rate)
        try:
            spec = spectrogram(frame_part, self.window_seconds)
        except ValueError:
            self.misses += 1
            return False
        bin_hz = capture.rate / spec.window_len
        tracks = extract_chirp_tracks(spec, prominence_db=self.prominence_db,
                                      min_peak_db=self.min_peak_db,
                                      trim_edges=2, freq_guard_hz=2 * bin_hz)
        fits = []
        for tr in tracks:
            try:
                slope, start = fit_chirp(tr)
            except DegenerateTrack:
                continue
            if slope > 0:
                fits.append((slope, start))
        if not fits:
            self.misses += 1
            return False
        self.frame_fits.append(fits)
        prelim = aggregate_estimates(self.frame_fits, self.frame_starts)
        refined, confident = refine_frame_start(capture, prelim, coarse_index=coarse)
        if not confident:
            self.low_confidence = True
        self.frame_starts.append(refined)
        return True

    @property
    def n_frames(self) -> int:
        return len(self.frame_starts)

    @property
    def estimate(self) -> VictimEstimate | None:
        if not self.frame_fits:
            return None
        est = aggregate_estimates(self.frame_fits, self.frame_starts)
        est.low_confidence = self.low_confidence
        return est

    @property
    def ready(self) -> bool:
        est = self.estimate
        return est is not None and est.complete

    def predict_observed_start(self, k: int = 1) -> float:
        """Predicted start of the k-th future frame on the attacker's clock."""
        est = self.estimate
        if est is None:
            raise ValueError("no frames observed yet")
        if len(est.frame_starts) >= 2:
            return predict_next_frame(est, k)
        if est.t_frame is None:
            raise ValueError("cannot predict from a single frame")
        return est.frame_starts[-1] + k * est.t_frame
