"""The five-step victim processing chain: dechirp to IF, Range-Doppler map,
CA-CFAR detection and DBSCAN clustering."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage, signal
from sklearn.cluster import DBSCAN

from .waveforms import SPEED_OF_LIGHT, IQBuffer, RadarConfig, cached_tx_frame

LPF_TAPS = 64
LPF_CUTOFF = 0.45  # fraction of f_samp


@dataclass(frozen=True)
class CfarConfig:
    """2D cell-averaging CFAR geometry: training/guard cells per side on the
    range and doppler axes, and the design false-alarm probability.

    The default pfa is deliberately low: window leakage and FFT zero-padding
    correlate neighbouring cells, so a single noise exceedance lights up a
    blob large enough to satisfy the clusterer's min_pts.  Desk-scale SNRs
    run tens of dB past even this threshold, so detection is unaffected.
    """

    train_r: int = 8
    train_d: int = 4
    guard_r: int = 4
    guard_d: int = 2
    pfa: float = 1e-8

    def __post_init__(self) -> None:
        if self.train_r < 1 or self.train_d < 1:
            raise ValueError("need at least one training cell per side")
        if self.guard_r < 0 or self.guard_d < 0:
            raise ValueError("guard cells must be non-negative")
        if not 0 < self.pfa < 1:
            raise ValueError("pfa must be in (0, 1)")

    @property
    def n_train(self) -> int:
        outer = (2 * (self.train_r + self.guard_r) + 1) * (2 * (self.train_d + self.guard_d) + 1)
        inner = (2 * self.guard_r + 1) * (2 * self.guard_d + 1)
        return outer - inner

    @property
    def alpha(self) -> float:
        """Threshold multiplier N*(pfa^(-1/N) - 1) for exponential noise."""
        n = self.n_train
        return n * (self.pfa ** (-1.0 / n) - 1.0)


@dataclass(frozen=True)
class ClusterConfig:
    """DBSCAN parameters in (range bin, doppler bin) space."""

    eps: float = 3.0
    min_pts: int = 3

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")


class DetectionPoint(NamedTuple):
    range_bin: int
    doppler_bin: int
    magnitude_db: float


@dataclass
class Cluster:
    """A detected object: member points, physical centroid and peak power."""

    points: list[DetectionPoint]
    range_m: float
    velocity_mps: float
    peak_power_db: float

    @property
    def n_points(self) -> int:
        return len(self.points)


@dataclass
class IFMatrix:
    """Dechirped IF samples, one row per chirp, at the victim's ADC rate."""

    data: np.ndarray  # (n_chirps, n_cols) complex
    cfg: RadarConfig

    def __post_init__(self) -> None:
        if self.data.ndim != 2 or self.data.shape[0] != self.cfg.n_chirps:
            raise ValueError("IF matrix must have one row per chirp")


@dataclass
class RangeDopplerMap:
    """Magnitude map (range bins x doppler bins, dB) with affine bin maps.

    Range bin i sits at i * range_bin_spacing metres (the spacing equals
    d_res * n_cols/n_fft because of FFT zero-padding); doppler bin j maps to
    (j - n_doppler/2) * v_res, spanning [-v_max, +v_max).  Range bins beyond
    n_valid_range are outside the receiver's anti-alias passband and carry no
    usable signal.
    """

    magnitude_db: np.ndarray
    range_bin_spacing: float
    velocity_bin_spacing: float
    cfg: RadarConfig = field(repr=False)
    n_valid_range: int | None = None

    @property
    def n_range(self) -> int:
        return self.magnitude_db.shape[0]

    @property
    def n_doppler(self) -> int:
        return self.magnitude_db.shape[1]

    def bin_to_range(self, i) -> float:
        return i * self.range_bin_spacing

    def bin_to_velocity(self, j) -> float:
        return (j - self.n_doppler // 2) * self.velocity_bin_spacing

    def range_to_bin(self, d: float) -> float:
        return d / self.range_bin_spacing

    def velocity_to_bin(self, v: float) -> float:
        return v / self.velocity_bin_spacing + self.n_doppler // 2

    def to_csv(self, path) -> None:
        """Debug dump, one row per range bin."""
        np.savetxt(path, self.magnitude_db, delimiter=",", fmt="%.3f")


def analytic_if_oracle(target, cfg: RadarConfig) -> tuple[float, float]:
    """Closed-form IF tone frequency and chirp-to-chirp Doppler phase for a
    point target: f_IF = 2*S*d0/c, phi = 4*pi*v*T_chirp/lambda.  Test oracle
    for the sampled pipeline."""
    f_if = 2.0 * cfg.slope * target.d0 / SPEED_OF_LIGHT
    phi = 4.0 * np.pi * target.v * cfg.t_chirp / cfg.wavelength
    return f_if, phi


def _lpf_taps(cfg: RadarConfig) -> np.ndarray:
    return signal.firwin(LPF_TAPS, LPF_CUTOFF * cfg.f_samp, fs=cfg.sim_rate)


def dechirp(tx_frame: IQBuffer, rx_frame: IQBuffer, cfg: RadarConfig) -> IFMatrix:
    """Mix the transmit frame with the received frame, low-pass at the ADC
    band and decimate sim_rate -> f_samp.

    The mixer output x*conj(y) turns each echo into a tone at f_IF = S*t_d;
    the windowed-sinc FIR (cutoff 0.45*f_samp) removes chirp-boundary mixing
    products and echoes beyond the ADC band, then the stream is decimated and
    sliced into per-chirp rows over the active sweep.
    """
    if tx_frame.rate != rx_frame.rate:
        raise ValueError("tx/rx sample-rate mismatch")
    if abs(tx_frame.t0 - rx_frame.t0) * tx_frame.rate > 1e-3:
        raise ValueError("tx/rx frames are not aligned to the frame start")
    n_frame = cfg.frame_samples
    if len(tx_frame) < n_frame:
        raise ValueError("tx frame shorter than n_chirps * t_chirp")
    rx = rx_frame.samples
    if len(rx) < n_frame:
        rx = np.pad(rx, (0, n_frame - len(rx)))
    mixed = tx_frame.samples[:n_frame] * np.conj(rx[:n_frame])

    factor = cfg.decimation
    spc_if, rem = divmod(cfg.samples_per_chirp, factor)
    if rem:
        raise ValueError("samples per chirp must be divisible by the decimation factor")
    dec = signal.resample_poly(mixed, up=1, down=factor, window=_lpf_taps(cfg))
    n_cols = int(np.floor(cfg.t_active * cfg.f_samp))
    rows = dec[: cfg.n_chirps * spc_if].reshape(cfg.n_chirps, spc_if)[:, :n_cols]
    return IFMatrix(np.ascontiguousarray(rows), cfg)


def range_doppler(ifm: IFMatrix) -> RangeDopplerMap:
    """2D FFT of the IF matrix: Hann-windowed range FFT (zero-padded to the
    next power of two) per chirp, then a Hann-windowed doppler FFT across
    chirps, centre-shifted.  Magnitude in dB.

    Both axes are windowed: an unwindowed doppler axis leaves a -13 dB
    sidelobe continuum along the range row of any strong return, which the
    cell-averaging detector then chases into strings of false detections.
    """
    data = ifm.data
    if data.size == 0:
        raise ValueError("empty IF matrix")
    cfg = ifm.cfg
    n_cols = data.shape[1]
    n_fft = 1 << (n_cols - 1).bit_length()
    win = np.hanning(n_cols)
    rng_fft = np.fft.fft(data * win[None, :], n=n_fft, axis=1)
    dwin = np.hanning(data.shape[0])
    dop = np.fft.fftshift(np.fft.fft(rng_fft * dwin[:, None], axis=0), axes=0)
    mag = np.abs(dop.T)
    with np.errstate(divide="ignore"):
        mag_db = 20.0 * np.log10(mag)
    range_spacing = cfg.f_samp * SPEED_OF_LIGHT / (2.0 * cfg.slope * n_fft)
    v_res = cfg.wavelength / (2.0 * cfg.n_chirps * cfg.t_chirp)
    n_valid = min(int(LPF_CUTOFF * n_fft), n_fft)
    return RangeDopplerMap(mag_db, range_spacing, v_res, cfg, n_valid_range=n_valid)


def ca_cfar(rd_map: RangeDopplerMap, cfar: CfarConfig) -> list[DetectionPoint]:
    """2D cell-averaging CFAR on linear power.

    noise = mean of the training cells (outer window minus guard block),
    threshold = alpha * noise.  Cells whose training window falls off the map
    are never detections, which induces the minimum detection range.
    """
    half_r = cfar.train_r + cfar.guard_r
    half_d = cfar.train_d + cfar.guard_d
    db = rd_map.magnitude_db
    if db.shape[0] <= 2 * half_r or db.shape[1] <= 2 * half_d:
        raise ValueError("CFAR window exceeds the map")
    power = 10.0 ** (db / 10.0)
    outer_size = (2 * half_r + 1, 2 * half_d + 1)
    inner_size = (2 * cfar.guard_r + 1, 2 * cfar.guard_d + 1)
    outer = ndimage.uniform_filter(power, size=outer_size, mode="constant") \
        * (outer_size[0] * outer_size[1])
    inner = ndimage.uniform_filter(power, size=inner_size, mode="constant") \
        * (inner_size[0] * inner_size[1])
    noise = (outer - inner) / cfar.n_train
    hits = power > cfar.alpha * noise
    hits[:half_r, :] = False
    hits[-half_r:, :] = False
    hits[:, :half_d] = False
    hits[:, -half_d:] = False
    if rd_map.n_valid_range is not None:
        hits[rd_map.n_valid_range:, :] = False
    r_idx, d_idx = np.nonzero(hits)
    return [DetectionPoint(int(r), int(d), float(db[r, d]))
            for r, d in zip(r_idx, d_idx)]


def dbscan_cluster(points: list[DetectionPoint], eps: float, min_pts: int,
                   rd_map: RangeDopplerMap) -> list[Cluster]:
    """Group detection points into objects by density; isolated points are
    noise and dropped.  Centroids are magnitude-weighted means of the member
    bins, mapped to metres and m/s."""
    if eps <= 0 or min_pts < 1:
        raise ValueError("eps must be > 0 and min_pts >= 1")
    if not points:
        return []
    xy = np.array([(p.range_bin, p.doppler_bin) for p in points], dtype=float)
    labels = DBSCAN(eps=eps, min_samples=min_pts).fit(xy).labels_
    clusters = []
    for label in sorted(set(labels) - {-1}):
        members = [p for p, l in zip(points, labels) if l == label]
        w = np.array([10.0 ** (p.magnitude_db / 20.0) for p in members])
        rb = np.array([p.range_bin for p in members], dtype=float)
        db_ = np.array([p.doppler_bin for p in members], dtype=float)
        r_c = float(np.average(rb, weights=w))
        d_c = float(np.average(db_, weights=w))
        clusters.append(Cluster(
            points=members,
            range_m=rd_map.bin_to_range(r_c),
            velocity_mps=rd_map.bin_to_velocity(d_c),
            peak_power_db=max(p.magnitude_db for p in members),
        ))
    return clusters


def process_frame(rx: IQBuffer, cfg: RadarConfig, cfar: CfarConfig,
                  cluster_cfg: ClusterConfig) -> list[Cluster]:
    """Full victim chain on one received frame: dechirp -> Range-Doppler ->
    CA-CFAR -> DBSCAN.  The victim mixes against its own transmit frame."""
    tx = cached_tx_frame(cfg).retimed(rx.t0)
    ifm = dechirp(tx, rx, cfg)
    rd_map = range_doppler(ifm)
    points = ca_cfar(rd_map, cfar)
    return dbscan_cluster(points, cluster_cfg.eps, cluster_cfg.min_pts, rd_map)
