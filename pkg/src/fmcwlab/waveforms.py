"""FMCW chirp/frame synthesis and closed-form radar performance metrics.

All signals are complex baseband relative to the carrier f_c: the carrier
never appears in the sampled waveform, it only enters through the wavelength
(Doppler phases, propagation phase).  A chirp sweeps 0..B at slope S for
T_active = B/S seconds and is silent for the rest of the chirp period
(ramp-reset idle).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


class ConfigError(ValueError):
    """Raised when a radar configuration violates its invariants."""


@dataclass(frozen=True)
class RadarConfig:
    """Victim waveform parameters.

    f_c        carrier (chirp start) frequency, Hz
    bandwidth  chirp sweep bandwidth B, Hz
    slope      chirp slope S, Hz/s
    t_chirp    chirp period, s
    n_chirps   chirps per frame
    t_frame    frame period (start to start), s
    f_samp     IF/ADC complex sample rate of the victim receiver, Hz
    sim_rate   waveform simulation sample rate, Hz (complex baseband, so
               sim_rate >= B is enough to represent the sweep)
    """

    f_c: float
    bandwidth: float
    slope: float
    t_chirp: float
    n_chirps: int
    t_frame: float
    f_samp: float
    sim_rate: float

    def __post_init__(self) -> None:
        if self.f_c <= 0:
            raise ConfigError("f_c must be positive")
        if self.bandwidth < 0 or self.slope < 0:
            raise ConfigError("bandwidth and slope must be non-negative")
        if self.t_chirp <= 0 or self.t_frame <= 0:
            raise ConfigError("t_chirp and t_frame must be positive")
        if self.n_chirps < 1:
            raise ConfigError("n_chirps must be >= 1")
        if self.f_samp <= 0 or self.sim_rate <= 0:
            raise ConfigError("sample rates must be positive")
        if self.t_active > self.t_chirp * (1 + 1e-9):
            raise ConfigError(
                f"sweep B/S = {self.t_active:.3e} s does not fit in "
                f"t_chirp = {self.t_chirp:.3e} s"
            )
        if self.n_chirps * self.t_chirp > self.t_frame * (1 + 1e-9):
            raise ConfigError("n_chirps * t_chirp exceeds t_frame")
        if self.sim_rate < self.bandwidth:
            raise ConfigError("sim_rate must be >= bandwidth (aliased sweep)")
        if self.f_samp > self.sim_rate * (1 + 1e-9):
            raise ConfigError("f_samp must be <= sim_rate")

    @property
    def t_active(self) -> float:
        """Sweep duration B/S; a zero-slope chirp is a tone for the whole period."""
        if self.slope == 0:
            return self.t_chirp
        return self.bandwidth / self.slope

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def samples_per_chirp(self) -> int:
        return int(round(self.t_chirp * self.sim_rate))

    @property
    def active_samples(self) -> int:
        return min(int(round(self.t_active * self.sim_rate)), self.samples_per_chirp)

    @property
    def frame_samples(self) -> int:
        return self.n_chirps * self.samples_per_chirp

    @property
    def decimation(self) -> int:
        """Integer decimation factor sim_rate/f_samp used by the victim receiver."""
        ratio = self.sim_rate / self.f_samp
        factor = int(round(ratio))
        if abs(ratio - factor) > 1e-6:
            raise ConfigError(f"sim_rate/f_samp = {ratio!r} is not an integer")
        return factor


@dataclass(frozen=True)
class RadarMetrics:
    """Closed-form performance limits of a configuration."""

    d_res: float  # range resolution, m
    d_max: float  # max unambiguous range given the ADC rate, m
    v_res: float  # velocity resolution, m/s
    v_max: float  # max unambiguous velocity, m/s
    wavelength: float  # m


@dataclass
class IQBuffer:
    """Uniformly sampled complex baseband samples.

    Sample k sits at absolute time t0 + k/rate.  Buffers are treated as
    immutable after construction; operations return new buffers.
    """

    samples: np.ndarray
    rate: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        self.samples = np.asarray(self.samples, dtype=np.complex128)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.rate

    @property
    def t_end(self) -> float:
        return self.t0 + self.duration

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) / self.rate

    def retimed(self, t0: float) -> "IQBuffer":
        """Same samples stamped with a new start time (no copy)."""
        return dataclasses.replace(self, t0=t0)

    def window(self, t_start: float, n: int) -> "IQBuffer":
        """Extract n samples starting at absolute time t_start, zero-padding
        outside the buffer's span."""
        k0 = int(round((t_start - self.t0) * self.rate))
        out = np.zeros(n, dtype=np.complex128)
        src_lo = max(k0, 0)
        src_hi = min(k0 + n, len(self.samples))
        if src_hi > src_lo:
            out[src_lo - k0 : src_hi - k0] = self.samples[src_lo:src_hi]
        return IQBuffer(out, self.rate, t0=self.t0 + k0 / self.rate)


def synth_chirp(cfg: RadarConfig, extra_phase: float = 0.0) -> IQBuffer:
    """One baseband chirp: exp(j(pi*S*t^2 + extra_phase)) over the sweep,
    silent until the chirp period ends."""
    if cfg.sim_rate < cfg.bandwidth:
        raise ConfigError("sim_rate must be >= bandwidth (aliased sweep)")
    n = cfg.samples_per_chirp
    n_act = cfg.active_samples
    t = np.arange(n_act) / cfg.sim_rate
    samples = np.zeros(n, dtype=np.complex128)
    samples[:n_act] = np.exp(1j * (np.pi * cfg.slope * t * t + extra_phase))
    return IQBuffer(samples, cfg.sim_rate)


def synth_frame(cfg: RadarConfig, per_chirp_phases: Sequence[float] | None = None) -> IQBuffer:
    """A frame of n_chirps chirps, chirp n starting at n*t_chirp with its own
    constant phase offset."""
    if per_chirp_phases is None:
        phases = np.zeros(cfg.n_chirps)
    else:
        phases = np.asarray(per_chirp_phases, dtype=float)
        if phases.shape != (cfg.n_chirps,):
            raise ValueError(
                f"need {cfg.n_chirps} per-chirp phases, got {phases.shape}"
            )
    base = synth_chirp(cfg).samples
    samples = (np.exp(1j * phases)[:, None] * base[None, :]).ravel()
    return IQBuffer(samples, cfg.sim_rate)


@lru_cache(maxsize=8)
def cached_tx_frame(cfg: RadarConfig) -> IQBuffer:
    """Zero-phase transmit frame for cfg; shared between calls, do not mutate."""
    return synth_frame(cfg)


def derived_metrics(cfg: RadarConfig) -> RadarMetrics:
    """Range/velocity resolution and unambiguous limits.

    d_max uses the ADC-rate bound f_samp >= 2*S*d_max/c, i.e.
    d_max = f_samp*c/(2S), the form consistent with the IF-frequency
    derivation for complex sampling.
    """
    if cfg.bandwidth <= 0 or cfg.slope <= 0:
        raise ConfigError("metrics need a positive bandwidth and slope")
    lam = cfg.wavelength
    return RadarMetrics(
        d_res=SPEED_OF_LIGHT / (2.0 * cfg.bandwidth),
        d_max=cfg.f_samp * SPEED_OF_LIGHT / (2.0 * cfg.slope),
        v_res=lam / (2.0 * cfg.n_chirps * cfg.t_chirp),
        v_max=lam / (4.0 * cfg.t_chirp),
        wavelength=lam,
    )


MHZ_PER_US = 1e12  # Hz/s per (MHz/us)

# Named victim configurations used throughout the evaluation harness.  The
# published tables only pin the waveform rows (f_c, B, S, T_chirp, N_chirps);
# the IF sample rates below are back-solved from each configuration's stated
# maximum range via d_max = f_samp*c/(2S), and frame periods follow the 33 Hz
# frame-rate assumption for the 77 GHz set.  The 25 MHz desk-scale preset
# keeps sim_rate/f_samp an exact integer (48), which puts its d_max at
# 1561.4 m instead of the nominal 1558.9 m.
CONFIG_PRESETS: dict[str, RadarConfig] = {
    # Config A's published B (27.81 MHz) slightly exceeds S*T_chirp; clip the
    # sweep to the chirp period so the waveform is realizable.
    "table2-A": RadarConfig(
        f_c=77.0e9, bandwidth=1.15 * MHZ_PER_US * 24.11e-6, slope=1.15 * MHZ_PER_US,
        t_chirp=24.11e-6, n_chirps=128, t_frame=1 / 33.0,
        f_samp=3.675e6, sim_rate=27.81e6,
    ),
    "table2-B": RadarConfig(
        f_c=77.0e9, bandwidth=96.31e6, slope=4.04 * MHZ_PER_US,
        t_chirp=23.85e-6, n_chirps=256, t_frame=1 / 33.0,
        f_samp=7.383e6, sim_rate=96.31e6,
    ),
    # Config C's published B overshoots S*T_chirp by 5e-6 relative; clip.
    "table2-C": RadarConfig(
        f_c=77.0e9, bandwidth=47.85 * MHZ_PER_US * 20.93e-6, slope=47.85 * MHZ_PER_US,
        t_chirp=20.93e-6, n_chirps=256, t_frame=1 / 33.0,
        f_samp=70.0e6, sim_rate=1001.51e6,
    ),
    "table2-D": RadarConfig(
        f_c=77.0e9, bandwidth=3935.0e6, slope=187.96 * MHZ_PER_US,
        t_chirp=21.63e-6, n_chirps=256, t_frame=1 / 33.0,
        f_samp=280.0e6, sim_rate=3935.0e6,
    ),
    "table4": RadarConfig(
        f_c=1.5e9, bandwidth=25.0e6, slope=0.05 * MHZ_PER_US,
        t_chirp=501.12e-6, n_chirps=256, t_frame=150e-3,
        f_samp=25.0e6 / 48, sim_rate=25.0e6,
    ),
}
