"""Attack waveform synthesis from a victim estimate.

Four attack families, all built from the same delayed-chirp primitive:
false-positive (inject a fake object), false-negative (smear clutter over a
real object so CA-CFAR loses it), translation (both at once), and jamming
(an FN smeared over the whole detection region).

Doppler sign: the victim mixes s_IF = x * conj(y), so a phase the attacker
ADDS to its chirp shows up NEGATED in the victim's IF signal.  The per-chirp
phase schedules below are therefore the negative of the nominal
4*pi/lambda * (v_spoof - v_atk/2) * T_chirp * n progression; combined with
the one-way path's own Doppler the victim recovers exactly +v_spoof.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LinkBudget, db2lin, one_way_rx_power_dbm, two_way_rx_power_dbm
from .estimation import VictimEstimate
from .waveforms import SPEED_OF_LIGHT, IQBuffer, RadarConfig

REFERENCE_RCS_DBSM = 15.0  # emulated reflector when shaping spoof power


class NegativeDelay(ValueError):
    """Spoofing closer than half the attacker range needs acausal transmission."""


@dataclass(frozen=True)
class SpoofTarget:
    """Commanded location of a spoofed (or suppressed) object."""

    d_spoof: float  # m
    v_spoof: float  # m/s, receding positive

    def __post_init__(self) -> None:
        if self.d_spoof <= 0:
            raise ValueError("spoof range must be positive")


@dataclass(frozen=True)
class AttackerState:
    """Attacker-to-victim geometry: range (m) and relative velocity of the
    victim w.r.t. the attacker (m/s, receding positive)."""

    d_atk: float
    v_atk: float = 0.0

    def __post_init__(self) -> None:
        if self.d_atk <= 0:
            raise ValueError("attacker range must be positive")

    def at(self, t: float) -> "AttackerState":
        return AttackerState(self.d_atk + self.v_atk * t, self.v_atk)


@dataclass(frozen=True)
class FnConfig:
    """False-negative smearing parameters.

    range_smear      extra range spread from the slope offset, m (1..3 typical)
    velocity_spread  clutter extent in velocity, m/s; must be wide enough
                     that the CFAR training band sits in the clutter plateau
                     (the victim's doppler window tapers the ramp's edges)
    v0               lower edge of the velocity spread; default centres the
                     clutter on the spoof velocity
    delta_phi        per-chirp velocity increment, m/s per chirp; default
                     velocity_spread divided over the attack chirps
    power_margin_db  transmit margin over the emulated reference echo; the
                     clutter must out-average the target inside the CFAR
                     training window, which needs roughly N_train/alpha (~14x)
                     more energy than the target peak
    """

    range_smear: float = 3.0
    velocity_spread: float = 30.0
    v0: float | None = None
    delta_phi: float | None = None
    power_margin_db: float = 30.0

    def __post_init__(self) -> None:
        if self.range_smear <= 0:
            raise ValueError("range_smear must be positive")
        if self.velocity_spread < 0:
            raise ValueError("velocity_spread must be non-negative")


def compute_attack_delay_doppler(spoof: SpoofTarget, atk: AttackerState,
                                 est: VictimEstimate, n: int,
                                 wavelength: float) -> tuple[float, float]:
    """Delay and chirp-n phase that place a spoofed object at (d_spoof,
    v_spoof): t_d' = (2*d_spoof - d_atk)/c and a Doppler phase advancing by
    4*pi/lambda * (v_spoof - v_atk/2) * T_chirp per chirp (sign per the
    module convention)."""
    if 2.0 * spoof.d_spoof < atk.d_atk:
        raise NegativeDelay(
            f"cannot spoof {spoof.d_spoof} m from {atk.d_atk} m away: "
            "the attack would have to be transmitted before the victim chirp"
    )
    if est.t_chirp is None:
        raise ValueError("estimate has no chirp period")
    t_d = (2.0 * spoof.d_spoof - atk.d_atk) / SPEED_OF_LIGHT
    phi = -4.0 * np.pi / wavelength * (spoof.v_spoof - atk.v_atk / 2.0) \
        * est.t_chirp * n
    return t_d, float(phi)


def attack_amplitude(spoof: SpoofTarget, atk: AttackerState, budget: LinkBudget,
                     cfg: RadarConfig, margin_db: float = 0.0) -> tuple[float, bool]:
    """Transmit amplitude (relative to full power = 1.0) that makes the
    victim receive the spoof at the power of a 15 dBsm reference target at
    d_spoof.  Clamped to full power with a flag when the one-way path cannot
    deliver the required level."""
    want_dbm = two_way_rx_power_dbm(budget, cfg.wavelength, spoof.d_spoof,
                                    REFERENCE_RCS_DBSM) + margin_db
    unit_dbm = one_way_rx_power_dbm(budget, cfg.wavelength, atk.d_atk)
    amp = np.sqrt(db2lin(want_dbm - unit_dbm))
    if amp > 1.0:
        return 1.0, True
    return float(amp), False


def _chirp_waveform(slope: float, t_d: float, rate: float, n_slot: int,
                    sweep_hz: float) -> np.ndarray:
    """One attack chirp in its slot: exp(j*pi*slope*(t - t_d)^2) active while
    the instantaneous frequency stays within sweep_hz."""
    k_start = max(int(np.ceil(t_d * rate)), 0)
    n_active = int(round(sweep_hz / slope * rate)) if slope > 0 else n_slot
    k_end = min(k_start + n_active, n_slot)
    out = np.zeros(n_slot, dtype=np.complex128)
    t = np.arange(k_start, k_end) / rate - t_d
    out[k_start:k_end] = np.exp(1j * np.pi * slope * t * t)
    return out


def _attack_frame(slope: float, t_d: float, phases: np.ndarray, amplitude: float,
                  est: VictimEstimate, rate: float, t0: float) -> IQBuffer:
    """Tile one chirp over the estimated chirp grid with per-chirp phases.

    The chirp period is quantized to the attacker's sample grid; when the
    period estimate is within half a sample of truth this reproduces the
    victim's own DAC grid exactly and the schedule accumulates no walk-off.
    """
    spc = int(round(est.t_chirp * rate))
    if spc < 1:
        raise ValueError("estimated chirp period shorter than one sample")
    base = _chirp_waveform(slope, t_d, rate, spc, rate)
    samples = (amplitude * np.exp(1j * phases)[:, None] * base[None, :]).ravel()
    return IQBuffer(samples, rate, t0=round(t0 * rate) / rate)


def n_attack_chirps(est: VictimEstimate, cap: int = 4096) -> int:
    """Enough chirps to blanket a whole victim frame; the attacker never
    learns N_chirps, only the frame and chirp periods."""
    if est.t_frame is None or est.t_chirp is None:
        raise ValueError("incomplete estimate")
    return int(min(np.ceil(est.t_frame / est.t_chirp), cap))


def fp_chirp(n: int, est: VictimEstimate, spoof: SpoofTarget, atk: AttackerState,
             budget: LinkBudget, cfg: RadarConfig) -> IQBuffer:
    """Chirp n of the false-positive attack: the victim's estimated slope,
    delayed by t_d' and phase-shifted so the echo looks like an object at
    (d_spoof, v_spoof)."""
    if est.slope is None or not est.n_frames_observed >= 2:
        raise ValueError("estimate incomplete: need >= 2 observed frames")
    t_d, phi = compute_attack_delay_doppler(spoof, atk, est, n, cfg.wavelength)
    amp, _ = attack_amplitude(spoof, atk, budget, cfg)
    spc = int(round(est.t_chirp * cfg.sim_rate))
    wave = _chirp_waveform(est.slope, t_d, cfg.sim_rate, spc, cfg.sim_rate)
    return IQBuffer(amp * np.exp(1j * phi) * wave, cfg.sim_rate)


def fp_frame(est: VictimEstimate, spoof: SpoofTarget, atk: AttackerState,
             budget: LinkBudget, cfg: RadarConfig, t0: float) -> tuple[IQBuffer, bool]:
    """Whole FP attack frame aligned to the predicted victim frame start."""
    t_d, _ = compute_attack_delay_doppler(spoof, atk, est, 0, cfg.wavelength)
    n_chirps = n_attack_chirps(est)
    dphi = -4.0 * np.pi / cfg.wavelength * (spoof.v_spoof - atk.v_atk / 2.0) * est.t_chirp
    phases = dphi * np.arange(n_chirps)
    amp, clamped = attack_amplitude(spoof, atk, budget, cfg)
    return _attack_frame(est.slope, t_d, phases, amp, est, cfg.sim_rate, t0), clamped


def fn_slope_offset(est: VictimEstimate, range_smear: float) -> float:
    """Slope S' = S + 2*S*range_smear/(c*T_chirp), offset so the slope
    mismatch walks the victim's IF tone across range_smear metres over one
    chirp."""
    if not 0 < range_smear <= 1e4:
        raise ValueError("range_smear out of range")
    d_s = 2.0 * est.slope * range_smear / (SPEED_OF_LIGHT * est.t_chirp)
    return est.slope + d_s


def _fn_phases(est: VictimEstimate, v_center: float, atk: AttackerState,
               fncfg: FnConfig, n_chirps: int, wavelength: float) -> np.ndarray:
    """Recurrence phi_{n+1} = phi_n + 4*pi*[(v0 + n*dphi) - v_atk/2]*T/lambda
    (phi_0 = 0, module sign convention): a per-chirp velocity ramp that
    smears the clutter from v0 over velocity_spread."""
    v0 = fncfg.v0 if fncfg.v0 is not None else v_center - fncfg.velocity_spread / 2.0
    dphi = fncfg.delta_phi if fncfg.delta_phi is not None \
        else fncfg.velocity_spread / max(n_chirps, 1)
    n = np.arange(n_chirps)
    increments = -4.0 * np.pi * ((v0 + n * dphi) - atk.v_atk / 2.0) \
        * est.t_chirp / wavelength
    phases = np.zeros(n_chirps)
    phases[1:] = np.cumsum(increments[:-1])
    return phases


def fn_chirp(n: int, est: VictimEstimate, target: SpoofTarget, atk: AttackerState,
             fncfg: FnConfig, budget: LinkBudget, cfg: RadarConfig) -> IQBuffer:
    """Chirp n of the false-negative attack: an FP chirp at the real target's
    location with a slightly offset slope and a velocity-ramped phase
    schedule, so the energy smears into clutter around the target."""
    if est.slope is None or not est.n_frames_observed >= 2:
        raise ValueError("estimate incomplete: need >= 2 observed frames")
    t_d, _ = compute_attack_delay_doppler(target, atk, est, 0, cfg.wavelength)
    slope = fn_slope_offset(est, fncfg.range_smear)
    phases = _fn_phases(est, target.v_spoof, atk, fncfg, n + 1, cfg.wavelength)
    amp, _ = attack_amplitude(target, atk, budget, cfg, margin_db=fncfg.power_margin_db)
    spc = int(round(est.t_chirp * cfg.sim_rate))
    wave = _chirp_waveform(slope, t_d, cfg.sim_rate, spc, cfg.sim_rate)
    return IQBuffer(amp * np.exp(1j * phases[n]) * wave, cfg.sim_rate)


def fn_frame(est: VictimEstimate, target: SpoofTarget, atk: AttackerState,
             fncfg: FnConfig, budget: LinkBudget, cfg: RadarConfig,
             t0: float) -> tuple[IQBuffer, bool]:
    """Whole FN attack frame aimed at the real target's location."""
    t_d, _ = compute_attack_delay_doppler(target, atk, est, 0, cfg.wavelength)
    slope = fn_slope_offset(est, fncfg.range_smear)
    n_chirps = n_attack_chirps(est)
    phases = _fn_phases(est, target.v_spoof, atk, fncfg, n_chirps, cfg.wavelength)
    amp, clamped = attack_amplitude(target, atk, budget, cfg,
                                    margin_db=fncfg.power_margin_db)
    return _attack_frame(slope, t_d, phases, amp, est, cfg.sim_rate, t0), clamped


def translation_attack(n: int, est: VictimEstimate, real_target: SpoofTarget,
                       fake_target: SpoofTarget, atk: AttackerState,
                       fncfg: FnConfig, budget: LinkBudget,
                       cfg: RadarConfig) -> IQBuffer:
    """Chirp n of the translation attack: FN on the real object plus FP at
    the fake location, transmitted simultaneously."""
    fn = fn_chirp(n, est, real_target, atk, fncfg, budget, cfg)
    fp = fp_chirp(n, est, fake_target, atk, budget, cfg)
    return IQBuffer(fn.samples + fp.samples, fn.rate, t0=fn.t0)


def translation_frame(est: VictimEstimate, real_target: SpoofTarget,
                      fake_target: SpoofTarget, atk: AttackerState,
                      fncfg: FnConfig, budget: LinkBudget, cfg: RadarConfig,
                      t0: float) -> tuple[IQBuffer, bool]:
    a, clamped_a = fn_frame(est, real_target, atk, fncfg, budget, cfg, t0)
    b, clamped_b = fp_frame(est, fake_target, atk, budget, cfg, t0)
    n = min(len(a), len(b))
    return IQBuffer(a.samples[:n] + b.samples[:n], a.rate, t0=a.t0), \
        (clamped_a or clamped_b)


def jam_attack(n: int, est: VictimEstimate, range_span: float,
               velocity_span: float, atk: AttackerState, budget: LinkBudget,
               cfg: RadarConfig) -> IQBuffer:
    """Chirp n of the FN 'jamming' counterattack: the FN mechanism stretched
    over range_span x velocity_span at full transmit power, centred on the
    victim's detection region, for victims that randomize their frame
    timing."""
    if range_span <= 0 or velocity_span < 0:
        raise ValueError("spans must be positive")
    fncfg = _jam_fncfg(range_span, velocity_span)
    center = SpoofTarget(max(range_span / 2.0, atk.d_atk), 0.0)
    return fn_chirp(n, est, center, atk, fncfg, budget, cfg)


def _jam_fncfg(range_span: float, velocity_span: float) -> FnConfig:
    return FnConfig(range_smear=range_span, velocity_spread=velocity_span,
                    power_margin_db=200.0)  # always clamps to full power


def jam_frame(est: VictimEstimate, range_span: float, velocity_span: float,
              atk: AttackerState, budget: LinkBudget, cfg: RadarConfig,
              t0: float) -> tuple[IQBuffer, bool]:
    fncfg = _jam_fncfg(range_span, velocity_span)
    center = SpoofTarget(max(range_span / 2.0, atk.d_atk), 0.0)
    return fn_frame(est, center, atk, fncfg, budget, cfg, t0)
