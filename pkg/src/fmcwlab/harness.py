"""Scenario loop and Monte-Carlo evaluation.

One frame pass: the victim transmits (with optional start-time jitter), the
channel produces target echoes, the attacker observes the transmission
one-way and updates its estimates, then (from attack_start_frame on)
transmits its attack aligned to the predicted frame start; the victim
receives the superposition plus thermal noise and runs its full pipeline.

Two synthesis paths share everything from the Range-Doppler step on: the
default waveform path simulates baseband samples end to end, while the
analytic path (for GHz-bandwidth configurations whose sweeps cannot be
sampled) writes the closed-form IF tones directly and grants the attacker
oracle estimates with configurable errors.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import attacks
from .attacks import AttackerState, SpoofTarget
from .channel import (Target, add_thermal_noise, db2lin, noise_power_dbm,
                      one_way_propagate, one_way_rx_power_dbm,
                      reflect_and_propagate, sample_rcs, superpose,
                      two_way_rx_power_dbm)
from .estimation import VictimEstimate, VictimSensor, detect_randomization
from .pipeline import (Cluster, IFMatrix, ca_cfar, dbscan_cluster,
                       process_frame, range_doppler)
from .scenario import ScenarioConfig, TargetSpec
from .waveforms import (SPEED_OF_LIGHT, IQBuffer, RadarMetrics, cached_tx_frame,
                        derived_metrics)

OBSERVE_PREROLL_S = 0.8e-3   # attacker listens this long before the nominal start
OBSERVE_TAIL_S = 2.6e-3      # and keeps a bit over 2 ms of frame
GATE_MULTIPLE = 3.0          # outcome gate: 3*d_res x 3*v_res


def _rng(*key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(key))


@dataclass
class Outcome:
    fn_flag: bool
    fp_flag: bool
    spoof_success: bool | None = None
    spoof_range_error: float | None = None
    spoof_velocity_error: float | None = None

    def to_dict(self) -> dict:
        return {
            "fn": self.fn_flag,
            "fp": self.fp_flag,
            "spoof_success": self.spoof_success,
            "spoof_range_error_m": self.spoof_range_error,
            "spoof_velocity_error_mps": self.spoof_velocity_error,
        }


def match_outcomes(clusters: list[Cluster], truth_targets: list[Target],
                   spoof: SpoofTarget | None, metrics: RadarMetrics,
                   gate: float = GATE_MULTIPLE) -> Outcome:
    """Classify one frame's cluster list.

    FN: some truth target has no cluster within (gate*d_res, gate*v_res).
    FP: some cluster sits outside the gate of every truth target.  Both can
    fire in the same frame.  When a commanded spoof location is given, spoof
    success means a cluster inside its gate, and the errors are the nearest
    in-gate cluster's centroid offsets.
    """
    dr = gate * metrics.d_res
    dv = gate * metrics.v_res

    def in_gate(c: Cluster, d: float, v: float) -> bool:
        return abs(c.range_m - d) <= dr and abs(c.velocity_mps - v) <= dv

    fn = any(not any(in_gate(c, t.d0, t.v) for c in clusters) for t in truth_targets)
    fp = any(not any(in_gate(c, t.d0, t.v) for t in truth_targets) for c in clusters)
    out = Outcome(fn_flag=fn, fp_flag=fp)
    if spoof is not None:
        hits = [c for c in clusters if in_gate(c, spoof.d_spoof, spoof.v_spoof)]
        out.spoof_success = bool(hits)
        if hits:
            best = min(hits, key=lambda c: abs(c.range_m - spoof.d_spoof))
            out.spoof_range_error = abs(best.range_m - spoof.d_spoof)
            out.spoof_velocity_error = abs(best.velocity_mps - spoof.v_spoof)
    return out


@dataclass
class FrameRecord:
    index: int
    t_start: float
    attacked: bool = False
    attack_skipped: bool = False
    amplitude_clamped: bool = False
    randomization_flag: bool | None = None
    commanded: dict | None = None
    estimate: dict | None = None
    clusters: list[dict] = field(default_factory=list)
    outcome: dict | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "t_start_s": self.t_start,
            "attacked": self.attacked,
            "attack_skipped": self.attack_skipped,
            "amplitude_clamped": self.amplitude_clamped,
            "randomization_flag": self.randomization_flag,
            "commanded": self.commanded,
            "estimate": self.estimate,
            "clusters": self.clusters,
            "outcome": self.outcome,
        }


@dataclass
class ScenarioResult:
    seed: int
    frames: list[FrameRecord]
    metrics: RadarMetrics
    targets: list[Target]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "metrics": {
                "d_res_m": self.metrics.d_res,
                "d_max_m": self.metrics.d_max,
                "v_res_mps": self.metrics.v_res,
                "v_max_mps": self.metrics.v_max,
            },
            "targets": [
                {"d0_m": t.d0, "v_mps": t.v, "rcs_dbsm": t.rcs_dbsm}
                for t in self.targets
            ],
            "frames": [f.to_dict() for f in self.frames],
        }

    def last_outcome(self) -> dict | None:
        """Outcome of the final attacked frame, or of the final frame when no
        attack ran; the per-trial verdict for sweeps."""
        attacked = [f for f in self.frames if f.attacked and f.outcome is not None]
        pool = attacked or [f for f in self.frames if f.outcome is not None]
        return pool[-1].outcome if pool else None


def _cluster_dicts(clusters: list[Cluster]) -> list[dict]:
    return [{"range_m": c.range_m, "velocity_mps": c.velocity_mps,
             "peak_power_db": c.peak_power_db, "n_points": c.n_points}
            for c in clusters]


def _resolve_targets(sc: ScenarioConfig) -> list[Target]:
    rng = _rng(sc.seed, 101)
    return [Target(t.d0, t.v, t.rcs_dbsm if t.rcs_dbsm is not None
                   else sample_rcs(rng)) for t in sc.targets]


def _attack_engaged(sc: ScenarioConfig, k: int) -> bool:
    if sc.attack.kind == "none" or k < sc.attack_start_frame:
        return False
    stop = sc.attack_stop_frame if sc.attack_stop_frame is not None else sc.n_frames
    return k <= stop


def _should_process(sc: ScenarioConfig, k: int) -> bool:
    if sc.process_frames == "all":
        return True
    if sc.process_frames == "last":
        return k == sc.n_frames
    if sc.attack.kind == "none":
        return True
    return k >= sc.attack_start_frame


def _build_attack_frame(sc: ScenarioConfig, est: VictimEstimate, k: int,
                        atk_k: AttackerState, targets_k: list[Target],
                        tx_t0: float) -> tuple[IQBuffer, bool, dict | None]:
    """Attack buffer for frame k plus the commanded spoof location (if any)."""
    cfg, budget, spec = sc.victim, sc.budget, sc.attack
    frames_in = k - sc.attack_start_frame
    if spec.kind == "fp":
        d_k = spec.d_spoof + spec.v_spoof * frames_in * est.t_frame
        spoof = SpoofTarget(d_k, spec.v_spoof)
        buf, clamped = attacks.fp_frame(est, spoof, atk_k, budget, cfg, tx_t0)
        return buf, clamped, {"d_spoof_m": d_k, "v_spoof_mps": spec.v_spoof}
    if spec.kind == "fn":
        if spec.d_spoof is not None:
            aim = SpoofTarget(spec.d_spoof, spec.v_spoof or 0.0)
        else:
            tgt = targets_k[0]
            aim = SpoofTarget(tgt.d0, tgt.v)
        buf, clamped = attacks.fn_frame(est, aim, atk_k, spec.fn, budget, cfg, tx_t0)
        return buf, clamped, None
    if spec.kind == "translation":
        tgt = targets_k[0]
        real = SpoofTarget(tgt.d0, tgt.v)
        d_k = spec.d_spoof + spec.v_spoof * frames_in * est.t_frame
        fake = SpoofTarget(d_k, spec.v_spoof)
        buf, clamped = attacks.translation_frame(est, real, fake, atk_k, spec.fn,
                                                 budget, cfg, tx_t0)
        return buf, clamped, {"d_spoof_m": d_k, "v_spoof_mps": spec.v_spoof}
    if spec.kind == "jam":
        buf, clamped = attacks.jam_frame(est, spec.range_span, spec.velocity_span,
                                         atk_k, budget, cfg, tx_t0)
        return buf, clamped, None
    raise ValueError(f"no attack waveform for kind {spec.kind!r}")


def _snap(buf: IQBuffer, ref_t0: float) -> IQBuffer:
    """Re-stamp onto the receiver's sample grid (nearest sample)."""
    k = round((buf.t0 - ref_t0) * buf.rate)
    return buf.retimed(ref_t0 + k / buf.rate)


def run_scenario(sc: ScenarioConfig) -> ScenarioResult:
    if sc.mode == "analytic":
        return _run_scenario_analytic(sc)
    cfg = sc.victim
    rate = cfg.sim_rate
    metrics = derived_metrics(cfg)
    budget = sc.budget
    targets = _resolve_targets(sc)
    jitter_rng = _rng(sc.seed, 102)
    sigma = sc.victim_jitter_3sigma / 3.0
    floor = noise_power_dbm(rate, budget)
    sensor = VictimSensor(noise_floor_db=floor)
    tx_base = cached_tx_frame(cfg)
    n_obs = int(round((OBSERVE_PREROLL_S + OBSERVE_TAIL_S) * rate))
    records = []

    for k in range(1, sc.n_frames + 1):
        t_nom = (k - 1) * cfg.t_frame
        t_true = t_nom + (jitter_rng.normal(0.0, sigma) if sigma > 0 else 0.0)
        tx = tx_base.retimed(t_true)
        atk_k = sc.attacker.at(t_true)
        targets_k = [t.at(t_true) for t in targets]
        rec = FrameRecord(index=k, t_start=t_true)

        attack_rx = None
        if _attack_engaged(sc, k):
            est = sensor.estimate
            if sensor.ready and est.t_frame is not None:
                pred_obs = sensor.predict_observed_start(1)
                tx_t0 = pred_obs - atk_k.d_atk / SPEED_OF_LIGHT
                abuf, clamped, commanded = _build_attack_frame(
                    sc, est, k, atk_k, targets_k, tx_t0)
                attack_rx = _snap(
                    one_way_propagate(abuf, atk_k.d_atk, atk_k.v_atk, cfg, budget),
                    t_true)
                rec.attacked = True
                rec.amplitude_clamped = clamped
                rec.commanded = commanded
            else:
                rec.attack_skipped = True
        if sc.attack.kind == "jam" and k >= sc.attack_start_frame \
                and len(sensor.frame_starts) >= 5:
            rec.randomization_flag = detect_randomization(
                sensor.estimate, rate=rate)

        if _should_process(sc, k):
            parts = [reflect_and_propagate(tx, t, cfg, budget) for t in targets_k]
            if attack_rx is not None:
                parts.append(attack_rx)
            if parts:
                rx = superpose(parts).window(t_true, cfg.frame_samples)
            else:
                rx = IQBuffer(np.zeros(cfg.frame_samples, complex), rate, t0=t_true)
            rx = add_thermal_noise(rx, rate, budget, _rng(sc.seed, 103, k))
            clusters = process_frame(rx, cfg, sc.cfar, sc.clustering)
            rec.clusters = _cluster_dicts(clusters)
            spoof = None
            if rec.commanded is not None:
                spoof = SpoofTarget(rec.commanded["d_spoof_m"],
                                    rec.commanded["v_spoof_mps"])
            rec.outcome = match_outcomes(clusters, targets_k, spoof,
                                         metrics).to_dict()

        # the attacker keeps estimating while it attacks
        obs_src = tx.window(t_nom - OBSERVE_PREROLL_S, n_obs)
        obs = one_way_propagate(obs_src, atk_k.d_atk, atk_k.v_atk, cfg, budget)
        cap = add_thermal_noise(obs, rate, budget, _rng(sc.seed, 104, k))
        sensor.observe(cap)
        est = sensor.estimate
        rec.estimate = est.to_dict() if est is not None else None
        records.append(rec)

    return ScenarioResult(sc.seed, records, metrics, targets)


# ---------------------------------------------------------------------------
# analytic IF path

def _analytic_if(sc: ScenarioConfig, k: int, t_true: float,
                 targets_k: list[Target], atk_k: AttackerState,
                 est_slope: float, est_t_chirp: float, timing_error: float,
                 engaged: bool, commanded: dict | None,
                 noise_rng: np.random.Generator) -> IFMatrix:
    """Closed-form IF matrix: each target contributes a tone at 2*S*d/c with
    the per-chirp Doppler phase; an engaged attack contributes the
    mismatched-slope product of the victim chirp with the attack chirp."""
    cfg = sc.victim
    n_cols = int(np.floor(cfg.t_active * cfg.f_samp))
    t = np.arange(n_cols) / cfg.f_samp
    lam = cfg.wavelength
    l = np.arange(cfg.n_chirps)[:, None]
    data = np.zeros((cfg.n_chirps, n_cols), dtype=np.complex128)
    for tgt in targets_k:
        f_if = 2.0 * cfg.slope * tgt.d0 / SPEED_OF_LIGHT
        amp = np.sqrt(db2lin(two_way_rx_power_dbm(sc.budget, lam, tgt.d0,
                                                  tgt.rcs_dbsm)))
        d_l = tgt.d0 + tgt.v * l * cfg.t_chirp
        data += amp * np.exp(1j * (2 * np.pi * f_if * t[None, :]
                                   + 4 * np.pi * d_l / lam))
    if engaged:
        spec = sc.attack
        if spec.kind in ("fp", "translation") and commanded is not None:
            spoof = SpoofTarget(commanded["d_spoof_m"], commanded["v_spoof_mps"])
            data += _analytic_attack_tone(sc, spoof, atk_k, est_slope,
                                          est_t_chirp, timing_error, t, l,
                                          fn_mode=False)
        if spec.kind in ("fn", "translation", "jam"):
            if spec.kind == "jam":
                aim = SpoofTarget(max(spec.range_span / 2, atk_k.d_atk), 0.0)
            elif spec.d_spoof is not None and spec.kind == "fn":
                aim = SpoofTarget(spec.d_spoof, spec.v_spoof or 0.0)
            else:
                aim = SpoofTarget(targets_k[0].d0, targets_k[0].v)
            data += _analytic_attack_tone(sc, aim, atk_k, est_slope,
                                          est_t_chirp, timing_error, t, l,
                                          fn_mode=True)
    sigma = np.sqrt(db2lin(noise_power_dbm(cfg.f_samp, sc.budget)) / 2.0)
    noise = noise_rng.standard_normal(2 * data.size, dtype=np.float32) \
        .view(np.complex64).reshape(data.shape)
    return IFMatrix(data + sigma * noise, cfg)


def _analytic_attack_tone(sc: ScenarioConfig, aim: SpoofTarget,
                          atk_k: AttackerState, est_slope: float,
                          est_t_chirp: float, timing_error: float,
                          t: np.ndarray, l: np.ndarray,
                          fn_mode: bool) -> np.ndarray:
    """Victim-side mixing product x(t)*conj(attack): a quadratic-phase tone
    with the residual slope (S - S_atk) and the attack's per-chirp phases."""
    cfg = sc.victim
    lam = cfg.wavelength
    est = VictimEstimate(slope=est_slope, t_chirp=est_t_chirp,
                         t_frame=cfg.t_frame, frame_starts=[0.0, cfg.t_frame],
                         n_frames_observed=max(sc.attack_start_frame - 1, 2))
    if fn_mode:
        fncfg = sc.attack.fn if sc.attack.kind != "jam" \
            else attacks._jam_fncfg(sc.attack.range_span, sc.attack.velocity_span)
        s_atk = attacks.fn_slope_offset(est, fncfg.range_smear)
        phases = attacks._fn_phases(est, aim.v_spoof, atk_k, fncfg,
                                    cfg.n_chirps, lam)
        amp, _ = attacks.attack_amplitude(aim, atk_k, sc.budget, cfg,
                                          margin_db=fncfg.power_margin_db)
    else:
        s_atk = est_slope
        dphi = -4.0 * np.pi / lam * (aim.v_spoof - atk_k.v_atk / 2.0) * est_t_chirp
        phases = dphi * np.arange(cfg.n_chirps)
        amp, _ = attacks.attack_amplitude(aim, atk_k, sc.budget, cfg)
    t_d, _ = attacks.compute_attack_delay_doppler(aim, atk_k, est, 0, lam)
    tau = t_d + atk_k.d_atk / SPEED_OF_LIGHT + timing_error
    d_l = atk_k.d_atk + atk_k.v_atk * l * cfg.t_chirp
    quad = np.pi * (cfg.slope - s_atk) * t * t + 2 * np.pi * s_atk * tau * t
    per_chirp = -phases[:, None] + 2 * np.pi * d_l / lam
    return amp * np.exp(1j * (quad[None, :] - np.pi * s_atk * tau**2 + per_chirp))


def _run_scenario_analytic(sc: ScenarioConfig) -> ScenarioResult:
    cfg = sc.victim
    metrics = derived_metrics(cfg)
    targets = _resolve_targets(sc)
    jitter_rng = _rng(sc.seed, 102)
    est_rng = _rng(sc.seed, 105)
    oe = sc.oracle_estimation
    est_slope = cfg.slope * (1.0 + oe.slope_rel_sigma * est_rng.standard_normal())
    est_t_chirp = cfg.t_chirp + oe.t_chirp_sigma_s * est_rng.standard_normal()
    sigma = sc.victim_jitter_3sigma / 3.0
    records = []
    for k in range(1, sc.n_frames + 1):
        t_nom = (k - 1) * cfg.t_frame
        t_true = t_nom + (jitter_rng.normal(0.0, sigma) if sigma > 0 else 0.0)
        targets_k = [t.at(t_true) for t in targets]
        atk_k = sc.attacker.at(t_true)
        rec = FrameRecord(index=k, t_start=t_true)
        engaged = _attack_engaged(sc, k)
        if engaged:
            rec.attacked = True
            if sc.attack.kind in ("fp", "translation"):
                frames_in = k - sc.attack_start_frame
                d_k = sc.attack.d_spoof + sc.attack.v_spoof * frames_in * cfg.t_frame
                rec.commanded = {"d_spoof_m": d_k, "v_spoof_mps": sc.attack.v_spoof}
        if _should_process(sc, k):
            # the attacker cannot see the jittered start it is predicting
            timing_error = oe.timing_sigma_s * est_rng.standard_normal() \
                + (t_nom - t_true if sc.victim_jitter_3sigma > 0 else 0.0)
            ifm = _analytic_if(sc, k, t_true, targets_k, atk_k, est_slope,
                               est_t_chirp, timing_error, engaged,
                               rec.commanded, _rng(sc.seed, 103, k))
            rd = range_doppler(ifm)
            clusters = dbscan_cluster(ca_cfar(rd, sc.cfar), sc.clustering.eps,
                                      sc.clustering.min_pts, rd)
            rec.clusters = _cluster_dicts(clusters)
            spoof = None
            if rec.commanded is not None:
                spoof = SpoofTarget(rec.commanded["d_spoof_m"],
                                    rec.commanded["v_spoof_mps"])
            rec.outcome = match_outcomes(clusters, targets_k, spoof,
                                         metrics).to_dict()
        rec.estimate = {"slope_hz_per_s": est_slope, "t_chirp_s": est_t_chirp,
                        "t_frame_s": cfg.t_frame}
        records.append(rec)
    return ScenarioResult(sc.seed, records, metrics, targets)


# ---------------------------------------------------------------------------
# Monte-Carlo sweeps

def _n_jobs() -> int:
    env = os.environ.get("FMCWLAB_JOBS")
    if env:
        return max(int(env), 1)
    return max(os.cpu_count() or 1, 1)


def _parallel_map(fn, args_list):
    if len(args_list) <= 1 or _n_jobs() == 1:
        return [fn(*a) for a in args_list]
    return Parallel(n_jobs=_n_jobs(), prefer="processes")(
        delayed(fn)(*a) for a in args_list)


def fn_crossover_range(sc: ScenarioConfig) -> float:
    """Range beyond which the attacker can deliver the full FN margin: where
    the required clutter power (reference echo + margin) equals the
    attacker's maximum received power at the victim."""
    max_rx = one_way_rx_power_dbm(sc.budget, sc.victim.wavelength,
                                  sc.attacker.d_atk)
    ref_at_1m = two_way_rx_power_dbm(sc.budget, sc.victim.wavelength, 1.0,
                                     attacks.REFERENCE_RCS_DBSM)
    margin = sc.attack.fn.power_margin_db
    # ref_at_1m - 40*log10(d) + margin = max_rx
    return 10.0 ** ((ref_at_1m + margin - max_rx) / 40.0)


def _pd_pfa_trial(base: ScenarioConfig, mode: str, trial: int) -> dict:
    rng = _rng(base.seed, 201, trial)
    d_t = float(rng.uniform(5.0, 143.0))
    v_t = float(rng.uniform(-35.0, 35.0))
    target = TargetSpec(d0=d_t, v=v_t, rcs_dbsm=None)
    attack = replace(base.attack, kind=mode)
    if mode == "fp":
        attack = replace(attack, d_spoof=float(rng.uniform(50.0, 100.0)),
                         v_spoof=float(rng.uniform(-25.0, 25.0)))
    elif mode == "fn":
        attack = replace(attack, d_spoof=None, v_spoof=None)
    if mode == "none":
        sc = replace(base, targets=(target,), attack=replace(attack, kind="none"),
                     n_frames=1, attack_start_frame=1,
                     seed=int(_rng(base.seed, 202, trial).integers(2**31)))
    else:
        sc = replace(base, targets=(target,), attack=attack,
                     process_frames="attack_only",
                     seed=int(_rng(base.seed, 202, trial).integers(2**31)))
    result = run_scenario(sc)
    out = result.last_outcome() or {}
    return {
        "trial": trial,
        "mode": mode,
        "target_d0_m": d_t,
        "target_v_mps": v_t,
        "target_rcs_dbsm": result.targets[0].rcs_dbsm,
        "fn": out.get("fn"),
        "fp": out.get("fp"),
        "attacked": any(f.attacked for f in result.frames),
    }


def pd_pfa_sweep(base: ScenarioConfig, trials: int,
                 modes: tuple[str, ...] = ("none", "fp", "fn"),
                 bin_width: float = 5.0, n_bins: int = 30) -> dict:
    """PD/PFA versus target range, binned in 5 m steps, for the no-attack
    baseline and the FP/FN attacks.  One random target per trial."""
    report: dict = {"trials_per_mode": trials, "bin_width_m": bin_width,
                    "modes": {}, "fn_crossover_range_m": fn_crossover_range(base)}
    for mode in modes:
        rows = _parallel_map(_pd_pfa_trial, [(base, mode, i) for i in range(trials)])
        bins = []
        for b in range(n_bins):
            lo, hi = b * bin_width, (b + 1) * bin_width
            sel = [r for r in rows if lo <= r["target_d0_m"] < hi]
            n = len(sel)
            bins.append({
                "range_lo_m": lo,
                "range_hi_m": hi,
                "n_trials": n,
                "pd": (1.0 - sum(bool(r["fn"]) for r in sel) / n) if n else None,
                "pfa": (sum(bool(r["fp"]) for r in sel) / n) if n else None,
            })
        n_all = len(rows)
        report["modes"][mode] = {
            "bins": bins,
            "rows": rows,
            "aggregate_pd": 1.0 - sum(bool(r["fn"]) for r in rows) / n_all,
            "aggregate_pfa": sum(bool(r["fp"]) for r in rows) / n_all,
        }
    return report


def _accuracy_trial(base: ScenarioConfig, trial: int) -> list[dict]:
    rng = _rng(base.seed, 301, trial)
    d_spoof = float(rng.uniform(60.0, 200.0))
    v_spoof = float(rng.uniform(-25.0, 25.0))
    atk = AttackerState(float(rng.uniform(20.0, 100.0)),
                        float(rng.uniform(-10.0, 10.0)))
    sc = replace(base, targets=(), attacker=atk,
                 attack=replace(base.attack, kind="fp", d_spoof=d_spoof,
                                v_spoof=v_spoof),
                 process_frames="attack_only",
                 seed=int(_rng(base.seed, 302, trial).integers(2**31)))
    result = run_scenario(sc)
    rows = []
    for f in result.frames:
        if not (f.attacked and f.outcome is not None):
            continue
        rows.append({
            "trial": trial,
            "frame": f.index,
            "d_spoof_m": f.commanded["d_spoof_m"],
            "v_spoof_mps": f.commanded["v_spoof_mps"],
            "success": bool(f.outcome["spoof_success"]),
            "range_error_m": f.outcome["spoof_range_error_m"],
            "velocity_error_mps": f.outcome["spoof_velocity_error_mps"],
            "clamped": f.amplitude_clamped,
        })
    return rows


def spoof_accuracy_sweep(base: ScenarioConfig, trials: int) -> dict:
    """Commanded-vs-perceived spoof location over seeded FP trials; the unit
    of account is the attack frame, several per trial."""
    frame_rows = [r for rows in
                  _parallel_map(_accuracy_trial, [(base, i) for i in range(trials)])
                  for r in rows]
    return spoof_accuracy_report(frame_rows)


def _percentile(values: list[float], q: float) -> float | None:
    return float(np.percentile(values, q)) if values else None


def spoof_accuracy_report(frame_rows: list[dict]) -> dict:
    """Success rate and error statistics over attack frames.

    Untrimmed statistics use every successful frame; trimmed ones drop the
    top 5% of errors (the paper excludes a small tail of grossly
    mis-estimated trials without naming its threshold, so both are reported).
    """
    if not frame_rows:
        raise ValueError("no attack frames to report on")
    successes = [r for r in frame_rows if r["success"]]
    r_err = sorted(r["range_error_m"] for r in successes)
    v_err = sorted(r["velocity_error_mps"] for r in successes)

    def stats(errs: list[float]) -> dict:
        if not errs:
            return {"mean": None, "p90": None, "trimmed_mean": None}
        keep = errs[: max(int(np.ceil(len(errs) * 0.95)), 1)]
        return {"mean": float(np.mean(errs)),
                "p90": _percentile(errs, 90.0),
                "trimmed_mean": float(np.mean(keep))}

    return {
        "n_frames": len(frame_rows),
        "n_success": len(successes),
        "success_rate": len(successes) / len(frame_rows),
        "range_error_m": stats(r_err),
        "velocity_error_mps": stats(v_err),
        "cdf": {
            "range_error_m": r_err,
            "velocity_error_mps": v_err,
        },
        "rows": frame_rows,
    }


# ---------------------------------------------------------------------------
# report files

def write_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def write_rows_csv(rows: list[dict], path) -> None:
    if not rows:
        Path(path).write_text("")
        return
    keys = sorted({k for r in rows for k in r})
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(keys)
        for r in rows:
            w.writerow([repr(r[k]) if isinstance(r[k], float) else r.get(k)
                        for k in keys])


def write_cdf_csv(values: list[float], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["value", "cumulative_fraction"])
        n = len(values)
        for i, v in enumerate(sorted(values)):
            w.writerow([repr(float(v)), repr((i + 1) / n)])
