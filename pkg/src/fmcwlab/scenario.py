"""Scenario configuration: JSON schema, validation and preset expansion."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .attacks import AttackerState, FnConfig
from .channel import LinkBudget
from .pipeline import CfarConfig, ClusterConfig
from .waveforms import CONFIG_PRESETS, RadarConfig

ATTACK_KINDS = ("none", "fp", "fn", "translation", "jam")


class ScenarioError(ValueError):
    """Scenario file fails to parse or violates an invariant."""


@dataclass(frozen=True)
class TargetSpec:
    """Scene target; rcs_dbsm = None draws from the vehicle RCS distribution
    at run time."""

    d0: float
    v: float = 0.0
    rcs_dbsm: float | None = None

    def __post_init__(self) -> None:
        if self.d0 <= 0:
            raise ScenarioError("target d0 must be positive")


@dataclass(frozen=True)
class AttackSpec:
    """What the attacker transmits once its estimate is ready.

    fp/translation place a fake object at (d_spoof, v_spoof); fn suppresses
    the first scene target (or an explicit location); jam covers
    range_span x velocity_span.
    """

    kind: str = "none"
    d_spoof: float | None = None
    v_spoof: float | None = None
    fn: FnConfig = field(default_factory=FnConfig)
    range_span: float = 1000.0
    velocity_span: float = 200.0

    def __post_init__(self) -> None:
        if self.kind not in ATTACK_KINDS:
            raise ScenarioError(f"unknown attack type {self.kind!r}")
        if self.kind in ("fp", "translation"):
            if self.d_spoof is None or self.v_spoof is None:
                raise ScenarioError(f"{self.kind} attack needs d_spoof and v_spoof")


@dataclass(frozen=True)
class OracleEstimation:
    """Analytic-path stand-in for the waveform-domain sensing chain: the
    attacker is granted the true parameters perturbed by Gaussian errors."""

    slope_rel_sigma: float = 0.0
    t_chirp_sigma_s: float = 0.0
    timing_sigma_s: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    victim: RadarConfig
    targets: tuple[TargetSpec, ...] = ()
    attacker: AttackerState = field(default_factory=lambda: AttackerState(75.0, 2.0))
    budget: LinkBudget = field(default_factory=LinkBudget)
    attack: AttackSpec = field(default_factory=AttackSpec)
    cfar: CfarConfig = field(default_factory=CfarConfig)
    clustering: ClusterConfig = field(default_factory=ClusterConfig)
    n_frames: int = 10
    attack_start_frame: int = 6
    attack_stop_frame: int | None = None  # inclusive; None = n_frames
    seed: int = 0
    victim_jitter_3sigma: float = 0.0
    mode: str = "waveform"  # or "analytic"
    process_frames: str = "all"  # or "attack_only", "last"
    oracle_estimation: OracleEstimation = field(default_factory=OracleEstimation)

    def __post_init__(self) -> None:
        if self.n_frames < 1:
            raise ScenarioError("n_frames must be >= 1")
        if self.attack.kind != "none" and not 1 <= self.attack_start_frame <= self.n_frames:
            raise ScenarioError("attack_start_frame must lie within 1..n_frames")
        if self.attack_stop_frame is not None \
                and self.attack_stop_frame < self.attack_start_frame:
            raise ScenarioError("attack_stop_frame must be >= attack_start_frame")
        if self.mode not in ("waveform", "analytic"):
            raise ScenarioError(f"unknown mode {self.mode!r}")
        if self.process_frames not in ("all", "attack_only", "last"):
            raise ScenarioError(f"unknown process_frames {self.process_frames!r}")
        if self.victim_jitter_3sigma < 0:
            raise ScenarioError("victim_jitter_3sigma must be >= 0")

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed)


def _build(cls, data: dict, what: str):
    if not isinstance(data, dict):
        raise ScenarioError(f"{what} must be an object")
    names = {f for f in cls.__dataclass_fields__}
    unknown = set(data) - names
    if unknown:
        raise ScenarioError(f"unknown {what} keys: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid {what}: {exc}") from exc


def resolve_victim(value) -> RadarConfig:
    """Preset name or explicit parameter object."""
    if isinstance(value, str):
        try:
            return CONFIG_PRESETS[value]
        except KeyError:
            raise ScenarioError(
                f"unknown victim preset {value!r}; have {sorted(CONFIG_PRESETS)}"
            ) from None
    return _build(RadarConfig, value, "victim config")


def scenario_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    known = {"victim", "targets", "attacker", "budget", "attack", "cfar",
             "clustering", "n_frames", "attack_start_frame", "seed",
             "victim_jitter_3sigma", "mode", "process_frames",
             "oracle_estimation"}
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    if "victim" not in data:
        raise ScenarioError("scenario needs a victim configuration")
    if "seed" not in data:
        raise ScenarioError("scenario needs an explicit seed")
    attack_data = dict(data.get("attack", {}))
    if "type" in attack_data:  # JSON field is "type"; the dataclass says kind
        attack_data["kind"] = attack_data.pop("type")
    if "fn" in attack_data:
        attack_data["fn"] = _build(FnConfig, attack_data["fn"], "fn config")
    kw = dict(
        victim=resolve_victim(data["victim"]),
        targets=tuple(_build(TargetSpec, t, "target") for t in data.get("targets", [])),
        attack=_build(AttackSpec, attack_data, "attack"),
        seed=int(data["seed"]),
    )
    for key, cls in (("attacker", AttackerState), ("budget", LinkBudget),
                     ("cfar", CfarConfig), ("clustering", ClusterConfig),
                     ("oracle_estimation", OracleEstimation)):
        if key in data:
            kw[key] = _build(cls, data[key], key)
    for key in ("n_frames", "attack_start_frame", "attack_stop_frame"):
        if key in data and data[key] is not None:
            kw[key] = int(data[key])
    for key in ("victim_jitter_3sigma",):
        if key in data:
            kw[key] = float(data[key])
    for key in ("mode", "process_frames"):
        if key in data:
            kw[key] = str(data[key])
    if "mode" not in data and kw["victim"].sim_rate > 200e6:
        # GHz-band sweeps are too wide to simulate sample by sample
        kw["mode"] = "analytic"
    try:
        return ScenarioConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path) -> ScenarioConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return scenario_from_dict(data)
