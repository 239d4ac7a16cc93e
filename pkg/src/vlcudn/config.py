"""Experiment configuration: strict INI parsing into one resolved object.

The file format is plain INI with fixed sections.  Every known key must
be present and no other keys are accepted, so a config file is always a
complete, unambiguous record of an experiment.  Quantities carry their
unit in the key name (mW, Hz, meters); they are converted to SI here and
nowhere else.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass

from .agent import AgentConfig
from .channel import ChannelParams
from .metrics import LinkParams, UtilityWeights
from .topology import REUSE_MODES

POLICIES = ("rpic", "fixed_max", "fixed_half", "random", "greedy_myopic")


class ConfigError(ValueError):
    """Invalid, unknown, or missing configuration input."""


def canonical_policy(name: str) -> str:
    """Normalize a policy name (case and separators ignored)."""
    folded = name.strip().lower().replace("-", "").replace("_", "")
    for policy in POLICIES:
        if folded == policy.replace("_", ""):
            return policy
    raise ConfigError(f"unknown policy {name!r}, expected one of {', '.join(POLICIES)}")


_SCHEMA = {
    "topology": ("rows", "cols", "spacing_m", "ap_height_m", "reuse_mode"),
    "channel": ("detector_area_cm2", "semi_angle_deg", "fov_deg", "responsivity_a_per_w"),
    "link": (
        "total_bandwidth_hz",
        "noise_psd_a2_per_hz",
        "effective_bandwidth_factor",
        "squared_electrical_power",
    ),
    "mobility": ("v_min_mps", "v_max_mps", "slot_duration_s", "ue_height_m"),
    "interference": ("neighbor_power_mw", "neighbor_ues"),
    "agent": (
        "power_levels",
        "max_power_mw",
        "learning_rate",
        "discount",
        "epsilon_start",
        "epsilon_end",
        "epsilon_decay_slots",
        "warmup_slots",
        "max_slots",
        "rate_bins",
        "gain_bins",
        "sinr_cap",
        "action_cap",
        "replay",
        "replay_batch",
    ),
    "utility": ("energy_weight_per_mw", "interference_weight_per_mw"),
    "experiment": ("policy", "ue_density", "runs", "seed"),
}

_BOOLEANS = {"1": True, "true": True, "yes": True, "on": True,
             "0": False, "false": False, "no": False, "off": False}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment parameters, SI units throughout."""

    rows: int
    cols: int
    spacing: float
    ap_height: float
    reuse_mode: str
    channel: ChannelParams
    link: LinkParams
    squared_electrical_power: bool
    v_min: float
    v_max: float
    slot_duration: float
    ue_height: float
    neighbor_power: float  # watts per neighbor AP
    neighbor_ues: int | None  # None means: match ue_density
    agent: AgentConfig
    rate_bins: int
    gain_bins: int
    sinr_cap: float
    action_cap: int
    replay: bool
    replay_batch: int
    weights: UtilityWeights
    policy: str
    ue_density: int
    runs: int
    seed: int

    def n_neighbor_ues(self) -> int:
        return self.ue_density if self.neighbor_ues is None else self.neighbor_ues

    def resolved(self) -> dict:
        """Nested dict mirroring the file layout, in the file's units."""
        return {
            "topology": {
                "rows": self.rows,
                "cols": self.cols,
                "spacing_m": self.spacing,
                "ap_height_m": self.ap_height,
                "reuse_mode": self.reuse_mode,
            },
            "channel": {
                "detector_area_cm2": self.channel.detector_area * 1e4,
                "semi_angle_deg": self.channel.semi_angle_half_intensity,
                "fov_deg": self.channel.fov_angle,
                "responsivity_a_per_w": self.channel.responsivity,
            },
            "link": {
                "total_bandwidth_hz": self.link.total_bandwidth,
                "noise_psd_a2_per_hz": self.link.noise_psd,
                "effective_bandwidth_factor": self.link.effective_bandwidth_factor,
                "squared_electrical_power": self.squared_electrical_power,
            },
            "mobility": {
                "v_min_mps": self.v_min,
                "v_max_mps": self.v_max,
                "slot_duration_s": self.slot_duration,
                "ue_height_m": self.ue_height,
            },
            "interference": {
                "neighbor_power_mw": self.neighbor_power * 1e3,
                "neighbor_ues": "match" if self.neighbor_ues is None else self.neighbor_ues,
            },
            "agent": {
                "power_levels": self.agent.power_levels,
                "max_power_mw": self.agent.max_power * 1e3,
                "learning_rate": self.agent.learning_rate,
                "discount": self.agent.discount,
                "epsilon_start": self.agent.epsilon_start,
                "epsilon_end": self.agent.epsilon_end,
                "epsilon_decay_slots": self.agent.epsilon_decay_slots,
                "warmup_slots": self.agent.warmup_slots,
                "max_slots": self.agent.max_slots,
                "rate_bins": self.rate_bins,
                "gain_bins": self.gain_bins,
                "sinr_cap": self.sinr_cap,
                "action_cap": self.action_cap,
                "replay": self.replay,
                "replay_batch": self.replay_batch,
            },
            "utility": {
                "energy_weight_per_mw": self.weights.energy_weight,
                "interference_weight_per_mw": self.weights.interference_weight,
            },
            "experiment": {
                "policy": self.policy,
                "ue_density": self.ue_density,
                "runs": self.runs,
                "seed": self.seed,
            },
        }

    def fingerprint(self) -> str:
        canon = json.dumps(self.resolved(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()


class _Raw:
    """Schema-checked raw values with uniform error reporting."""

    def __init__(self, sections: dict[str, dict[str, str]]):
        self.sections = sections

    def str_(self, section: str, key: str) -> str:
        return self.sections[section][key]

    def int_(self, section: str, key: str) -> int:
        raw = self.str_(section, key)
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}") from None

    def float_(self, section: str, key: str) -> float:
        raw = self.str_(section, key)
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None

    def bool_(self, section: str, key: str) -> bool:
        raw = self.str_(section, key).strip().lower()
        if raw not in _BOOLEANS:
            raise ConfigError(f"[{section}] {key}: expected a boolean, got {raw!r}")
        return _BOOLEANS[raw]


def _read_sections(path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    try:
        loaded = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not loaded:
        raise ConfigError(f"cannot read config file {path}")
    if parser.defaults():
        raise ConfigError("a [DEFAULT] section is not accepted")

    sections = {name: dict(parser.items(name)) for name in parser.sections()}
    unknown_sections = sorted(set(sections) - set(_SCHEMA))
    if unknown_sections:
        raise ConfigError(f"unknown sections: {', '.join(unknown_sections)}")
    missing_sections = sorted(set(_SCHEMA) - set(sections))
    if missing_sections:
        raise ConfigError(f"missing sections: {', '.join(missing_sections)}")
    for name, keys in _SCHEMA.items():
        unknown = sorted(set(sections[name]) - set(keys))
        if unknown:
            raise ConfigError(f"unknown keys in [{name}]: {', '.join(unknown)}")
        missing = sorted(set(keys) - set(sections[name]))
        if missing:
            raise ConfigError(f"missing keys in [{name}]: {', '.join(missing)}")
    return sections


def load_experiment(
    path,
    policy: str | None = None,
    density: int | None = None,
    runs: int | None = None,
    seed: int | None = None,
) -> ExperimentConfig:
    """Load and validate a config file, applying optional CLI overrides."""
    raw = _Raw(_read_sections(path))
    try:
        channel = ChannelParams.from_cm2(
            detector_area_cm2=raw.float_("channel", "detector_area_cm2"),
            semi_angle_deg=raw.float_("channel", "semi_angle_deg"),
            fov_deg=raw.float_("channel", "fov_deg"),
            responsivity=raw.float_("channel", "responsivity_a_per_w"),
        )
        link = LinkParams(
            total_bandwidth=raw.float_("link", "total_bandwidth_hz"),
            noise_psd=raw.float_("link", "noise_psd_a2_per_hz"),
            effective_bandwidth_factor=raw.float_("link", "effective_bandwidth_factor"),
        )
        agent = AgentConfig(
            power_levels=raw.int_("agent", "power_levels"),
            max_power=raw.float_("agent", "max_power_mw") * 1e-3,
            learning_rate=raw.float_("agent", "learning_rate"),
            discount=raw.float_("agent", "discount"),
            epsilon_start=raw.float_("agent", "epsilon_start"),
            epsilon_end=raw.float_("agent", "epsilon_end"),
            epsilon_decay_slots=raw.int_("agent", "epsilon_decay_slots"),
            warmup_slots=raw.int_("agent", "warmup_slots"),
            max_slots=raw.int_("agent", "max_slots"),
        )
        weights = UtilityWeights(
            energy_weight=raw.float_("utility", "energy_weight_per_mw"),
            interference_weight=raw.float_("utility", "interference_weight_per_mw"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    neighbor_raw = raw.str_("interference", "neighbor_ues").strip().lower()
    neighbor_ues = None if neighbor_raw == "match" else raw.int_("interference", "neighbor_ues")

    config = ExperimentConfig(
        rows=raw.int_("topology", "rows"),
        cols=raw.int_("topology", "cols"),
        spacing=raw.float_("topology", "spacing_m"),
        ap_height=raw.float_("topology", "ap_height_m"),
        reuse_mode=raw.str_("topology", "reuse_mode").strip().lower(),
        channel=channel,
        link=link,
        squared_electrical_power=raw.bool_("link", "squared_electrical_power"),
        v_min=raw.float_("mobility", "v_min_mps"),
        v_max=raw.float_("mobility", "v_max_mps"),
        slot_duration=raw.float_("mobility", "slot_duration_s"),
        ue_height=raw.float_("mobility", "ue_height_m"),
        neighbor_power=raw.float_("interference", "neighbor_power_mw") * 1e-3,
        neighbor_ues=neighbor_ues,
        agent=agent,
        rate_bins=raw.int_("agent", "rate_bins"),
        gain_bins=raw.int_("agent", "gain_bins"),
        sinr_cap=raw.float_("agent", "sinr_cap"),
        action_cap=raw.int_("agent", "action_cap"),
        replay=raw.bool_("agent", "replay"),
        replay_batch=raw.int_("agent", "replay_batch"),
        weights=weights,
        policy=canonical_policy(raw.str_("experiment", "policy")),
        ue_density=raw.int_("experiment", "ue_density"),
        runs=raw.int_("experiment", "runs"),
        seed=raw.int_("experiment", "seed"),
    )

    overrides = {}
    if policy is not None:
        overrides["policy"] = canonical_policy(policy)
    if density is not None:
        overrides["ue_density"] = density
    if runs is not None:
        overrides["runs"] = runs
    if seed is not None:
        overrides["seed"] = seed
    if overrides:
        import dataclasses

        config = dataclasses.replace(config, **overrides)

    _validate(config)
    return config


def _validate(config: ExperimentConfig) -> None:
    if config.reuse_mode not in REUSE_MODES:
        raise ConfigError(
            f"reuse_mode must be one of {', '.join(REUSE_MODES)}, got {config.reuse_mode!r}"
        )
    if config.policy not in POLICIES:
        raise ConfigError(f"policy must be one of {', '.join(POLICIES)}")
    if config.rows < 1 or config.cols < 1:
        raise ConfigError("grid needs at least one row and one column")
    if config.spacing <= 0.0:
        raise ConfigError("spacing_m must be positive")
    if config.ap_height <= 0.0:
        raise ConfigError("ap_height_m must be positive")
    if not 0.0 <= config.ue_height < config.ap_height:
        raise ConfigError("ue_height_m must be in [0, ap_height_m)")
    if not 0.0 <= config.v_min <= config.v_max:
        raise ConfigError("need 0 <= v_min_mps <= v_max_mps")
    if config.slot_duration <= 0.0:
        raise ConfigError("slot_duration_s must be positive")
    if config.neighbor_power < 0.0:
        raise ConfigError("neighbor_power_mw must be non-negative")
    if config.neighbor_ues is not None and config.neighbor_ues < 0:
        raise ConfigError("neighbor_ues must be 'match' or a non-negative integer")
    if config.rate_bins < 1 or config.gain_bins < 1:
        raise ConfigError("rate_bins and gain_bins must be at least 1")
    if config.sinr_cap <= 0.0:
        raise ConfigError("sinr_cap must be positive")
    if config.action_cap < 1:
        raise ConfigError("action_cap must be at least 1")
    if config.replay_batch < 1:
        raise ConfigError("replay_batch must be at least 1")
    if config.ue_density < 1:
        raise ConfigError("ue_density must be at least 1")
    if config.runs < 1:
        raise ConfigError("runs must be at least 1")
