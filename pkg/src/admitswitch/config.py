"""Scenario configuration: typed dataclasses, JSON/YAML loading, dotted
overrides and assembly into runtime objects.

File keys mirror the dataclass field names, which carry their unit as a
suffix (dt_s, f_max_n, m1_kg, ...), so a loaded scenario round-trips
through ``to_dict`` unchanged.  Validation errors always name the
offending field by its dotted path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .admittance import AdaptiveAdmittanceParams
from .cqlf import DEFAULT_CQLF_P, CqlfCertificate, require_cqlf, search_cqlf
from .errors import ConfigError
from .manipulator import TwoLinkParams, forward_kinematics
from .switched_reference import (
    A_MODEL_SOFT,
    A_MODEL_STIFF,
    SwitchedReferenceFamily,
    make_position_band_family,
    switching_threshold,
)
from .tracking import TrackingGains

Array = np.ndarray

#: upper limit on sinusoid frequency (rad/s): 1.2 times one cycle per second
MAX_FORCE_FREQUENCY = 2.0 * math.pi * 1.2

Matrix2 = tuple[tuple[float, float], tuple[float, float]]
Vec2 = tuple[float, float]


def _float2(value, path: str) -> Vec2:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value), float(value))  # scalar applies to both axes
    try:
        a, b = value
        return (float(a), float(b))
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f"expected a pair of numbers, got {value!r}") from exc


def _matrix2(value, path: str) -> Matrix2:
    try:
        (a, b), (c, d) = value
        return ((float(a), float(b)), (float(c), float(d)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f"expected a 2x2 matrix, got {value!r}") from exc


def _pick(data: dict, section: str, cls, builder):
    raw = data.get(section, {})
    if not isinstance(raw, dict):
        raise ConfigError(section, "expected a mapping")
    known = {f.name for f in fields(cls)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{section}.{key}", "unknown key")
    return builder(raw)


@dataclass(frozen=True)
class ArmConfig:
    """Physical arm parameters and the operating joint pose."""

    m1_kg: float = 1.5
    m2_kg: float = 1.0
    l1_m: float = 0.85
    l2_m: float = 0.85
    g_mps2: float = 9.81
    gravity_enabled: bool = True
    q0_rad: Vec2 = (math.pi / 4.0, math.pi / 2.0)

    @staticmethod
    def from_dict(raw: dict) -> "ArmConfig":
        kwargs = dict(raw)
        if "q0_rad" in kwargs:
            kwargs["q0_rad"] = _float2(kwargs["q0_rad"], "arm.q0_rad")
        cfg = ArmConfig(**kwargs)
        for name in ("m1_kg", "m2_kg", "l1_m", "l2_m"):
            if not isinstance(getattr(cfg, name), (int, float)) or getattr(cfg, name) <= 0.0:
                raise ConfigError(f"arm.{name}", "must be a positive number")
        if cfg.g_mps2 < 0.0:
            raise ConfigError("arm.g_mps2", "must be non-negative")
        return cfg


@dataclass(frozen=True)
class AdmittanceConfig:
    """Virtual plant and adaptation settings."""

    virtual_mass_kg: float = 1.0
    adapt_rates: tuple[float, ...] = (200.0, 1000.0)
    command_gain: float = 1.0
    p_matrix: Matrix2 | None = None

    @staticmethod
    def from_dict(raw: dict) -> "AdmittanceConfig":
        kwargs = dict(raw)
        if "adapt_rates" in kwargs:
            try:
                kwargs["adapt_rates"] = tuple(float(v) for v in kwargs["adapt_rates"])
            except (TypeError, ValueError) as exc:
                raise ConfigError("admittance.adapt_rates",
                                  "expected a list of numbers") from exc
        if kwargs.get("p_matrix") is not None:
            kwargs["p_matrix"] = _matrix2(kwargs["p_matrix"], "admittance.p_matrix")
        cfg = AdmittanceConfig(**kwargs)
        if cfg.virtual_mass_kg <= 0.0:
            raise ConfigError("admittance.virtual_mass_kg", "must be positive")
        if any(r <= 0.0 for r in cfg.adapt_rates):
            raise ConfigError("admittance.adapt_rates", "rates must be positive")
        return cfg


@dataclass(frozen=True)
class ReferenceConfig:
    """Switched reference family and partition settings."""

    safe_limit_m: float = 1.0
    switch_band: float = 0.002
    a_soft: Matrix2 = tuple(map(tuple, A_MODEL_SOFT.tolist()))
    a_stiff: Matrix2 = tuple(map(tuple, A_MODEL_STIFF.tolist()))
    switch_on: str = "model"
    lock_region_index: int | None = None

    @staticmethod
    def from_dict(raw: dict) -> "ReferenceConfig":
        kwargs = dict(raw)
        for key in ("a_soft", "a_stiff"):
            if key in kwargs:
                kwargs[key] = _matrix2(kwargs[key], f"reference.{key}")
        cfg = ReferenceConfig(**kwargs)
        if cfg.safe_limit_m <= 0.0:
            raise ConfigError("reference.safe_limit_m", "must be positive")
        if not 0.0 < cfg.switch_band < 1.0:
            raise ConfigError("reference.switch_band", "must lie in (0, 1)")
        if cfg.switch_on not in ("model", "plant"):
            raise ConfigError("reference.switch_on", "must be 'model' or 'plant'")
        if cfg.lock_region_index is not None and cfg.lock_region_index not in (1, 2):
            raise ConfigError("reference.lock_region_index", "must be null, 1 or 2")
        return cfg

    @property
    def threshold_m(self) -> float:
        return switching_threshold(self.safe_limit_m, self.switch_band)


@dataclass(frozen=True)
class TrackingConfig:
    """Inner-loop PD gains."""

    kp: float = 100.0
    kd: float = 20.0

    @staticmethod
    def from_dict(raw: dict) -> "TrackingConfig":
        cfg = TrackingConfig(**raw)
        if cfg.kp <= 0.0 or cfg.kd <= 0.0:
            raise ConfigError("tracking.kp" if cfg.kp <= 0.0 else "tracking.kd",
                              "must be positive")
        return cfg


@dataclass(frozen=True)
class ForceSegment:
    """One piece of a piecewise-constant force schedule."""

    t_start_s: float
    value_n: Vec2


@dataclass(frozen=True)
class ForceConfig:
    """Interaction force source and the per-axis saturation limit."""

    kind: str = "sinusoid"
    amplitude_n: Vec2 = (7.5, 7.5)
    frequency_radps: float = 0.5
    phase_rad: Vec2 = (0.0, math.pi / 2.0)
    value_n: Vec2 = (0.0, 0.0)
    segments: tuple[ForceSegment, ...] = ()
    f_max_n: float = 20.0

    @staticmethod
    def from_dict(raw: dict) -> "ForceConfig":
        kwargs = dict(raw)
        for key in ("amplitude_n", "phase_rad", "value_n"):
            if key in kwargs:
                kwargs[key] = _float2(kwargs[key], f"force.{key}")
        if "segments" in kwargs:
            segs = []
            for k, seg in enumerate(kwargs["segments"]):
                if not isinstance(seg, dict) or set(seg) != {"t_start_s", "value_n"}:
                    raise ConfigError(f"force.segments[{k}]",
                                      "expected {t_start_s, value_n}")
                segs.append(ForceSegment(
                    t_start_s=float(seg["t_start_s"]),
                    value_n=_float2(seg["value_n"], f"force.segments[{k}].value_n")))
            kwargs["segments"] = tuple(segs)
        cfg = ForceConfig(**kwargs)
        if cfg.kind not in ("sinusoid", "constant", "piecewise", "external"):
            raise ConfigError("force.kind",
                              "must be sinusoid, constant, piecewise or external")
        if cfg.f_max_n <= 0.0:
            raise ConfigError("force.f_max_n", "must be positive")
        if cfg.kind == "sinusoid":
            if not 0.0 < cfg.frequency_radps <= MAX_FORCE_FREQUENCY:
                raise ConfigError(
                    "force.frequency_radps",
                    f"must lie in (0, {MAX_FORCE_FREQUENCY:.6g}] rad/s")
        if cfg.kind == "piecewise":
            if not cfg.segments:
                raise ConfigError("force.segments", "piecewise force needs segments")
            times = [s.t_start_s for s in cfg.segments]
            if times[0] < 0.0 or any(b <= a for a, b in zip(times, times[1:])):
                raise ConfigError("force.segments",
                                  "start times must be non-negative and increasing")
        return cfg


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete simulation scenario."""

    duration_s: float = 60.0
    dt_s: float = 1e-3
    arm: ArmConfig = field(default_factory=ArmConfig)
    admittance: AdmittanceConfig = field(default_factory=AdmittanceConfig)
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)
    tracking: TrackingConfig = field(default_factory=TrackingConfig)
    force: ForceConfig = field(default_factory=ForceConfig)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration_s / self.dt_s))


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "scenario must be a mapping")
    known = {f.name for f in fields(ScenarioConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown key")
    cfg = ScenarioConfig(
        duration_s=float(data.get("duration_s", 60.0)),
        dt_s=float(data.get("dt_s", 1e-3)),
        arm=_pick(data, "arm", ArmConfig, ArmConfig.from_dict),
        admittance=_pick(data, "admittance", AdmittanceConfig, AdmittanceConfig.from_dict),
        reference=_pick(data, "reference", ReferenceConfig, ReferenceConfig.from_dict),
        tracking=_pick(data, "tracking", TrackingConfig, TrackingConfig.from_dict),
        force=_pick(data, "force", ForceConfig, ForceConfig.from_dict),
    )
    if cfg.dt_s <= 0.0:
        raise ConfigError("dt_s", "must be positive")
    if cfg.duration_s < cfg.dt_s:
        raise ConfigError("duration_s", "must cover at least one step")
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Plain-JSON mirror of the scenario (tuples become lists)."""

    def plain(value):
        if isinstance(value, tuple):
            return [plain(v) for v in value]
        if isinstance(value, ForceSegment):
            return {"t_start_s": value.t_start_s, "value_n": list(value.value_n)}
        return value

    def section(obj):
        return {f.name: plain(getattr(obj, f.name)) for f in fields(obj)}

    return {
        "duration_s": cfg.duration_s,
        "dt_s": cfg.dt_s,
        "arm": section(cfg.arm),
        "admittance": section(cfg.admittance),
        "reference": section(cfg.reference),
        "tracking": section(cfg.tracking),
        "force": section(cfg.force),
    }


def load_config(path: str | Path) -> ScenarioConfig:
    """Load a scenario from a JSON or YAML file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    return config_from_dict(data)


def parse_override(spec: str) -> tuple[list[str], object]:
    """Parse one ``dotted.path=value`` override; values are JSON, with a
    bare-string fallback so quoting plain words is not required."""
    if "=" not in spec:
        raise ConfigError(spec, "override must look like dotted.path=value")
    dotted, _, raw = spec.partition("=")
    dotted = dotted.strip()
    if not dotted:
        raise ConfigError(spec, "override path is empty")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return dotted.split("."), value


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply ``dotted.path=value`` assignments to a scenario dict."""
    for spec in overrides:
        keys, value = parse_override(spec)
        node = data
        for key in keys[:-1]:
            nxt = node.get(key)
            if not isinstance(nxt, dict):
                nxt = {}
                node[key] = nxt
            node = nxt
        node[keys[-1]] = value
    return data


@dataclass(frozen=True)
class ScenarioBundle:
    """Runtime objects assembled from a validated scenario."""

    config: ScenarioConfig
    arm: TwoLinkParams
    family: SwitchedReferenceFamily
    channel: AdaptiveAdmittanceParams
    gains: TrackingGains
    certificate: CqlfCertificate
    operating_point: Array


def _resolve_p_matrix(cfg: ScenarioConfig,
                      family: SwitchedReferenceFamily) -> tuple[Array, CqlfCertificate]:
    if cfg.admittance.p_matrix is not None:
        P = np.array(cfg.admittance.p_matrix, dtype=float)
        return P, require_cqlf(P, family.matrices)
    stock = (np.allclose(family.matrices[0], A_MODEL_SOFT)
             and len(family.matrices) == 2
             and np.allclose(family.matrices[1], A_MODEL_STIFF))
    if stock:
        return DEFAULT_CQLF_P.copy(), require_cqlf(DEFAULT_CQLF_P, family.matrices)
    cert = search_cqlf(list(family.matrices))
    return cert.P, cert


def assemble(cfg: ScenarioConfig) -> ScenarioBundle:
    """Turn a validated scenario into runtime parameter objects.

    Certifies the Lyapunov matrix against the reference family (finding
    one when the scenario leaves it unset) and precomputes the Cartesian
    operating point from the configured joint pose.
    """
    arm = TwoLinkParams(m1=cfg.arm.m1_kg, m2=cfg.arm.m2_kg,
                        l1=cfg.arm.l1_m, l2=cfg.arm.l2_m,
                        g=cfg.arm.g_mps2, gravity_enabled=cfg.arm.gravity_enabled)
    family = make_position_band_family(
        threshold=cfg.reference.threshold_m,
        a_soft=np.array(cfg.reference.a_soft, dtype=float),
        a_stiff=np.array(cfg.reference.a_stiff, dtype=float))
    P, cert = _resolve_p_matrix(cfg, family)
    channel = AdaptiveAdmittanceParams(
        family=family, p_matrix=P,
        adapt_rates=cfg.admittance.adapt_rates,
        virtual_mass=cfg.admittance.virtual_mass_kg,
        command_gain=cfg.admittance.command_gain)
    gains = TrackingGains(kp=cfg.tracking.kp, kd=cfg.tracking.kd)
    x_op = forward_kinematics(arm, np.array(cfg.arm.q0_rad))
    return ScenarioBundle(config=cfg, arm=arm, family=family, channel=channel,
                          gains=gains, certificate=cert, operating_point=x_op)
