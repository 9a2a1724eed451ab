"""
Run configuration.

Values resolve, highest first, from explicit overrides (CLI flags), the
environment (`DAVN_` prefix, `__` between section and key), a TOML file and
the defaults below. Every key name is unique across sections so that each one
maps to exactly one CLI flag.
"""

import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)
from pydantic_settings import SettingsError

from .errors import ConfigError
from .models import (
    KMH,
    DelayMode,
    EllipseSpec,
    HighwayParams,
    LinkBudget,
    PropulsionParams,
    QueueParams,
    RunConfig,
    TrajectoryConfig,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

SECTIONS = ("run", "vehicles", "uav", "link", "propulsion", "queue")


class RunSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    steps: int = Field(500, ge=1)
    seed: int = Field(0, ge=0)
    step_seconds: float = Field(0.4, gt=0)
    output_dir: Path = Path("output")
    workers: int = Field(1, ge=1)
    delay_mode: DelayMode = DelayMode.PAPER_LITERAL
    association_radius: float = Field(500.0, gt=0)
    interference_radius: Optional[float] = Field(None, gt=0)
    include_expired_capped: bool = False
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"


class VehiclesSection(HighwayParams):
    trace_path: Optional[Path] = None
    density: List[int] = Field(default_factory=lambda: [40, 80, 120])

    @model_validator(mode="after")
    def _check_density(self):
        if any(d < 0 for d in self.density):
            raise ValueError("densities must be non-negative")
        if self.trace_path is None and not self.density:
            raise ValueError("either trace_path or at least one density is required")
        return self


class UavSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ellipse_semi_major: float = Field(637.0, gt=0)
    ellipse_semi_minor: float = Field(318.5, gt=0)
    ellipse_centers: List[Tuple[float, float]] = Field(
        default_factory=lambda: [(0.0, 637.0), (637.0, 0.0), (0.0, -637.0), (-637.0, 0.0)]
    )
    ellipse_direction: int = 1
    horizontal_speeds_kmh: List[float] = Field(default_factory=lambda: [5.0, 10.0, 20.0, 30.0])
    vertical_speed_kmh: float = Field(10.0, gt=0)
    altitude_min: float = 100.0
    altitude_max: float = 150.0
    initial_altitude: float = 125.0
    vertical_step: Optional[float] = Field(None, gt=0)
    p_up: float = Field(0.5, ge=0, le=1)
    initial_phases: List[float] = Field(
        default_factory=lambda: [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
    )
    paper_literal_xy: bool = False

    @model_validator(mode="after")
    def _check_fleet(self):
        n = len(self.ellipse_centers)
        if n == 0:
            raise ValueError("at least one UAV is required")
        if len(self.horizontal_speeds_kmh) != n or len(self.initial_phases) != n:
            raise ValueError(
                "ellipse_centers, horizontal_speeds_kmh and initial_phases need one entry per UAV"
            )
        if self.ellipse_direction not in (1, -1):
            raise ValueError("ellipse_direction must be 1 or -1")
        return self


class LinkSection(LinkBudget):
    d2d_transfers: List[Tuple[int, int, int]] = Field(default_factory=list)


class PropulsionSection(PropulsionParams):
    hover_charging: bool = True


class QueueSection(QueueParams):
    pass


class DavnSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="DAVN_",
        env_nested_delimiter="__",
        extra="forbid",
    )

    run: RunSection = RunSection()
    vehicles: VehiclesSection = VehiclesSection()
    uav: UavSection = UavSection()
    link: LinkSection = LinkSection()
    propulsion: PropulsionSection = PropulsionSection()
    queue: QueueSection = QueueSection()

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        sources = [init_settings, env_settings]
        if settings_cls.model_config.get("toml_file"):
            sources.append(TomlConfigSettingsSource(settings_cls))
        return tuple(sources)

    def fleet(self) -> Tuple[Tuple[EllipseSpec, ...], Tuple[TrajectoryConfig, ...]]:
        """Per-UAV ellipse and trajectory configuration, in uav_id order."""
        run, uav = self.run, self.uav
        ellipses = tuple(
            EllipseSpec(
                center_x=cx,
                center_y=cy,
                semi_major=uav.ellipse_semi_major,
                semi_minor=uav.ellipse_semi_minor,
                direction=uav.ellipse_direction,
            )
            for cx, cy in uav.ellipse_centers
        )
        trajectories = tuple(
            TrajectoryConfig(
                horizontal_speed=speed * KMH,
                vertical_speed=uav.vertical_speed_kmh * KMH,
                step_seconds=run.step_seconds,
                altitude_min=uav.altitude_min,
                altitude_max=uav.altitude_max,
                vertical_step=uav.vertical_step,
                p_up=uav.p_up,
                initial_altitude=uav.initial_altitude,
                initial_phase=phase,
                paper_literal_xy=uav.paper_literal_xy,
            )
            for speed, phase in zip(uav.horizontal_speeds_kmh, uav.initial_phases)
        )
        return ellipses, trajectories

    def to_run_config(self, density: Optional[int] = None, output_path: Optional[Path] = None) -> RunConfig:
        """Immutable engine configuration for one member of the density sweep."""
        run = self.run
        ellipses, trajectories = self.fleet()
        trace_path = self.vehicles.trace_path
        return RunConfig(
            steps=run.steps,
            seed=run.seed,
            step_seconds=run.step_seconds,
            trace_path=trace_path,
            density=None if trace_path is not None else density,
            ellipses=ellipses,
            trajectories=trajectories,
            link=_narrow(self.link, LinkBudget),
            propulsion=_narrow(self.propulsion, PropulsionParams),
            queue=_narrow(self.queue, QueueParams),
            highway=_narrow(self.vehicles, HighwayParams),
            association_radius=run.association_radius,
            interference_radius=run.interference_radius,
            delay_mode=run.delay_mode,
            include_expired_capped=run.include_expired_capped,
            hover_charging=self.propulsion.hover_charging,
            d2d_transfers=tuple(tuple(t) for t in self.link.d2d_transfers),
            output_path=output_path,
        )


def _narrow(section: BaseModel, model: Type[BaseModel]):
    return model(**section.model_dump(include=set(model.model_fields)))


def field_index() -> Dict[str, Tuple[str, Any]]:
    """key -> (section, FieldInfo) over every configurable key."""
    index = {}
    for section in SECTIONS:
        section_model = DavnSettings.model_fields[section].annotation
        for name, info in section_model.model_fields.items():
            if name in index:
                raise RuntimeError(f"configuration key {name!r} appears in two sections")
            index[name] = (section, info)
    return index


def nest_overrides(flat: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    """{'paper_moments': True} -> {'queue': {'paper_moments': True}}"""
    index = field_index()
    nested: Dict[str, Dict[str, Any]] = {}
    for key, value in flat.items():
        if key not in index:
            raise ConfigError(f"unknown configuration key {key!r}")
        nested.setdefault(index[key][0], {})[key] = value
    return nested


def load_settings(config_path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> DavnSettings:
    """
    Resolve the effective settings.

    `overrides` are flat key -> value pairs (CLI flags) and win over every
    other source.

    Raises:
        ConfigError: missing or unparsable file, unknown key, invalid value.
    """
    settings_cls: Type[DavnSettings] = DavnSettings
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"configuration file not found: {path}")
        settings_cls = type(
            "DavnFileSettings",
            (DavnSettings,),
            {"__module__": __name__, "model_config": SettingsConfigDict(toml_file=path)},
        )
    init = nest_overrides(overrides or {})
    try:
        settings = settings_cls(**init)
    except (tomllib.TOMLDecodeError, SettingsError) as e:
        raise ConfigError(f"{config_path}: {e}") from e
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
    logger.debug(f"Effective configuration: {settings.model_dump_json()}")
    return settings


class SettingsManager:
    """Process-wide holder of the effective settings."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(SettingsManager, cls).__new__(cls)
            cls._instance._initialize(None, None)
        return cls._instance

    def _initialize(self, config_path: Optional[Path], overrides: Optional[Dict[str, Any]]):
        self.config_path = config_path
        self.settings = load_settings(config_path, overrides)

    @classmethod
    def load(cls, config_path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None):
        instance = cls._instance or super(SettingsManager, cls).__new__(cls)
        instance._initialize(config_path, overrides)
        cls._instance = instance
        return instance

    @classmethod
    def reset(cls):
        cls._instance = None

    def get(self, key: str, default: Any = None) -> Any:
        """Dotted lookup, e.g. get('queue.paper_moments')."""
        node: Any = self.settings
        for part in key.split("."):
            if not hasattr(node, part):
                return default
            node = getattr(node, part)
        return node

    def as_dict(self) -> Dict[str, Any]:
        return self.settings.model_dump(mode="json")

    def save_settings(self, path: Path) -> Path:
        """Write the effective configuration (JSON) next to the outputs."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.as_dict(), f, indent=4, sort_keys=True)
            f.write("\n")
        return path
