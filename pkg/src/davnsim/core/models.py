"""
Domain records shared by the simulator modules.

Parameter records are frozen pydantic models whose Field constraints carry
the invariants; per-step state records are frozen dataclasses because the
engine creates millions of them.
"""

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

SPEED_OF_LIGHT = 3.0e8
KMH = 1.0 / 3.6


class RequestClass(IntEnum):
    SAFETY = 1
    STATE = 2


class ServiceDistribution(str, Enum):
    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"


class DelayMode(str, Enum):
    PAPER_LITERAL = "paper-literal"
    PHYSICAL = "physical"


class VehicleKind(str, Enum):
    ORDINARY = "ordinary"
    AGGRESSIVE = "aggressive"
    EMERGENCY = "emergency"


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# --- Queueing ---

class ServiceClassSpec(FrozenModel):
    """Arrival/service description of one request class."""

    class_id: RequestClass
    arrival_rate: float = Field(ge=0, title="Arrival rate (req/s)")
    mean_service: float = Field(gt=0, title="E[B] (s)")
    second_moment: float = Field(ge=0, title="E[B^2] (s^2)")
    max_wait: float = Field(0.2, gt=0, title="T_i (s)")
    distribution: ServiceDistribution = ServiceDistribution.EXPONENTIAL
    # Literal report moments may violate E[B^2] >= E[B]^2
    paper_literal: bool = False

    @model_validator(mode="after")
    def _check_moments(self):
        if not self.paper_literal:
            # relative slack for the rounding in exp/det moment products
            floor = self.mean_service ** 2 * (1 - 1e-12)
            if self.second_moment < floor:
                raise ValueError(
                    f"second moment {self.second_moment:.6g} below E[B]^2 = "
                    f"{self.mean_service ** 2:.6g}"
                )
        return self


class QueueClassMetrics(FrozenModel):
    occupation: float
    residual: float
    wait: float
    sojourn: float
    queue_length: float


class QueueAnalysis(FrozenModel):
    high: QueueClassMetrics
    low: QueueClassMetrics
    arrival_rate: float
    mean_service: float
    occupation: float
    # textbook preemptive-resume form, reported next to the printed one
    sojourn_low_classical: float


class DesClassResult(FrozenModel):
    mean_wait: float
    mean_sojourn: float
    expired_fraction: float = Field(ge=0, le=1)
    arrivals: int
    completed: int
    expired: int


class DesResult(FrozenModel):
    high: DesClassResult
    low: DesClassResult
    seed: int
    horizon: int
    expiry_enabled: bool
    end_time: float


# --- Radio ---

class LinkBudget(FrozenModel):
    """Radio constants shared by the D2V, V2D and D2D computations."""

    carrier_frequency: float = Field(2.4e9, gt=0, title="f_c (Hz)")
    bandwidth: float = Field(1.0e8, gt=0, title="B (Hz)")
    noise_density_dbm: float = Field(-174.0, title="N0 (dBm/Hz)")
    los_a: float = Field(14.39, gt=0)
    los_b: float = Field(0.13, gt=0)
    eta_los: float = Field(1.0, ge=0, title="eta_LoS (dB)")
    eta_nlos: float = Field(20.0, ge=0, title="eta_NLoS (dB)")
    eta_los_d2d: float = Field(1.0, ge=0, title="eta_LoS D2D (dB)")
    transmit_power: float = Field(0.280, gt=0, title="UAV transmit power (W)")
    vehicle_transmit_power: float = Field(0.280, gt=0, title="Vehicle transmit power (W)")
    message_size_bits: float = Field(4096.0, ge=0, title="S (bits)")
    paper_literal_gain: bool = False
    d2d_planar: bool = False

    @model_validator(mode="after")
    def _check_losses(self):
        if self.eta_nlos < self.eta_los:
            raise ValueError("eta_nlos must be >= eta_los")
        return self


@dataclass(frozen=True)
class LinkGeometry:
    """UAV at (x, y, z=h) above a ground node at (gx, gy)."""

    uav_x: float
    uav_y: float
    uav_z: float
    ground_x: float
    ground_y: float

    @property
    def d_hor(self) -> float:
        return math.hypot(self.uav_x - self.ground_x, self.uav_y - self.ground_y)

    @property
    def d_euc(self) -> float:
        return math.hypot(self.uav_z, self.d_hor)


# --- Propulsion ---

class PropulsionParams(FrozenModel):
    blade_profile_power: float = Field(84.14, gt=0, title="P0 (W)")
    induced_power: float = Field(88.63, gt=0, title="P1 (W)")
    tip_speed: float = Field(120.0, gt=0, title="U_tip (m/s)")
    induced_velocity: float = Field(4.03, gt=0, title="v0 (m/s)")
    fuselage_drag_ratio: float = Field(0.6, gt=0, title="d0")
    rotor_solidity: float = Field(0.05, gt=0, title="s")
    air_density: float = Field(1.225, gt=0, title="rho (kg/m^3)")
    rotor_disc_area: float = Field(0.503, gt=0, title="A (m^2)")


# --- Trajectories ---

class EllipseSpec(FrozenModel):
    center_x: float = 0.0
    center_y: float = 0.0
    semi_major: float = Field(637.0, gt=0)
    semi_minor: float = Field(318.5, gt=0)
    direction: Literal[1, -1] = 1


class TrajectoryConfig(FrozenModel):
    horizontal_speed: float = Field(30 * KMH, gt=0, title="v_hor (m/s)")
    vertical_speed: float = Field(10 * KMH, gt=0, title="v_vrt (m/s)")
    step_seconds: float = Field(0.4, gt=0)
    altitude_min: float = 100.0
    altitude_max: float = 150.0
    vertical_step: Optional[float] = Field(None, gt=0, title="dz (m), default v_vrt*dt")
    p_up: float = Field(0.5, ge=0, le=1)
    initial_altitude: float = 125.0
    initial_phase: float = 0.0
    paper_literal_xy: bool = False

    @model_validator(mode="after")
    def _check_range(self):
        if self.altitude_min >= self.altitude_max:
            raise ValueError("altitude_min must be < altitude_max")
        return self

    @property
    def dz(self) -> float:
        if self.vertical_step is not None:
            return self.vertical_step
        return self.vertical_speed * self.step_seconds


@dataclass(frozen=True)
class UavState:
    uav_id: int
    x: float
    y: float
    z: float
    heading: int
    phase: float

    @property
    def position(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.z)


# --- Vehicles ---

class HighwayParams(FrozenModel):
    """Synthetic circular highway used when no trace file is given."""

    highway_radius: float = Field(637.0, gt=0)
    lanes: int = Field(3, ge=1)
    lane_spacing: float = Field(3.5, ge=0)
    speed_min_kmh: float = Field(60.0, gt=0)
    speed_max_kmh: float = Field(100.0, gt=0)
    aggressive_fraction: float = Field(0.10, ge=0, le=1)
    aggressive_overspeed: float = Field(0.10, ge=0)
    emergency_fraction: float = Field(0.02, ge=0, le=1)
    risky_headway: float = Field(1.0, gt=0, title="Headway below which t_r accrues (s)")
    blocking_distance: float = Field(100.0, gt=0, title="Emergency look-behind (m)")
    collision_gap: float = Field(5.0, gt=0, title="Same-lane spacing flagged as collision (m)")

    @model_validator(mode="after")
    def _check_speeds(self):
        if self.speed_min_kmh > self.speed_max_kmh:
            raise ValueError("speed_min_kmh must be <= speed_max_kmh")
        if self.aggressive_fraction + self.emergency_fraction > 1:
            raise ValueError("aggressive_fraction + emergency_fraction must be <= 1")
        return self


@dataclass(frozen=True)
class VehicleState:
    vehicle_id: str
    x: float
    y: float
    speed: float
    kind: VehicleKind = VehicleKind.ORDINARY
    risky_time: float = 0.0
    blocking_time: float = 0.0
    collided: bool = False


TRACE_COLUMNS = ["step", "vehicle_id", "x", "y", "speed", "kind", "t_r", "t_b", "collided"]


# --- Scenario ---

class QueueParams(FrozenModel):
    safety_arrival_fraction: float = Field(0.2, ge=0, title="lambda_1 per vehicle (1/s)")
    state_arrival_rate: float = Field(2.5, ge=0, title="lambda_2 (1/s)")
    lambda2_aggregate: bool = False
    cpu_clock_hz: float = Field(2.15e9, gt=0)
    cpu_cores: int = Field(4, ge=1)
    safety_message_bits: float = Field(512 * 8, gt=0)
    state_message_bits: float = Field(32 * 8, gt=0)
    max_wait_safety: float = Field(0.2, gt=0, title="T_1 (s)")
    max_wait_state: float = Field(0.2, gt=0, title="T_2 (s)")
    paper_moments: bool = False


class RunConfig(FrozenModel):
    """Fully resolved configuration of one scenario run."""

    steps: int = Field(ge=1)
    seed: int = 0
    step_seconds: float = Field(0.4, gt=0)
    trace_path: Optional[Path] = None
    density: Optional[int] = Field(None, ge=0)
    ellipses: Tuple[EllipseSpec, ...]
    trajectories: Tuple[TrajectoryConfig, ...]
    link: LinkBudget = LinkBudget()
    propulsion: PropulsionParams = PropulsionParams()
    queue: QueueParams = QueueParams()
    highway: HighwayParams = HighwayParams()
    association_radius: float = Field(500.0, gt=0)
    interference_radius: Optional[float] = Field(None, gt=0)
    delay_mode: DelayMode = DelayMode.PAPER_LITERAL
    include_expired_capped: bool = False
    hover_charging: bool = True
    d2d_transfers: Tuple[Tuple[int, int, int], ...] = ()
    output_path: Optional[Path] = None

    @model_validator(mode="after")
    def _check_uavs(self):
        if len(self.ellipses) != len(self.trajectories):
            raise ValueError("one trajectory config per ellipse is required")
        if self.trace_path is None and self.density is None:
            raise ValueError("either trace_path or density must be set")
        return self


@dataclass(frozen=True)
class Observation:
    """Per-UAV tuple o_i[t]."""

    uav_id: int
    x: float
    y: float
    z: float
    theta: int
    rho: int
    mean_wait: Optional[float]
    mean_energy: float
    mean_risky_time: float
    mean_blocking_time: float


@dataclass(frozen=True)
class Sample:
    step: int
    observations: Tuple[Observation, ...]
    collisions: int


@dataclass(frozen=True)
class RequestDelay:
    """Delay components of one request: uplink, queue sojourn, downlink."""

    v2d: float
    queueing: float
    d2v: float
    max_wait: float

    @property
    def total(self) -> float:
        return self.v2d + self.queueing + self.d2v

    @property
    def expired(self) -> bool:
        return self.total > self.max_wait


@dataclass
class StepRecord:
    """Per-step bookkeeping written to the summary's step table."""

    step: int
    vehicles: int
    unassociated: int
    collisions: int
    expired: int = 0
    unstable_uavs: int = 0
    link_unusable: int = 0


@dataclass
class RunSummary:
    density: Optional[int]
    steps: int
    requests: int = 0
    expired: int = 0
    unstable_steps: int = 0
    link_unusable: int = 0
    energy_totals: Optional[List[float]] = None
    step_records: Optional[List[StepRecord]] = None

    @property
    def expired_fraction(self) -> float:
        return self.expired / self.requests if self.requests else 0.0
