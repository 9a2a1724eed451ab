"""
UAV trajectories: constant-speed traversal of a per-UAV ellipse plus a
bounded random walk in altitude.
"""

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from ..utils.rng import SeededRNG
from ..utils.tools import TRAJECTORY_COLUMNS, PathLike, write_frame
from .errors import InvalidParameterError
from .models import KMH, EllipseSpec, TrajectoryConfig, UavState

logger = logging.getLogger(__name__)

HIGHWAY_RADIUS = 637.0
DEFAULT_CENTERS = (
    (0.0, HIGHWAY_RADIUS),
    (HIGHWAY_RADIUS, 0.0),
    (0.0, -HIGHWAY_RADIUS),
    (-HIGHWAY_RADIUS, 0.0),
)
DEFAULT_SPEEDS_KMH = (5.0, 10.0, 20.0, 30.0)
DEFAULT_PHASES = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


def ellipse_position(spec: EllipseSpec, phase: float) -> Tuple[float, float]:
    return (
        spec.center_x + spec.semi_major * math.cos(phase),
        spec.center_y + spec.semi_minor * math.sin(phase),
    )


def ellipse_residual(spec: EllipseSpec, x: float, y: float) -> float:
    """|((x-Cx)/a)^2 + ((y-Cy)/b)^2 - 1|"""
    u = (x - spec.center_x) / spec.semi_major
    v = (y - spec.center_y) / spec.semi_minor
    return abs(u * u + v * v - 1.0)


def _local_radius(spec: EllipseSpec, phase: float) -> float:
    """|d(x, y)/d(phase)|"""
    return math.hypot(spec.semi_major * math.sin(phase), spec.semi_minor * math.cos(phase))


def advance_phase(spec: EllipseSpec, phase: float, speed: float, dt: float) -> float:
    """
    Phase after travelling speed*dt along the ellipse.

    The local radius is taken at the half-step phase; on a circle this is
    exactly the arc-length advance speed*dt/r.
    """
    if speed <= 0:
        raise InvalidParameterError(f"horizontal speed must be positive, got {speed}")
    arc = spec.direction * speed * dt
    midpoint = phase + 0.5 * arc / _local_radius(spec, phase)
    return phase + arc / _local_radius(spec, midpoint)


def ramanujan_perimeter(a: float, b: float) -> float:
    return math.pi * (3 * (a + b) - math.sqrt((3 * a + b) * (a + 3 * b)))


def random_walk_z(steps: int, config: TrajectoryConfig, seed: int) -> Tuple[List[float], List[int]]:
    """
    Altitudes z[0..steps] and headings of the vertical random walk.

    Each step moves up with probability p_up, down otherwise, unless the
    move would leave [altitude_min, altitude_max]; a rejected move holds
    both altitude and heading.
    """
    if steps < 0:
        raise InvalidParameterError(f"steps must be non-negative, got {steps}")
    z = config.initial_altitude
    if not config.altitude_min <= z <= config.altitude_max:
        raise InvalidParameterError(
            f"initial altitude {z} outside [{config.altitude_min}, {config.altitude_max}]"
        )
    draws = SeededRNG(seed).fork("altitude").random(steps)
    dz = config.dz
    altitudes = [z]
    headings = [1]
    heading = 1
    for u in np.asarray(draws).tolist():
        step = 1 if u < config.p_up else -1
        candidate = z + step * dz
        if config.altitude_min <= candidate <= config.altitude_max:
            z = candidate
            heading = step
        altitudes.append(z)
        headings.append(heading)
    return altitudes, headings


def generate_trajectory(
    uav_id: int, config: TrajectoryConfig, spec: EllipseSpec, steps: int, seed: int
) -> List[UavState]:
    """steps + 1 states, the first one at the initial phase and altitude."""
    altitudes, headings = random_walk_z(steps, config, seed)
    dt = config.step_seconds
    phase = config.initial_phase
    x0, y0 = ellipse_position(spec, phase)
    states = []
    for t in range(steps + 1):
        if config.paper_literal_xy:
            x = x0 + config.horizontal_speed * dt * t
            y = y0 + config.vertical_speed * dt * t
        else:
            if t > 0:
                phase = advance_phase(spec, phase, config.horizontal_speed, dt)
            x, y = ellipse_position(spec, phase)
        states.append(UavState(uav_id, x, y, altitudes[t], headings[t], phase))
    return states


def default_ellipses(
    semi_major: float = HIGHWAY_RADIUS,
    semi_minor: float = HIGHWAY_RADIUS / 2,
    centers: Sequence[Tuple[float, float]] = DEFAULT_CENTERS,
    direction: int = 1,
) -> Tuple[EllipseSpec, ...]:
    return tuple(
        EllipseSpec(
            center_x=cx,
            center_y=cy,
            semi_major=semi_major,
            semi_minor=semi_minor,
            direction=direction,
        )
        for cx, cy in centers
    )


def default_trajectories(
    step_seconds: float = 0.4,
    speeds_kmh: Sequence[float] = DEFAULT_SPEEDS_KMH,
    phases: Sequence[float] = DEFAULT_PHASES,
    **overrides,
) -> Tuple[TrajectoryConfig, ...]:
    """One config per UAV; `overrides` apply to every UAV."""
    if len(speeds_kmh) != len(phases):
        raise InvalidParameterError("one horizontal speed per initial phase is required")
    return tuple(
        TrajectoryConfig(
            horizontal_speed=speed * KMH,
            step_seconds=step_seconds,
            initial_phase=phase,
            **overrides,
        )
        for speed, phase in zip(speeds_kmh, phases)
    )


def generate_fleet(
    configs: Sequence[TrajectoryConfig],
    ellipses: Sequence[EllipseSpec],
    steps: int,
    seed: int,
) -> List[List[UavState]]:
    """Trajectories of every UAV, each on its own seed stream (uav_id from 1)."""
    root = SeededRNG(seed)
    fleet = []
    for index, (config, spec) in enumerate(zip(configs, ellipses), start=1):
        uav_seed = int(root.fork("uav", index).generator.integers(0, 2 ** 63))
        fleet.append(generate_trajectory(index, config, spec, steps, uav_seed))
    logger.debug(f"Generated {len(fleet)} trajectories of {steps} steps (seed={seed})")
    return fleet


def trajectory_frame(fleet: Sequence[Sequence[UavState]]) -> pd.DataFrame:
    rows = [
        (step, s.uav_id, s.x, s.y, s.z, s.heading)
        for trajectory in fleet
        for step, s in enumerate(trajectory)
    ]
    frame = pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)
    return frame.sort_values(["step", "uav_id"], kind="stable").reset_index(drop=True)


def export_trajectory(fleet: Sequence[Sequence[UavState]], path: PathLike):
    return write_frame(trajectory_frame(fleet), path, TRAJECTORY_COLUMNS)
