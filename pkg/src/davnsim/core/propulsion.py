"""Rotary-wing UAV motion power and movement energy."""

import math
from typing import Tuple

from .errors import InvalidParameterError
from .models import PropulsionParams

Point3 = Tuple[float, float, float]


def motion_power(speed: float, params: PropulsionParams = PropulsionParams()) -> float:
    """Blade profile + induced + parasite power at horizontal speed V (m/s)."""
    if speed < 0:
        raise InvalidParameterError(f"speed must be non-negative, got {speed}")
    v2 = speed * speed
    v0_2 = params.induced_velocity ** 2
    blade = params.blade_profile_power * (1.0 + 3.0 * v2 / params.tip_speed ** 2)
    inner = math.sqrt(1.0 + v2 * v2 / (4.0 * v0_2 * v0_2)) - v2 / (2.0 * v0_2)
    # inner > 0 analytically; rounding can take it a hair below at large V
    induced = params.induced_power * math.sqrt(max(inner, 0.0))
    parasite = (
        0.5
        * params.fuselage_drag_ratio
        * params.air_density
        * params.rotor_solidity
        * params.rotor_disc_area
        * speed ** 3
    )
    return blade + induced + parasite


def hover_power(params: PropulsionParams = PropulsionParams()) -> float:
    return params.blade_profile_power + params.induced_power


def movement_energy(
    start: Point3, end: Point3, speed: float, params: PropulsionParams = PropulsionParams()
) -> float:
    """Energy to fly the straight leg start -> end at constant speed."""
    distance = math.dist(start, end)
    if distance == 0:
        return 0.0
    if speed <= 0:
        raise InvalidParameterError("speed must be positive for a non-zero leg")
    return distance / speed * motion_power(speed, params)
