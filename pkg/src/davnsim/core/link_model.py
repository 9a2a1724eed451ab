"""
D2V, V2D and D2D link budgets.

Angles are in degrees, losses in dB, gains and SINR linear, powers in watts.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

from .errors import DegenerateGeometryError, InvalidParameterError, ZeroCapacityError
from .models import SPEED_OF_LIGHT, DelayMode, LinkBudget, LinkGeometry

logger = logging.getLogger(__name__)

Point3 = Tuple[float, float, float]


def elevation_angle(geometry: LinkGeometry) -> float:
    """arctan(h / d_hor) in degrees; 90 directly overhead."""
    if geometry.uav_z <= 0:
        raise DegenerateGeometryError(f"UAV altitude must be positive, got {geometry.uav_z}")
    return math.degrees(math.atan2(geometry.uav_z, geometry.d_hor))


def p_los(theta: float, a: float, b: float) -> float:
    if not 0.0 <= theta <= 90.0:
        raise InvalidParameterError(f"elevation angle must be in [0, 90] degrees, got {theta}")
    return 1.0 / (1.0 + a * math.exp(-b * (theta - a)))


def p_nlos(theta: float, a: float, b: float) -> float:
    return 1.0 - p_los(theta, a, b)


def free_space_loss(distance: float, frequency: float) -> float:
    """20 log10(4 pi f d / c)."""
    if distance <= 0:
        raise DegenerateGeometryError(f"link distance must be positive, got {distance}")
    return 20.0 * math.log10(4.0 * math.pi * frequency * distance / SPEED_OF_LIGHT)


def path_loss_d2v(geometry: LinkGeometry, budget: LinkBudget, los: bool) -> float:
    eta = budget.eta_los if los else budget.eta_nlos
    return free_space_loss(geometry.d_euc, budget.carrier_frequency) + eta


def mean_path_loss_d2v(geometry: LinkGeometry, budget: LinkBudget) -> float:
    """LoS/NLoS path losses weighted by the LoS probability at the link's elevation."""
    prob = p_los(elevation_angle(geometry), budget.los_a, budget.los_b)
    los = path_loss_d2v(geometry, budget, True)
    nlos = path_loss_d2v(geometry, budget, False)
    return prob * los + (1.0 - prob) * nlos


def mean_path_loss_d2v_expanded(geometry: LinkGeometry, budget: LinkBudget) -> float:
    """
    Expanded closed form of the mean D2V path loss:
    (eta_LoS - eta_NLoS) p_LoS + 20 log10(d_euc) + 20 log10(4 pi f_c / c) + eta_NLoS.

    The published expansion carries a sec(theta) factor on the distance term;
    d_euc sec(theta) differs from d_euc, so the factor is dropped.
    """
    d_euc = geometry.d_euc
    if d_euc <= 0:
        raise DegenerateGeometryError("UAV and ground node coincide")
    prob = p_los(elevation_angle(geometry), budget.los_a, budget.los_b)
    return (
        (budget.eta_los - budget.eta_nlos) * prob
        + 20.0 * math.log10(d_euc)
        + 20.0 * math.log10(4.0 * math.pi * budget.carrier_frequency / SPEED_OF_LIGHT)
        + budget.eta_nlos
    )


def uav_distance(pos_n: Point3, pos_m: Point3, planar: bool = False) -> float:
    dx = pos_n[0] - pos_m[0]
    dy = pos_n[1] - pos_m[1]
    if planar:
        return math.hypot(dx, dy)
    return math.sqrt(dx * dx + dy * dy + (pos_n[2] - pos_m[2]) ** 2)


def path_loss_d2d(pos_n: Point3, pos_m: Point3, budget: LinkBudget) -> float:
    distance = uav_distance(pos_n, pos_m, budget.d2d_planar)
    if distance == 0:
        raise DegenerateGeometryError(f"UAV positions coincide at {pos_n}")
    return free_space_loss(distance, budget.carrier_frequency) + budget.eta_los_d2d


def channel_gain(path_loss_db: float, paper_literal: bool = False) -> float:
    """Linear gain 10^(-PL/10); paper_literal computes 1/PL on the dB value instead."""
    if paper_literal:
        if path_loss_db == 0:
            raise InvalidParameterError("1/PL is undefined for a 0 dB path loss")
        return 1.0 / path_loss_db
    return 10.0 ** (-path_loss_db / 10.0)


def noise_power_w(budget: LinkBudget) -> float:
    """Noise density integrated over the bandwidth, in watts."""
    dbm = budget.noise_density_dbm + 10.0 * math.log10(budget.bandwidth)
    return 10.0 ** (dbm / 10.0) / 1000.0


def sinr(
    gain_signal: float,
    interferer_gains: Sequence[float],
    p_trans: float,
    budget: LinkBudget,
    interferer_powers: Sequence[float] = (),
) -> float:
    """
    p G_signal / (sum_n p_n G_n + N0). Interferers transmit at p_trans unless
    interferer_powers gives one power per gain.
    """
    if gain_signal < 0 or any(g < 0 for g in interferer_gains):
        raise InvalidParameterError("channel gains must be non-negative")
    if interferer_powers and len(interferer_powers) != len(interferer_gains):
        raise InvalidParameterError("one power per interferer gain is required")
    powers = interferer_powers or [p_trans] * len(interferer_gains)
    interference = sum(p * g for p, g in zip(powers, interferer_gains))
    return p_trans * gain_signal / (interference + noise_power_w(budget))


def capacity(sinr_linear: float, bandwidth: float) -> float:
    if sinr_linear < 0:
        raise InvalidParameterError(f"SINR must be non-negative, got {sinr_linear}")
    return bandwidth * math.log2(1.0 + sinr_linear)


def transmit_energy(size_bits: float, rate: float, p_trans: float) -> float:
    if rate <= 0:
        raise ZeroCapacityError("link capacity is zero")
    return size_bits / rate * p_trans


def propagation_delay(
    distance: float, rate: float, size_bits: float, mode: DelayMode = DelayMode.PAPER_LITERAL
) -> float:
    """
    paper-literal: distance / rate, as the delay model prescribes.
    physical: transmission S/C plus propagation d/c.
    """
    if rate <= 0:
        raise ZeroCapacityError("link capacity is zero")
    if mode is DelayMode.PAPER_LITERAL:
        return distance / rate
    return size_bits / rate + distance / SPEED_OF_LIGHT


@dataclass(frozen=True)
class LinkBudgetResult:
    path_loss: float
    gain: float
    sinr: float
    capacity: float
    energy: float
    distance: float


def d2v_link(
    geometry: LinkGeometry,
    budget: LinkBudget,
    p_trans: float,
    interferer_gains: Sequence[float] = (),
) -> LinkBudgetResult:
    """Mean path loss through energy for one air-to-ground link."""
    pl = mean_path_loss_d2v(geometry, budget)
    gain = channel_gain(pl, budget.paper_literal_gain)
    ratio = sinr(gain, interferer_gains, p_trans, budget)
    rate = capacity(ratio, budget.bandwidth)
    energy = transmit_energy(budget.message_size_bits, rate, p_trans)
    return LinkBudgetResult(pl, gain, ratio, rate, energy, geometry.d_euc)


def d2d_link(
    pos_n: Point3,
    pos_m: Point3,
    budget: LinkBudget,
    interferers: Sequence[Point3] = (),
) -> LinkBudgetResult:
    """Full UAV-to-UAV chain: path loss, gain, SINR at pos_m, capacity and sender energy."""
    pl = path_loss_d2d(pos_n, pos_m, budget)
    gain = channel_gain(pl, budget.paper_literal_gain)
    interferer_gains = [
        channel_gain(path_loss_d2d(p, pos_m, budget), budget.paper_literal_gain)
        for p in interferers
    ]
    ratio = sinr(gain, interferer_gains, budget.transmit_power, budget)
    rate = capacity(ratio, budget.bandwidth)
    energy = transmit_energy(budget.message_size_bits, rate, budget.transmit_power)
    distance = uav_distance(pos_n, pos_m, budget.d2d_planar)
    return LinkBudgetResult(pl, gain, ratio, rate, energy, distance)
