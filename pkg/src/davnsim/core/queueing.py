"""
Closed-form M/G/1 preemptive-resume priority formulas for the two request
classes served by a UAV: safety messages (class 1, high priority) and
vehicle state updates (class 2, low priority).
"""

import logging
from typing import Sequence, Tuple

from .errors import InvalidParameterError, UnstableQueueError
from .models import (
    QueueAnalysis,
    QueueClassMetrics,
    QueueParams,
    RequestClass,
    ServiceClassSpec,
    ServiceDistribution,
)

logger = logging.getLogger(__name__)

# Literal moments from the report's notations table
PUBLISHED_SAFETY_MOMENTS = (4.763e-7, 2.269e-13)
PUBLISHED_STATE_MOMENTS = (2.977e-8, 0.0)


def exp_moments(rate: float) -> Tuple[float, float]:
    """First and second raw moments of an exponential distribution."""
    if rate <= 0:
        raise InvalidParameterError(f"exponential rate must be positive, got {rate}")
    return 1.0 / rate, 2.0 / rate ** 2


def det_moments(value: float) -> Tuple[float, float]:
    if value <= 0:
        raise InvalidParameterError(f"deterministic service time must be positive, got {value}")
    return value, value * value


def residual_mean(spec: ServiceClassSpec) -> float:
    """Mean residual service time E[B^2] / (2 E[B])."""
    if spec.mean_service <= 0:
        raise InvalidParameterError("mean service time must be positive")
    return spec.second_moment / (2.0 * spec.mean_service)


def occupation(spec: ServiceClassSpec) -> float:
    return spec.arrival_rate * spec.mean_service


def aggregate_traffic(specs: Sequence[ServiceClassSpec]) -> Tuple[float, float, float]:
    """Total arrival rate, rate-weighted mean service time and load."""
    if not specs:
        raise InvalidParameterError("at least one service class is required")
    total_rate = sum(s.arrival_rate for s in specs)
    if total_rate == 0:
        return 0.0, 0.0, 0.0
    mean_service = sum((s.arrival_rate / total_rate) * s.mean_service for s in specs)
    return total_rate, mean_service, total_rate * mean_service


def analyze_priority_queue(high: ServiceClassSpec, low: ServiceClassSpec) -> QueueAnalysis:
    """
    Mean waits, sojourns and queue lengths of the two-class preemptive queue.

    The low-priority sojourn follows the report's final expression,
    sum_j rho_j E[R_j] / ((1 - rho) (1 - rho_1)) + E[B_2]; the textbook
    preemptive-resume value is returned alongside as sojourn_low_classical.

    Raises:
        UnstableQueueError: rho_1 + rho_2 >= 1.
    """
    rho_1 = occupation(high)
    rho_2 = occupation(low)
    if rho_1 >= 1 or rho_1 + rho_2 >= 1:
        raise UnstableQueueError(rho_1, rho_2)

    r_1 = residual_mean(high)
    r_2 = residual_mean(low)

    wait_1 = rho_1 * r_1 / (1 - rho_1)
    sojourn_1 = wait_1 + high.mean_service

    residual_load = rho_1 * r_1 + rho_2 * r_2
    denominator = (1 - (rho_1 + rho_2)) * (1 - rho_1)
    sojourn_2 = residual_load / denominator + low.mean_service
    wait_2 = sojourn_2 - low.mean_service

    classical_2 = low.mean_service / (1 - rho_1) + residual_load / denominator

    total_rate, mean_service, rho = aggregate_traffic([high, low])
    return QueueAnalysis(
        high=QueueClassMetrics(
            occupation=rho_1,
            residual=r_1,
            wait=wait_1,
            sojourn=sojourn_1,
            queue_length=high.arrival_rate * wait_1,
        ),
        low=QueueClassMetrics(
            occupation=rho_2,
            residual=r_2,
            wait=wait_2,
            sojourn=sojourn_2,
            queue_length=low.arrival_rate * wait_2,
        ),
        arrival_rate=total_rate,
        mean_service=mean_service,
        occupation=rho,
        sojourn_low_classical=classical_2,
    )


def classical_sojourn_low(high: ServiceClassSpec, low: ServiceClassSpec) -> float:
    return analyze_priority_queue(high, low).sojourn_low_classical


def pollaczek_khinchine_wait(spec: ServiceClassSpec) -> float:
    """Single-class M/G/1 mean wait lambda E[B^2] / (2 (1 - rho))."""
    rho = occupation(spec)
    if rho >= 1:
        raise UnstableQueueError(rho, 0.0)
    return spec.arrival_rate * spec.second_moment / (2 * (1 - rho))


def exponential_class(
    class_id: RequestClass, arrival_rate: float, service_rate: float, max_wait: float = 0.2
) -> ServiceClassSpec:
    mean, second = exp_moments(service_rate)
    return ServiceClassSpec(
        class_id=class_id,
        arrival_rate=arrival_rate,
        mean_service=mean,
        second_moment=second,
        max_wait=max_wait,
        distribution=ServiceDistribution.EXPONENTIAL,
    )


def deterministic_class(
    class_id: RequestClass, arrival_rate: float, service_time: float, max_wait: float = 0.2
) -> ServiceClassSpec:
    mean, second = det_moments(service_time)
    return ServiceClassSpec(
        class_id=class_id,
        arrival_rate=arrival_rate,
        mean_service=mean,
        second_moment=second,
        max_wait=max_wait,
        distribution=ServiceDistribution.DETERMINISTIC,
    )


def service_moments(params: QueueParams) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """
    Service-time moments of the safety and state classes.

    Derived from the processor throughput (clock x cores, one bit per cycle)
    unless params.paper_moments asks for the notations table's literal values.
    """
    if params.paper_moments:
        return PUBLISHED_SAFETY_MOMENTS, PUBLISHED_STATE_MOMENTS
    throughput = params.cpu_clock_hz * params.cpu_cores
    safety = exp_moments(throughput / params.safety_message_bits)
    state = det_moments(params.state_message_bits / throughput)
    return safety, state


def build_arrivals(count: int, params: QueueParams) -> Tuple[float, float]:
    """Class arrival rates at a UAV serving `count` vehicles."""
    if count < 0:
        raise InvalidParameterError(f"vehicle count must be non-negative, got {count}")
    lambda_1 = params.safety_arrival_fraction * count
    if params.lambda2_aggregate:
        lambda_2 = params.state_arrival_rate if count > 0 else 0.0
    else:
        lambda_2 = params.state_arrival_rate * count
    return lambda_1, lambda_2


def class_specs(
    lambda_1: float, lambda_2: float, params: QueueParams
) -> Tuple[ServiceClassSpec, ServiceClassSpec]:
    """Service class pair for the given arrival rates."""
    (m1, s1), (m2, s2) = service_moments(params)
    high = ServiceClassSpec(
        class_id=RequestClass.SAFETY,
        arrival_rate=lambda_1,
        mean_service=m1,
        second_moment=s1,
        max_wait=params.max_wait_safety,
        distribution=ServiceDistribution.EXPONENTIAL,
        paper_literal=params.paper_moments,
    )
    low = ServiceClassSpec(
        class_id=RequestClass.STATE,
        arrival_rate=lambda_2,
        mean_service=m2,
        second_moment=s2,
        max_wait=params.max_wait_state,
        distribution=ServiceDistribution.DETERMINISTIC,
        paper_literal=params.paper_moments,
    )
    return high, low
