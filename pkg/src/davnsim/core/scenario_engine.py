"""
Dataset generation loop.

Each step associates vehicles with UAVs, sizes every UAV's two-class queue
from its in-range vehicle count, evaluates the per-request delay
(V2D propagation + queueing sojourn + D2V propagation) and the UAV's energy
(D2V transmissions, configured D2D transfers and movement), and emits one
observation per UAV.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel

from ..utils.tools import (
    DATASET_COLUMNS,
    STEP_TABLE_COLUMNS,
    PathLike,
    read_sections,
    summary_path,
    write_frame,
    write_sections,
)
from .errors import InvalidParameterError, ModelDomainError, UnstableQueueError, ZeroCapacityError
from .link_model import (
    LinkBudgetResult,
    channel_gain,
    d2d_link,
    d2v_link,
    mean_path_loss_d2v,
    propagation_delay,
)
from .mobility import VehicleTrace, ingest_trace, synth_highway
from .models import (
    DelayMode,
    LinkBudget,
    LinkGeometry,
    Observation,
    PropulsionParams,
    QueueAnalysis,
    RequestClass,
    RequestDelay,
    RunConfig,
    RunSummary,
    Sample,
    StepRecord,
    UavState,
    VehicleState,
)
from .propulsion import hover_power, movement_energy
from .queueing import analyze_priority_queue, build_arrivals, class_specs
from .trajectory import generate_fleet

logger = logging.getLogger(__name__)


# --- Association ---

def associate(
    vehicles: Sequence[VehicleState], uavs: Sequence[UavState], radius: float
) -> Dict[str, Optional[int]]:
    """
    vehicle_id -> uav_id of the horizontally nearest UAV within `radius`,
    None when no UAV is in range. Ties go to the lowest uav_id.
    """
    ordered = sorted(uavs, key=lambda u: u.uav_id)
    mapping: Dict[str, Optional[int]] = {}
    for vehicle in vehicles:
        best, best_distance = None, math.inf
        for uav in ordered:
            distance = math.hypot(uav.x - vehicle.x, uav.y - vehicle.y)
            if distance <= radius and distance < best_distance:
                best, best_distance = uav.uav_id, distance
        mapping[vehicle.vehicle_id] = best
    return mapping


# --- Per-request delay ---

@dataclass(frozen=True)
class LinkContext:
    """Uplink and downlink budgets of one served vehicle."""

    v2d: LinkBudgetResult
    d2v: LinkBudgetResult
    size_bits: float
    delay_mode: DelayMode = DelayMode.PAPER_LITERAL


def _geometry(uav: UavState, vehicle: VehicleState) -> LinkGeometry:
    return LinkGeometry(uav.x, uav.y, uav.z, vehicle.x, vehicle.y)


def link_context(
    vehicle: VehicleState,
    uav: UavState,
    next_vehicle: VehicleState,
    next_uav: UavState,
    interferers: Sequence[UavState],
    budget: LinkBudget,
    delay_mode: DelayMode,
) -> LinkContext:
    """
    V2D on the current geometry at the vehicle's power, without interference;
    D2V on the next-step geometry at the UAV's power, interfered by `interferers`.

    Raises:
        ZeroCapacityError: either link carries nothing.
    """
    v2d = d2v_link(_geometry(uav, vehicle), budget, budget.vehicle_transmit_power)
    interferer_gains = [
        channel_gain(mean_path_loss_d2v(_geometry(other, next_vehicle), budget), budget.paper_literal_gain)
        for other in interferers
    ]
    d2v = d2v_link(_geometry(next_uav, next_vehicle), budget, budget.transmit_power, interferer_gains)
    return LinkContext(v2d, d2v, budget.message_size_bits, delay_mode)


def request_delay(
    request_class: RequestClass, analysis: QueueAnalysis, context: LinkContext, max_wait: float
) -> RequestDelay:
    """Propagation up, sojourn in the UAV queue, propagation down."""
    up = propagation_delay(context.v2d.distance, context.v2d.capacity, context.size_bits, context.delay_mode)
    down = propagation_delay(context.d2v.distance, context.d2v.capacity, context.size_bits, context.delay_mode)
    metrics = analysis.high if request_class is RequestClass.SAFETY else analysis.low
    return RequestDelay(v2d=up, queueing=metrics.sojourn, d2v=down, max_wait=max_wait)


# --- Energy ---

def movement_leg_energy(
    previous: Optional[UavState],
    current: UavState,
    step_seconds: float,
    params: PropulsionParams,
    hover_charging: bool = True,
) -> float:
    """Energy of the straight leg previous -> current flown in one step."""
    if previous is None or previous.position == current.position:
        return hover_power(params) * step_seconds if hover_charging else 0.0
    distance = math.dist(previous.position, current.position)
    return movement_energy(previous.position, current.position, distance / step_seconds, params)


def uav_step_energy(
    served: Sequence[LinkContext], d2d: Sequence[LinkBudgetResult], movement: float
) -> float:
    """D2V transmissions + D2D transfers + movement."""
    return sum(c.d2v.energy for c in served) + sum(r.energy for r in d2d) + movement


# --- Engine ---

@dataclass
class RunResult:
    samples: List[Sample]
    summary: RunSummary
    dataset_path: Optional[Path] = None
    summary_path: Optional[Path] = None
    config: Optional[RunConfig] = field(default=None, repr=False)


class ScenarioEngine:
    """Runs one configuration (one density or one trace) step by step."""

    def __init__(self, config: RunConfig, trace: Optional[VehicleTrace] = None):
        self.config = config
        n_uavs = len(config.ellipses)
        for source, target, count in config.d2d_transfers:
            if not (1 <= source <= n_uavs and 1 <= target <= n_uavs) or source == target:
                raise InvalidParameterError(f"D2D transfer ({source}, {target}) names no UAV pair")
            if count < 0:
                raise InvalidParameterError("D2D message count must be non-negative")
        self.trace = trace if trace is not None else self._load_vehicles()
        self.fleet = generate_fleet(config.trajectories, config.ellipses, config.steps, config.seed)
        self.summary = RunSummary(
            density=config.density,
            steps=config.steps,
            energy_totals=[0.0] * n_uavs,
            step_records=[],
        )
        self._max_waits = {
            RequestClass.SAFETY: config.queue.max_wait_safety,
            RequestClass.STATE: config.queue.max_wait_state,
        }

    def _load_vehicles(self) -> VehicleTrace:
        config = self.config
        if config.trace_path is not None:
            trace = ingest_trace(config.trace_path)
            if trace.steps < config.steps + 1:
                logger.warning(
                    f"Trace {config.trace_path} covers {trace.steps} steps, run needs {config.steps + 1}; "
                    "missing steps have no vehicles"
                )
            return trace
        return synth_highway(config.density, config.seed, config.steps, config.highway, config.step_seconds)

    def _interferers(self, serving: Sequence[UavState], uav_id: int, vehicle: VehicleState) -> List[UavState]:
        radius = self.config.interference_radius
        others = [u for u in serving if u.uav_id != uav_id]
        if radius is None:
            return others
        return [u for u in others if _geometry(u, vehicle).d_euc <= radius]

    def _d2d_results(
        self, uav: UavState, by_id: Dict[int, UavState], serving: Sequence[UavState], record: StepRecord
    ) -> List[LinkBudgetResult]:
        results = []
        for source, target, count in self.config.d2d_transfers:
            if source != uav.uav_id or count == 0:
                continue
            interferers = [u.position for u in serving if u.uav_id not in (source, target)]
            try:
                result = d2d_link(uav.position, by_id[target].position, self.config.link, interferers)
            except ModelDomainError as e:
                logger.debug(f"D2D {source}->{target} unusable: {e}")
                record.link_unusable += count
                continue
            results.extend([result] * count)
        return results

    def _step(self, t: int) -> Sample:
        config = self.config
        vehicles = self.trace.at(t)
        next_vehicles = {v.vehicle_id: v for v in self.trace.at(t + 1)}
        current = [trajectory[t] for trajectory in self.fleet]
        following = {s.uav_id: s for s in (trajectory[t + 1] for trajectory in self.fleet)}
        by_id = {s.uav_id: s for s in current}

        mapping = associate(vehicles, current, config.association_radius)
        served: Dict[int, List[VehicleState]] = {s.uav_id: [] for s in current}
        for vehicle in vehicles:
            uav_id = mapping[vehicle.vehicle_id]
            if uav_id is not None:
                served[uav_id].append(vehicle)
        unassociated = sum(1 for v in mapping.values() if v is None)
        serving = [by_id[i] for i, group in served.items() if group]
        serving_next = [following[u.uav_id] for u in serving]

        record = StepRecord(
            step=t, vehicles=len(vehicles), unassociated=unassociated, collisions=self.trace.collisions(t)
        )
        observations = []
        for index, uav in enumerate(current):
            previous = self.fleet[index][t - 1] if t > 0 else None
            movement = movement_leg_energy(
                previous, uav, config.step_seconds, config.propulsion, config.hover_charging
            )
            d2d = self._d2d_results(uav, by_id, serving, record)
            observation, energy = self._observe(
                t, uav, served[uav.uav_id], next_vehicles, following[uav.uav_id], serving_next, d2d, movement, record
            )
            self.summary.energy_totals[index] += energy
            observations.append(observation)

        total_rho = sum(o.rho for o in observations)
        assert total_rho + unassociated == len(vehicles), (
            f"step {t}: {total_rho} served + {unassociated} unassociated != {len(vehicles)} vehicles"
        )
        if record.unstable_uavs:
            self.summary.unstable_steps += 1
        self.summary.link_unusable += record.link_unusable
        self.summary.step_records.append(record)
        return Sample(step=t, observations=tuple(observations), collisions=record.collisions)

    def _observe(
        self,
        t: int,
        uav: UavState,
        group: Sequence[VehicleState],
        next_vehicles: Dict[str, VehicleState],
        next_uav: UavState,
        serving_next: Sequence[UavState],
        d2d: Sequence[LinkBudgetResult],
        movement: float,
        record: StepRecord,
    ) -> Tuple[Observation, float]:
        """Observation of one UAV and its energy for the step."""
        config = self.config
        n = len(group)
        if n == 0:
            energy = uav_step_energy((), d2d, movement)
            return Observation(uav.uav_id, uav.x, uav.y, uav.z, uav.heading, 0, 0.0, 0.0, 0.0, 0.0), energy

        lambda_1, lambda_2 = build_arrivals(n, config.queue)
        high, low = class_specs(lambda_1, lambda_2, config.queue)
        try:
            analysis = analyze_priority_queue(high, low)
        except UnstableQueueError as e:
            logger.debug(f"step {t} UAV {uav.uav_id}: {e}")
            analysis = None
            record.unstable_uavs += 1

        # both classes mixed, weighted by arrival rate
        weights = {RequestClass.SAFETY: lambda_1, RequestClass.STATE: lambda_2}
        contexts = []
        weighted_sum = weight_total = 0.0
        for vehicle in group:
            next_vehicle = next_vehicles.get(vehicle.vehicle_id, vehicle)
            try:
                context = link_context(
                    vehicle,
                    uav,
                    next_vehicle,
                    next_uav,
                    self._interferers(serving_next, uav.uav_id, next_vehicle),
                    config.link,
                    config.delay_mode,
                )
            except ZeroCapacityError:
                record.link_unusable += 1
                continue
            contexts.append(context)
            if analysis is None:
                continue
            for request_class, weight in weights.items():
                if weight == 0:
                    continue
                delay = request_delay(request_class, analysis, context, self._max_waits[request_class])
                self.summary.requests += 1
                if logger.isEnabledFor(logging.DEBUG):
                    logger.debug(
                        f"step={t} uav={uav.uav_id} vehicle={vehicle.vehicle_id} class={int(request_class)} "
                        f"v2d={delay.v2d:.9g} queue={delay.queueing:.9g} d2v={delay.d2v:.9g} "
                        f"total={delay.total:.9g} expired={delay.expired}"
                    )
                value = delay.total
                if delay.expired:
                    self.summary.expired += 1
                    record.expired += 1
                    if not config.include_expired_capped:
                        continue
                    value = delay.max_wait
                weighted_sum += weight * value
                weight_total += weight

        mean_wait = weighted_sum / weight_total if analysis is not None and weight_total > 0 else None
        energy = uav_step_energy(contexts, d2d, movement)
        observation = Observation(
            uav_id=uav.uav_id,
            x=uav.x,
            y=uav.y,
            z=uav.z,
            theta=uav.heading,
            rho=n,
            mean_wait=mean_wait,
            mean_energy=energy / n,
            mean_risky_time=sum(v.risky_time for v in group) / n,
            mean_blocking_time=sum(v.blocking_time for v in group) / n,
        )
        return observation, energy

    def run(self) -> RunResult:
        config = self.config
        logger.info(
            f"Run start: density={config.density} steps={config.steps} seed={config.seed} "
            f"uavs={len(config.ellipses)}"
        )
        samples = [self._step(t) for t in range(config.steps)]
        summary = self.summary
        if summary.unstable_steps:
            logger.warning(f"{summary.unstable_steps} step(s) had at least one unstable UAV queue")
        if summary.link_unusable:
            logger.warning(f"{summary.link_unusable} link(s) had zero capacity and were excluded")
        if summary.expired:
            logger.warning(
                f"{summary.expired}/{summary.requests} requests expired ({summary.expired_fraction:.2%})"
            )
        logger.info(f"Run end: {len(samples)} samples, {summary.requests} requests evaluated")
        return RunResult(samples, summary, config=config)


def run(config: RunConfig, trace: Optional[VehicleTrace] = None) -> RunResult:
    """Run one configuration; writes the dataset and summary when config.output_path is set."""
    result = ScenarioEngine(config, trace).run()
    if config.output_path is not None:
        result.dataset_path = write_dataset(result.samples, config.output_path)
        result.summary_path = write_summary(result.summary, summary_path(config.output_path))
        logger.info(f"Wrote {result.dataset_path} and {result.summary_path}")
    return result


# --- Output ---

def dataset_frame(samples: Sequence[Sample]) -> pd.DataFrame:
    rows = [
        (
            sample.step,
            o.uav_id,
            o.x,
            o.y,
            o.z,
            o.theta,
            o.rho,
            o.mean_wait if o.mean_wait is not None else math.nan,
            o.mean_energy,
            o.mean_risky_time,
            o.mean_blocking_time,
            sample.collisions,
        )
        for sample in samples
        for o in sample.observations
    ]
    return pd.DataFrame(rows, columns=DATASET_COLUMNS)


def write_dataset(samples: Sequence[Sample], path: PathLike) -> Path:
    return write_frame(dataset_frame(samples), path, DATASET_COLUMNS)


def summary_frames(summary: RunSummary) -> List[pd.DataFrame]:
    totals = pd.DataFrame(
        [
            {
                "density": summary.density,
                "steps": summary.steps,
                "requests": summary.requests,
                "expired": summary.expired,
                "expired_fraction": float(summary.expired_fraction),
                "unstable_steps": summary.unstable_steps,
                "link_unusable": summary.link_unusable,
            }
        ]
    )
    energy = pd.DataFrame(
        {
            "uav_id": list(range(1, len(summary.energy_totals or []) + 1)),
            "energy_total_j": [float(e) for e in summary.energy_totals or []],
        }
    )
    steps = pd.DataFrame(
        [
            (r.step, r.vehicles, r.unassociated, r.collisions, r.expired, r.unstable_uavs)
            for r in summary.step_records or []
        ],
        columns=STEP_TABLE_COLUMNS,
    )
    return [totals, energy, steps]


def write_summary(summary: RunSummary, path: PathLike) -> Path:
    return write_sections(summary_frames(summary), path)


# --- Post-run validation ---

class ValidationReport(BaseModel):
    path: str
    steps: int = 0
    errors: List[str] = []

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_dataset(
    path: PathLike,
    trace: Optional[VehicleTrace] = None,
    uavs: int = 4,
    summary: Optional[PathLike] = None,
) -> ValidationReport:
    """
    Check a dataset file: exact header, `uavs` rows per contiguous step,
    conservation against the summary's step table and r-bar agreement with
    the step table and, when given, the vehicle trace.
    """
    path = Path(path)
    report = ValidationReport(path=str(path))
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
    if header != ",".join(DATASET_COLUMNS):
        report.errors.append(f"header mismatch: {header!r}")
        return report

    frame = pd.read_csv(path)
    counts = frame.groupby("step").size()
    report.steps = len(counts)
    expected_steps = list(range(len(counts)))
    if list(counts.index) != expected_steps:
        report.errors.append("steps are not contiguous from 0")
    for step, count in counts.items():
        if count != uavs:
            report.errors.append(f"step {step}: {count} rows, expected {uavs}")

    collisions = frame.groupby("step")["collisions"].agg(["min", "max"])
    for step, row in collisions.iterrows():
        if row["min"] != row["max"]:
            report.errors.append(f"step {step}: collisions differ between rows")
        if trace is not None and row["min"] != trace.collisions(int(step)):
            report.errors.append(
                f"step {step}: collisions {row['min']} != trace count {trace.collisions(int(step))}"
            )

    summary = Path(summary) if summary is not None else summary_path(path)
    if summary.exists():
        step_table = read_sections(summary)[-1].set_index("step")
        rho = frame.groupby("step")["rho"].sum()
        for step, total in rho.items():
            if step not in step_table.index:
                report.errors.append(f"step {step}: missing from summary step table")
                continue
            entry = step_table.loc[step]
            if total + entry["unassociated"] != entry["vehicles"]:
                report.errors.append(
                    f"step {step}: sum(rho)={total} + unassociated={entry['unassociated']} "
                    f"!= vehicles={entry['vehicles']}"
                )
            if collisions.loc[step, "min"] != entry["collisions"]:
                report.errors.append(f"step {step}: collisions disagree with summary")
    else:
        report.errors.append(f"summary file not found: {summary}")

    for error in report.errors:
        logger.warning(f"{path}: {error}")
    return report
