"""
Per-step vehicle states.

Two sources feed the scenario engine: trace files in the
`step,vehicle_id,x,y,speed,kind,t_r,t_b,collided` dialect (converted from
SUMO floating-car output or any other generator), and a synthetic circular
highway used when no trace is given.
"""

import logging
import math
from collections import defaultdict
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..utils.rng import SeededRNG
from ..utils.tools import PathLike, write_frame
from .errors import InvalidParameterError, TraceIngestionError
from .models import KMH, TRACE_COLUMNS, HighwayParams, VehicleKind, VehicleState

logger = logging.getLogger(__name__)


class VehicleTrace:
    """Immutable step -> vehicle states index."""

    def __init__(self, states: Mapping[int, Sequence[VehicleState]], steps: Optional[int] = None):
        self._states: Dict[int, Tuple[VehicleState, ...]] = {
            step: tuple(vehicles) for step, vehicles in sorted(states.items()) if vehicles
        }
        if steps is None:
            steps = max(self._states) + 1 if self._states else 0
        self._steps = steps

    @property
    def steps(self) -> int:
        """Number of indexed steps (last step + 1)."""
        return self._steps

    def at(self, step: int) -> Tuple[VehicleState, ...]:
        return self._states.get(step, ())

    def collisions(self, step: int) -> int:
        flagged = sum(1 for v in self.at(step) if v.collided)
        return math.ceil(flagged / 2)

    def items(self):
        return self._states.items()

    def __len__(self) -> int:
        return sum(len(v) for v in self._states.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, VehicleTrace):
            return NotImplemented
        return self._steps == other._steps and self._states == other._states

    def __repr__(self) -> str:
        return f"VehicleTrace(steps={self._steps}, records={len(self)})"


# --- Trace files ---

def _parse_float(value: str, column: str, line: int, path: str) -> float:
    try:
        result = float(value)
    except ValueError:
        raise TraceIngestionError(f"column '{column}': not a number: {value!r}", line, path) from None
    if not math.isfinite(result):
        raise TraceIngestionError(f"column '{column}': non-finite value {value!r}", line, path)
    return result


def _parse_row(row: Sequence[str], line: int, path: str) -> Tuple[int, VehicleState]:
    step_raw, vehicle_id, x, y, speed, kind, t_r, t_b, collided = row
    try:
        step = int(step_raw)
    except ValueError:
        raise TraceIngestionError(f"column 'step': not an integer: {step_raw!r}", line, path) from None
    if step < 0:
        raise TraceIngestionError(f"column 'step': negative step {step}", line, path)
    if not vehicle_id:
        raise TraceIngestionError("column 'vehicle_id': empty", line, path)
    try:
        kind_value = VehicleKind(kind)
    except ValueError:
        raise TraceIngestionError(f"column 'kind': unknown kind {kind!r}", line, path) from None
    if collided not in ("0", "1"):
        raise TraceIngestionError(f"column 'collided': expected 0 or 1, got {collided!r}", line, path)

    values = {}
    for column, raw in (("x", x), ("y", y), ("speed", speed), ("t_r", t_r), ("t_b", t_b)):
        values[column] = _parse_float(raw, column, line, path)
    for column in ("speed", "t_r", "t_b"):
        if values[column] < 0:
            raise TraceIngestionError(f"column '{column}': negative value {values[column]}", line, path)

    return step, VehicleState(
        vehicle_id=vehicle_id,
        x=values["x"],
        y=values["y"],
        speed=values["speed"],
        kind=kind_value,
        risky_time=values["t_r"],
        blocking_time=values["t_b"],
        collided=collided == "1",
    )


def ingest_trace(path: PathLike) -> VehicleTrace:
    """
    Load and validate a trace file.

    Raises:
        TraceIngestionError: bad header, malformed row, duplicate
            (step, vehicle), a vehicle going back in time, or negative
            speed/time fields. The message names the file line.
    """
    source = str(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise TraceIngestionError("missing header row", 1, source) from None
    except pd.errors.ParserError as e:
        raise TraceIngestionError(f"malformed file: {e}", None, source) from None

    if list(frame.columns) != TRACE_COLUMNS:
        raise TraceIngestionError(
            f"header must be '{','.join(TRACE_COLUMNS)}', got '{','.join(map(str, frame.columns))}'",
            1,
            source,
        )

    index: Dict[int, List[VehicleState]] = defaultdict(list)
    last_step: Dict[str, int] = {}
    for position, row in enumerate(frame.itertuples(index=False, name=None)):
        line = position + 2
        step, state = _parse_row([str(v).strip() for v in row], line, source)
        previous = last_step.get(state.vehicle_id)
        if previous is not None:
            if previous == step:
                raise TraceIngestionError(
                    f"duplicate record for vehicle {state.vehicle_id!r} at step {step}", line, source
                )
            if previous > step:
                raise TraceIngestionError(
                    f"vehicle {state.vehicle_id!r} goes back from step {previous} to {step}", line, source
                )
        last_step[state.vehicle_id] = step
        index[step].append(state)

    trace = VehicleTrace(index)
    logger.info(f"Ingested {len(trace)} records over {trace.steps} steps from {source}")
    return trace


def trace_frame(trace: VehicleTrace) -> pd.DataFrame:
    rows = [
        (step, v.vehicle_id, v.x, v.y, v.speed, v.kind.value, v.risky_time, v.blocking_time, int(v.collided))
        for step, vehicles in trace.items()
        for v in vehicles
    ]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def export_trace(trace: VehicleTrace, path: PathLike):
    """Write a trace that ingest_trace reads back unchanged (full float precision)."""
    return write_frame(trace_frame(trace), path, TRACE_COLUMNS, float_format=None)


# --- Synthetic highway ---

# rounding tolerance on same-lane spacing
_SLACK = 1e-9


class _Lane:
    __slots__ = ("radius", "length", "order")

    def __init__(self, radius: float, order: List[int]):
        self.radius = radius
        self.length = 2 * math.pi * radius
        self.order = order


def _draw_fleet(density: int, params: HighwayParams, rng: SeededRNG):
    """Lane, arc position, speed (m/s) and kind of every vehicle."""
    lanes = rng.fork("lane").generator.integers(0, params.lanes, density)
    angles = rng.fork("angle").uniform(0.0, 2 * math.pi, density)
    kind_draws = rng.fork("kind").random(density)
    base_speeds = rng.fork("speed").uniform(params.speed_min_kmh, params.speed_max_kmh, density)
    over_speeds = rng.fork("overspeed").uniform(
        params.speed_max_kmh, params.speed_max_kmh * (1 + params.aggressive_overspeed), density
    )

    kinds = []
    speeds = np.empty(density)
    for k in range(density):
        if kind_draws[k] < params.emergency_fraction:
            kinds.append(VehicleKind.EMERGENCY)
            speeds[k] = base_speeds[k]
        elif kind_draws[k] < params.emergency_fraction + params.aggressive_fraction:
            kinds.append(VehicleKind.AGGRESSIVE)
            speeds[k] = over_speeds[k]
        else:
            kinds.append(VehicleKind.ORDINARY)
            speeds[k] = base_speeds[k]
    return lanes, angles, speeds * KMH, kinds


class HighwaySimulator:
    """
    Vehicles on concentric circular lanes, one direction, no lane changes.

    Vehicles keep their lane order. A follower closer than collision_gap to
    its leader is flagged (with the leader) as one collision, put back
    collision_gap behind the leader and slowed to the leader's speed. A
    vehicle takes part in at most one counted collision per step.
    """

    def __init__(self, density: int, params: HighwayParams, seed: int, step_seconds: float = 0.4):
        if density < 0:
            raise InvalidParameterError(f"density must be non-negative, got {density}")
        self.params = params
        self.dt = step_seconds
        self.density = density
        rng = SeededRNG(seed).fork("highway")
        lanes, angles, speeds, kinds = _draw_fleet(density, params, rng)

        centre = (params.lanes - 1) / 2
        self.lanes: List[_Lane] = []
        self.lane_of = lanes.tolist()
        self.speeds = speeds.tolist()
        self.kinds = kinds
        self.ids = [f"veh{k}" for k in range(density)]
        self.arc = [0.0] * density
        for lane in range(params.lanes):
            radius = params.highway_radius + (lane - centre) * params.lane_spacing
            members = [k for k in range(density) if self.lane_of[k] == lane]
            members.sort(key=lambda k: angles[k])
            for k in members:
                self.arc[k] = angles[k] * radius
            if len(members) * params.collision_gap >= 2 * math.pi * radius:
                raise InvalidParameterError(
                    f"lane {lane} (radius {radius:g} m) cannot hold {len(members)} vehicles "
                    f"{params.collision_gap:g} m apart; lower the density or collision_gap"
                )
            self.lanes.append(_Lane(radius, members))

        self.risky = [0.0] * density
        self.blocking = [0.0] * density
        # initial placement is spread out without counting collisions
        self._respace(count=False)

    def _leader(self, lane: _Lane, i: int) -> Tuple[int, float]:
        """Leader of the i-th vehicle in lane order and its unwrapped arc position."""
        m = len(lane.order)
        j = (i + 1) % m
        leader = lane.order[j]
        arc = self.arc[leader] + (lane.length if j == 0 else 0.0)
        return leader, arc

    def _respace(self, count: bool = True) -> List[bool]:
        """
        Backward passes per lane, each starting behind the widest gap so every
        leader is final before its follower is placed. A pass that leaves the
        starting pair too close is repeated; lane capacity guarantees a fixed
        point, and no vehicle ends behind its position of the previous step.
        """
        collided = [False] * self.density
        gap = self.params.collision_gap
        for lane in self.lanes:
            m = len(lane.order)
            if m < 2:
                continue
            for _ in range(m):
                gaps = [self._leader(lane, i)[1] - self.arc[lane.order[i]] for i in range(m)]
                start = max(range(m), key=gaps.__getitem__)
                pushed = False
                for offset in range(1, m):
                    i = (start - offset) % m
                    follower = lane.order[i]
                    leader, leader_arc = self._leader(lane, i)
                    if leader_arc - self.arc[follower] >= gap - _SLACK:
                        continue
                    pushed = True
                    self.arc[follower] = leader_arc - gap
                    self.speeds[follower] = self.speeds[leader]
                    if count and not collided[follower] and not collided[leader]:
                        collided[follower] = collided[leader] = True
                leader_arc = self._leader(lane, start)[1]
                if not pushed or leader_arc - self.arc[lane.order[start]] >= gap - _SLACK:
                    break
        return collided

    def _accrue(self):
        p = self.params
        for lane in self.lanes:
            m = len(lane.order)
            if m < 2:
                continue
            for i, k in enumerate(lane.order):
                leader, leader_arc = self._leader(lane, i)
                if (leader_arc - self.arc[k]) / self.speeds[k] < p.risky_headway:
                    self.risky[k] += self.dt
                # walk backwards through followers within the look-behind distance
                for back in range(1, m):
                    j = (i - back) % m
                    other = lane.order[j]
                    behind = self.arc[k] - self.arc[other] + (lane.length if j > i else 0.0)
                    if behind > p.blocking_distance:
                        break
                    if self.kinds[other] is VehicleKind.EMERGENCY:
                        self.blocking[k] += self.dt
                        break

    def _snapshot(self, collided: Sequence[bool]) -> Tuple[VehicleState, ...]:
        states = []
        for k in range(self.density):
            lane = self.lanes[self.lane_of[k]]
            angle = self.arc[k] / lane.radius
            states.append(
                VehicleState(
                    vehicle_id=self.ids[k],
                    x=lane.radius * math.cos(angle),
                    y=lane.radius * math.sin(angle),
                    speed=self.speeds[k],
                    kind=self.kinds[k],
                    risky_time=self.risky[k],
                    blocking_time=self.blocking[k],
                    collided=collided[k],
                )
            )
        return tuple(states)

    def step(self) -> Tuple[VehicleState, ...]:
        for k in range(self.density):
            self.arc[k] += self.speeds[k] * self.dt
        collided = self._respace()
        self._accrue()
        flagged = sum(collided)
        assert flagged % 2 == 0, "collisions must pair two vehicles"
        return self._snapshot(collided)

    def run(self, steps: int) -> VehicleTrace:
        states = {0: self._snapshot([False] * self.density)}
        for t in range(1, steps + 1):
            states[t] = self.step()
        return VehicleTrace(states, steps + 1)


def synth_highway(
    density: int, seed: int, steps: int, params: HighwayParams = HighwayParams(), step_seconds: float = 0.4
) -> VehicleTrace:
    """Trace of `steps + 1` states for `density` vehicles on the circular highway."""
    trace = HighwaySimulator(density, params, seed, step_seconds).run(steps)
    logger.debug(f"Synthetic highway: density={density} steps={steps} seed={seed}")
    return trace
