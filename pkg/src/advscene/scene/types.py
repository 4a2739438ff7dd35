"""Domain types shared by every pipeline stage.

All quantities are SI: meters, seconds, radians. The road frame is the world
frame (straight highway segments), heading 0 points along +x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from advscene.errors import InvalidStateError

ROLE_EGO = "ego"
ROLE_ADVERSARIAL = "adversarial"
ROLE_BACKGROUND = "background"
ROLES = (ROLE_EGO, ROLE_ADVERSARIAL, ROLE_BACKGROUND)


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidStateError(f"{name}: non-finite value {v!r}")


@dataclass(frozen=True)
class VehicleState:
    """Unicycle state: position, heading (rad, 0 = +x), speed (m/s, >= 0)."""

    x: float
    y: float
    theta: float
    v: float

    def __post_init__(self) -> None:
        _require_finite("VehicleState", self.x, self.y, self.theta, self.v)
        if self.v < 0.0:
            raise InvalidStateError(f"VehicleState: negative speed {self.v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta, self.v], dtype=np.float64)


@dataclass(frozen=True)
class VehicleAction:
    """Unicycle action: longitudinal acceleration (m/s^2) and yaw rate (rad/s)."""

    accel: float
    yaw_rate: float

    def __post_init__(self) -> None:
        _require_finite("VehicleAction", self.accel, self.yaw_rate)


@dataclass(frozen=True)
class FrameAccel:
    """Per-frame planar control command: lateral and longitudinal acceleration."""

    a_lat: float
    a_lon: float

    def __post_init__(self) -> None:
        _require_finite("FrameAccel", self.a_lat, self.a_lon)


@dataclass(frozen=True)
class PointMassState:
    """Double-integrator state used by the stage-1 planning simulation."""

    x: float
    y: float
    vx: float
    vy: float

    def __post_init__(self) -> None:
        _require_finite("PointMassState", self.x, self.y, self.vx, self.vy)


@dataclass(frozen=True)
class AgentDims:
    """Vehicle footprint plus its scenario role."""

    agent_id: int
    length: float
    width: float
    role: str = ROLE_BACKGROUND

    def __post_init__(self) -> None:
        if self.length <= 0 or self.width <= 0:
            raise InvalidStateError(
                f"AgentDims: non-positive footprint {self.length} x {self.width}"
            )
        if self.role not in ROLES:
            raise InvalidStateError(f"AgentDims: unknown role {self.role!r}")


@dataclass(frozen=True)
class Lane:
    lane_id: int
    y_center: float
    width: float
    direction: int

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise InvalidStateError(f"Lane {self.lane_id}: width {self.width} <= 0")


@dataclass(frozen=True)
class RoadMap:
    """Straight-road map: lanes grouped by driving direction with lateral bounds.

    ``bounds`` maps a direction group to its drivable lateral interval
    [y_lower, y_upper]; every agent inherits the interval of its group.
    """

    lanes: Tuple[Lane, ...]
    bounds: Mapping[int, Tuple[float, float]]
    x_range: Tuple[float, float] = (0.0, 420.0)

    def __post_init__(self) -> None:
        for direction, (lo, hi) in self.bounds.items():
            if not lo < hi:
                raise InvalidStateError(
                    f"RoadMap: bounds for direction {direction} not ordered: [{lo}, {hi}]"
                )

    def bounds_for(self, direction: int) -> Tuple[float, float]:
        return tuple(self.bounds[direction])

    def lanes_for(self, direction: int) -> Tuple[Lane, ...]:
        return tuple(l for l in self.lanes if l.direction == direction)

    def lane_of(self, y: float, direction: int) -> int:
        """Lane id whose center is nearest to ``y`` within the direction group."""
        group = self.lanes_for(direction)
        if not group:
            raise InvalidStateError(f"RoadMap: no lanes for direction {direction}")
        return min(group, key=lambda l: abs(l.y_center - y)).lane_id

    @property
    def lane_centerlines(self) -> List[List[Tuple[float, float]]]:
        x0, x1 = self.x_range
        return [[(x0, l.y_center), (x1, l.y_center)] for l in self.lanes]


def single_direction_road(
    lane_centers: Sequence[float],
    lane_width: float = 4.0,
    direction: int = 1,
    x_range: Tuple[float, float] = (-200.0, 600.0),
) -> RoadMap:
    """Convenience builder for synthetic one-carriageway maps."""
    centers = sorted(lane_centers)
    lanes = tuple(
        Lane(lane_id=i + 1, y_center=c, width=lane_width, direction=direction)
        for i, c in enumerate(centers)
    )
    lo = centers[0] - lane_width / 2.0
    hi = centers[-1] + lane_width / 2.0
    return RoadMap(lanes=lanes, bounds={direction: (lo, hi)}, x_range=x_range)


@dataclass(frozen=True)
class JointState:
    """Joint state of all participants at one frame."""

    states: Mapping[int, VehicleState]
    t: int
    dt: float

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise InvalidStateError(f"JointState: dt {self.dt} <= 0")
        object.__setattr__(self, "states", dict(self.states))

    @property
    def agent_ids(self) -> Tuple[int, ...]:
        return tuple(sorted(self.states))

    def state_of(self, agent_id: int) -> VehicleState:
        return self.states[agent_id]

    def as_array(self, agent_ids: Sequence[int]) -> np.ndarray:
        return np.array(
            [self.states[a].as_array() for a in agent_ids], dtype=np.float64
        )


@dataclass
class Trajectory:
    """Joint action sequence plus the state sequence it integrates to.

    ``states[t]`` is the joint state after applying ``actions[t]``; the
    integration starts at ``init``. Construct through
    :func:`advscene.scene.dynamics.rollout_actions` so the consistency
    invariant holds by construction.
    """

    agent_ids: Tuple[int, ...]
    actions: np.ndarray  # (T, N, 2): [accel, yaw_rate]
    states: np.ndarray  # (T, N, 4): [x, y, theta, v]
    init: JointState
    dt: float

    def __post_init__(self) -> None:
        self.actions = np.asarray(self.actions, dtype=np.float64)
        self.states = np.asarray(self.states, dtype=np.float64)
        if self.actions.ndim != 3 or self.actions.shape[2] != 2:
            raise InvalidStateError(f"Trajectory: bad action shape {self.actions.shape}")
        if self.states.shape != (*self.actions.shape[:2], 4):
            raise InvalidStateError(
                f"Trajectory: state shape {self.states.shape} does not match "
                f"actions {self.actions.shape}"
            )
        if len(self.agent_ids) != self.actions.shape[1]:
            raise InvalidStateError("Trajectory: agent_ids/action column mismatch")

    @property
    def horizon(self) -> int:
        return self.actions.shape[0]

    def joint_states(self) -> List[JointState]:
        out = []
        for t in range(self.horizon):
            states = {
                a: VehicleState(*self.states[t, n])
                for n, a in enumerate(self.agent_ids)
            }
            out.append(JointState(states=states, t=self.init.t + 1 + t, dt=self.dt))
        return out


@dataclass
class Scenario:
    """A map, agent footprints/roles, and a per-frame joint state trace."""

    dt: float
    dims: Dict[int, AgentDims]
    road: RoadMap
    frames: List[JointState]

    @property
    def agent_ids(self) -> Tuple[int, ...]:
        return tuple(sorted(self.dims))

    def roles(self) -> Dict[int, str]:
        return {a: d.role for a, d in self.dims.items()}

    def ids_with_role(self, role: str) -> Tuple[int, ...]:
        return tuple(a for a in self.agent_ids if self.dims[a].role == role)

    def state_array(self, agent_ids: Iterable[int] | None = None) -> np.ndarray:
        ids = tuple(agent_ids) if agent_ids is not None else self.agent_ids
        return np.array([f.as_array(ids) for f in self.frames], dtype=np.float64)
