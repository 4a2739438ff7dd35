"""Scenario window cutting and model-sample normalization.

A window is 32 history frames plus 128 future frames at the native 25 Hz.
Headings and speeds inside a window are derived from per-frame displacements,
which makes the state sequence exactly consistent with the forward-Euler
dynamics: recovered actions re-integrate to the recorded positions to float
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from advscene.errors import InvalidStateError
from advscene.ingest.highd import LOWER_DIRECTION, Recording
from advscene.scene.dynamics import V_EPS, recover_actions
from advscene.scene.types import (
    ROLE_BACKGROUND,
    ROLE_EGO,
    AgentDims,
    JointState,
    RoadMap,
    VehicleState,
)

T_HIST = 32
T_FUTURE = 128
N_MAX = 8
FOCAL_RADIUS = 100.0


@dataclass
class ScenarioWindow:
    """A fixed 32+128 frame cut with a stable focal agent set."""

    history: List[JointState]
    future: List[JointState]
    road: RoadMap
    dims: Dict[int, AgentDims]
    direction: int
    dt: float
    start_frame: int = 0

    def __post_init__(self) -> None:
        if len(self.history) != T_HIST or len(self.future) != T_FUTURE:
            raise InvalidStateError(
                f"ScenarioWindow: got {len(self.history)}+{len(self.future)} frames, "
                f"want {T_HIST}+{T_FUTURE}"
            )
        ids = set(self.dims)
        for f in [*self.history, *self.future]:
            if set(f.states) != ids:
                raise InvalidStateError("ScenarioWindow: agent set changes mid-window")

    @property
    def agent_ids(self) -> Tuple[int, ...]:
        return tuple(sorted(self.dims))

    @property
    def init(self) -> JointState:
        return self.history[-1]

    def ego_id(self) -> int:
        for a in self.agent_ids:
            if self.dims[a].role == ROLE_EGO:
                return a
        return self.agent_ids[0]

    def bounds_for(self, agent_id: int) -> Tuple[float, float]:
        return self.road.bounds_for(self.direction)


def states_from_positions(
    positions: np.ndarray, dt: float, fallback_heading: float = 0.0
) -> np.ndarray:
    """Build dynamics-consistent (x, y, theta, v) rows from a position track.

    positions: (F, 2). Heading and speed at frame f come from the displacement
    to f+1; the last frame holds the previous heading/speed. Zero-displacement
    frames hold the previous heading too.
    """
    F = positions.shape[0]
    out = np.empty((F, 4), dtype=np.float64)
    out[:, 0] = positions[:, 0]
    out[:, 1] = positions[:, 1]
    prev_theta = fallback_heading
    for f in range(F):
        if f + 1 < F:
            dx = positions[f + 1, 0] - positions[f, 0]
            dy = positions[f + 1, 1] - positions[f, 1]
            v = math.hypot(dx, dy) / dt
            theta = math.atan2(dy, dx) if v > V_EPS else prev_theta
        else:
            v = out[f - 1, 3] if F > 1 else 0.0
            theta = prev_theta
        out[f, 2] = theta
        out[f, 3] = v
        prev_theta = theta
    return out


def window_from_positions(
    positions: Mapping[int, np.ndarray],
    road: RoadMap,
    dims: Mapping[int, AgentDims],
    dt: float,
    direction: int,
    start_frame: int = 0,
) -> ScenarioWindow:
    """Assemble a window from raw position tracks of 160 (or 161) frames.

    A 161st row, when present, defines the heading/speed of the final frame.
    """
    ids = sorted(positions)
    n_frames = {positions[a].shape[0] for a in ids}
    if n_frames - {T_HIST + T_FUTURE, T_HIST + T_FUTURE + 1}:
        raise InvalidStateError(f"window_from_positions: bad track lengths {n_frames}")
    fallback = 0.0 if direction == LOWER_DIRECTION else math.pi
    per_agent = {
        a: states_from_positions(np.asarray(positions[a], dtype=np.float64), dt, fallback)
        for a in ids
    }
    frames = []
    for f in range(T_HIST + T_FUTURE):
        frames.append(
            JointState(
                states={a: VehicleState(*per_agent[a][f]) for a in ids},
                t=start_frame + f,
                dt=dt,
            )
        )
    return ScenarioWindow(
        history=frames[:T_HIST],
        future=frames[T_HIST:],
        road=road,
        dims=dict(dims),
        direction=direction,
        dt=dt,
        start_frame=start_frame,
    )


def extract_windows(
    rec: Recording,
    stride: int,
    seed: int = 0,
    n_max: int = N_MAX,
    radius: float = FOCAL_RADIUS,
) -> List[ScenarioWindow]:
    """Cut fixed 160-frame windows with a fully-present focal agent set.

    The focal set is built around a randomly chosen center vehicle (seeded):
    all same-direction vehicles within ``radius`` meters longitudinally at the
    last history frame, nearest first, capped at ``n_max``. Agents not present
    for the whole window are dropped before selection.
    """
    if stride < 1:
        raise InvalidStateError(f"extract_windows: stride {stride} < 1")
    rng = np.random.default_rng(seed)
    span = T_HIST + T_FUTURE
    lo, hi = rec.frame_range
    windows: List[ScenarioWindow] = []
    start = lo
    while start + span - 1 <= hi:
        present = [
            t
            for t in rec.tracks.values()
            if t.first_frame <= start and t.last_frame >= start + span - 1
        ]
        if present:
            center = present[int(rng.integers(len(present)))]
            t0 = start + T_HIST - 1
            cx = float(center.x[t0 - center.first_frame])
            group = [
                t
                for t in present
                if t.driving_direction == center.driving_direction
                and abs(float(t.x[t0 - t.first_frame]) - cx) <= radius
            ]
            group.sort(key=lambda t: (abs(float(t.x[t0 - t.first_frame]) - cx), t.track_id))
            group = group[:n_max]
            positions = {}
            dims = {}
            for t in group:
                i0 = start - t.first_frame
                extra = 1 if t.last_frame >= start + span else 0
                positions[t.track_id] = np.stack(
                    [t.x[i0 : i0 + span + extra], t.y[i0 : i0 + span + extra]], axis=1
                )
                dims[t.track_id] = AgentDims(
                    agent_id=t.track_id,
                    length=t.length,
                    width=t.width,
                    role=ROLE_EGO if t.track_id == center.track_id else ROLE_BACKGROUND,
                )
            windows.append(
                window_from_positions(
                    positions,
                    rec.road,
                    dims,
                    rec.dt,
                    center.driving_direction,
                    start_frame=start,
                )
            )
        start += stride
    return windows


@dataclass
class ModelSample:
    """A normalized window: ego-centered, driving +x, with recovered actions.

    Arrays are float64; agent order follows ``agent_ids``. ``future_states``
    and ``actions`` are time-major like Trajectory.
    """

    agent_ids: np.ndarray  # (N,) int64
    roles: np.ndarray  # (N,) uint8: 0 ego, 1 adversarial, 2 background
    dims: np.ndarray  # (N, 2) [length, width]
    bounds: np.ndarray  # (N, 2) lateral drivable interval, window frame
    history: np.ndarray  # (N, T_HIST, 4)
    init: np.ndarray  # (N, 4) state at the last history frame
    future_states: np.ndarray  # (T_FUTURE, N, 4)
    actions: np.ndarray  # (T_FUTURE, N, 2)
    dt: float
    origin: Tuple[float, float]
    flipped: bool
    direction: int

    @property
    def n_agents(self) -> int:
        return int(self.agent_ids.shape[0])


ROLE_CODES = {ROLE_EGO: 0, "adversarial": 1, ROLE_BACKGROUND: 2}
ROLE_NAMES = {v: k for k, v in ROLE_CODES.items()}


def _wrap(a: np.ndarray) -> np.ndarray:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def normalize_window(w: ScenarioWindow) -> ModelSample:
    """Translate to the ego t0 position and orient travel along +x.

    Windows whose group drives toward -x are point-reflected about the new
    origin (x, y -> -x, -y; heading rotates by pi), which keeps the geometry
    physically consistent while flipping the travel direction.
    """
    ids = list(w.agent_ids)
    ego = w.ego_id()
    t0 = w.init
    ox, oy = t0.states[ego].x, t0.states[ego].y

    all_frames = [*w.history, *w.future]
    arr = np.stack([f.as_array(ids) for f in all_frames])  # (160, N, 4)
    ego_col = ids.index(ego)
    flipped = math.cos(arr[T_HIST - 1, ego_col, 2]) < 0.0

    arr[:, :, 0] -= ox
    arr[:, :, 1] -= oy
    lo, hi = w.road.bounds_for(w.direction)
    blo, bhi = lo - oy, hi - oy
    if flipped:
        arr[:, :, 0] *= -1.0
        arr[:, :, 1] *= -1.0
        arr[:, :, 2] = _wrap(arr[:, :, 2] + math.pi)
        blo, bhi = -bhi, -blo

    history = np.transpose(arr[:T_HIST], (1, 0, 2)).copy()
    init = arr[T_HIST - 1].copy()
    future = arr[T_HIST:].copy()
    actions = recover_actions(init, future, w.dt)

    return ModelSample(
        agent_ids=np.array(ids, dtype=np.int64),
        roles=np.array([ROLE_CODES[w.dims[a].role] for a in ids], dtype=np.uint8),
        dims=np.array([[w.dims[a].length, w.dims[a].width] for a in ids]),
        bounds=np.tile([blo, bhi], (len(ids), 1)),
        history=history,
        init=init,
        future_states=future,
        actions=actions,
        dt=w.dt,
        origin=(ox, oy),
        flipped=flipped,
        direction=w.direction,
    )


def reflect_window(w: ScenarioWindow) -> ScenarioWindow:
    """Point-reflect a window about the origin (involution; used for testing)."""
    def flip_state(s: VehicleState) -> VehicleState:
        return VehicleState(
            x=-s.x, y=-s.y, theta=float(_wrap(np.array(s.theta + math.pi))), v=s.v
        )

    def flip_frame(f: JointState) -> JointState:
        return JointState(
            states={a: flip_state(s) for a, s in f.states.items()}, t=f.t, dt=f.dt
        )

    bounds = {
        d: (-hi, -lo) for d, (lo, hi) in w.road.bounds.items()
    }
    lanes = tuple(
        type(l)(lane_id=l.lane_id, y_center=-l.y_center, width=l.width, direction=l.direction)
        for l in w.road.lanes
    )
    road = RoadMap(
        lanes=lanes,
        bounds=bounds,
        x_range=(-w.road.x_range[1], -w.road.x_range[0]),
    )
    return ScenarioWindow(
        history=[flip_frame(f) for f in w.history],
        future=[flip_frame(f) for f in w.future],
        road=road,
        dims=dict(w.dims),
        direction=w.direction,
        dt=w.dt,
        start_frame=w.start_frame,
    )
