"""Synthetic highway windows: constant-velocity cruising plus mild lane changes.

Used for hermetic training/evaluation runs and as the toy distribution for
the acceptance suite. Tracks are generated as positions and converted through
the same displacement-based state builder as real recordings.
"""

from __future__ import annotations

import math
from typing import Dict, List, Tuple

import numpy as np

from advscene.ingest.highd import LOWER_DIRECTION
from advscene.ingest.windows import T_FUTURE, T_HIST, ScenarioWindow, window_from_positions
from advscene.scene.types import (
    ROLE_BACKGROUND,
    ROLE_EGO,
    AgentDims,
    RoadMap,
    single_direction_road,
)

LANE_CENTERS = (2.0, 6.0)
LANE_WIDTH = 4.0


def synthetic_road(lane_centers: Tuple[float, ...] = LANE_CENTERS) -> RoadMap:
    return single_direction_road(lane_centers, LANE_WIDTH, direction=LOWER_DIRECTION)


def lane_change_profile(n_frames: int, start: int, duration: int, dy: float) -> np.ndarray:
    """Raised-cosine lateral offset: smooth, zero-slope endpoints."""
    ramp = np.arange(n_frames, dtype=np.float64)
    tau = np.clip((ramp - start) / max(1, duration), 0.0, 1.0)
    return dy * 0.5 * (1.0 - np.cos(math.pi * tau))


def synthetic_window(
    rng: np.random.Generator,
    road: RoadMap | None = None,
    visible_change_fraction: float = 0.20,
    future_change_fraction: float = 0.15,
    max_agents: int = 3,
    dt: float = 0.04,
) -> ScenarioWindow:
    """One window; per agent, a lane change may start inside the history
    (onset observable by the model) or somewhere in the future horizon."""
    road = road or synthetic_road()
    lanes = [l.y_center for l in road.lanes]
    n_agents = int(rng.integers(1, max_agents + 1))
    n_frames = T_HIST + T_FUTURE + 1
    t = np.arange(n_frames, dtype=np.float64) * dt

    positions: Dict[int, np.ndarray] = {}
    dims: Dict[int, AgentDims] = {}
    x_slots = rng.permutation(np.arange(n_agents)) * 60.0
    for i in range(n_agents):
        agent_id = i
        v = float(rng.uniform(20.0, 32.0))
        lane = int(rng.integers(len(lanes)))
        x = float(x_slots[i]) + float(rng.uniform(-10.0, 10.0)) + v * t
        y = np.full(n_frames, lanes[lane])
        u = rng.uniform()
        if u < visible_change_fraction + future_change_fraction and len(lanes) > 1:
            target = lane + rng.choice([-1, 1]) if 0 < lane < len(lanes) - 1 else (
                lane + 1 if lane == 0 else lane - 1
            )
            target = int(np.clip(target, 0, len(lanes) - 1))
            if u < visible_change_fraction:
                start = int(rng.integers(6, T_HIST - 6))
            else:
                start = int(rng.integers(T_HIST, T_HIST + T_FUTURE - 80))
            duration = int(rng.integers(60, 80))
            y = y + lane_change_profile(n_frames, start, duration, lanes[target] - lanes[lane])
        positions[agent_id] = np.stack([x, y], axis=1)
        dims[agent_id] = AgentDims(
            agent_id=agent_id,
            length=float(rng.uniform(4.0, 5.0)),
            width=float(rng.uniform(1.8, 2.1)),
            role=ROLE_EGO if i == 0 else ROLE_BACKGROUND,
        )
    return window_from_positions(positions, road, dims, dt, LOWER_DIRECTION)


def synthetic_windows(
    n: int,
    seed: int = 0,
    visible_change_fraction: float = 0.20,
    future_change_fraction: float = 0.15,
    max_agents: int = 3,
) -> List[ScenarioWindow]:
    rng = np.random.default_rng(seed)
    road = synthetic_road()
    return [
        synthetic_window(
            rng, road, visible_change_fraction, future_change_fraction, max_agents
        )
        for _ in range(n)
    ]


def adversarial_window(pattern: str, seed: int = 0, with_background: bool = True):
    """A window whose initial geometry supports the given attack pattern.

    Returns (window, instruction). Everything cruises at constant velocity in
    the window itself; the closed loop takes over from the last history frame.
    """
    from advscene.rollout.instructions import (
        BRAKE,
        CUT_IN,
        MULTI_VEHICLE,
        OVERTAKE_CUT_BACK,
        make_instruction,
    )

    rng = np.random.default_rng(seed)
    road = synthetic_road()
    lane0, lane1 = (l.y_center for l in road.lanes[:2])
    jitter = float(rng.uniform(-2.0, 2.0))
    dt = 0.04

    # (x at t0, lane y, speed) per agent; agent 0 is always the ego
    if pattern == BRAKE:
        text = "The adversarial vehicle brakes hard so the ego rear-ends it."
        layout = [(0.0, lane0, 30.0), (12.5 + jitter * 0.2, lane0, 27.0)]
        adv_ids = (1,)
    elif pattern == CUT_IN:
        text = "The adversarial vehicle cuts in front of the ego causing a rear-end collision."
        layout = [(0.0, lane0, 28.0), (2.0 + jitter, lane1, 28.5)]
        adv_ids = (1,)
    elif pattern == OVERTAKE_CUT_BACK:
        text = "The adversarial vehicle overtakes the ego and cuts back too early."
        layout = [(0.0, lane0, 26.0), (-6.0 + jitter * 0.5, lane1, 31.0)]
        adv_ids = (1,)
    elif pattern == MULTI_VEHICLE:
        text = (
            "Two adversarial vehicles coordinate: the first cuts in front of the "
            "ego while the second boxes it in from the adjacent lane."
        )
        layout = [(0.0, lane0, 28.0), (2.0 + jitter, lane1, 28.5), (-16.0, lane1, 28.0)]
        adv_ids = (1, 2)
    else:
        raise ValueError(f"adversarial_window: no fixture for pattern {pattern!r}")

    if with_background:
        layout.append((95.0 + jitter, lane1, 27.0))
    n_frames = T_HIST + T_FUTURE + 1
    t = np.arange(n_frames, dtype=np.float64) * dt
    positions: Dict[int, np.ndarray] = {}
    dims: Dict[int, AgentDims] = {}
    for i, (x0, y0, v) in enumerate(layout):
        x = x0 + v * (t - (T_HIST - 1) * dt)
        positions[i] = np.stack([x, np.full(n_frames, y0)], axis=1)
        dims[i] = AgentDims(agent_id=i, length=4.5, width=2.0, role=ROLE_BACKGROUND)
    window = window_from_positions(positions, road, dims, dt, LOWER_DIRECTION)
    instruction = make_instruction(text, ego_id=0, adversarial_ids=adv_ids, pattern=pattern)
    return window, instruction
