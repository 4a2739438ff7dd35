"""Vehicle dynamics: forward-Euler integration and its exact inverse.

Positions advance with the pre-update heading and speed; heading and speed
update afterwards. Speed clamps at zero (no reversing on highways). The same
order is used by the point-mass model so stage-1 and stage-2 agree.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from advscene import kernels
from advscene.errors import InvalidStateError
from advscene.scene.types import (
    FrameAccel,
    JointState,
    PointMassState,
    Trajectory,
    VehicleAction,
    VehicleState,
)

# below this speed a displacement no longer defines a heading
V_EPS = 0.01


def integrate_unicycle(state: VehicleState, action: VehicleAction, dt: float) -> VehicleState:
    """One explicit Euler step of the unicycle model."""
    if dt <= 0:
        raise InvalidStateError(f"integrate_unicycle: dt {dt} <= 0")
    x = state.x + state.v * math.cos(state.theta) * dt
    y = state.y + state.v * math.sin(state.theta) * dt
    theta = state.theta + action.yaw_rate * dt
    v = max(0.0, state.v + action.accel * dt)
    return VehicleState(x=x, y=y, theta=theta, v=v)


def integrate_point_mass(state: PointMassState, cmd: FrameAccel, dt: float) -> PointMassState:
    """One explicit Euler step of the planar double integrator."""
    if dt <= 0:
        raise InvalidStateError(f"integrate_point_mass: dt {dt} <= 0")
    x = state.x + state.vx * dt
    y = state.y + state.vy * dt
    vx = state.vx + cmd.a_lon * dt
    vy = state.vy + cmd.a_lat * dt
    return PointMassState(x=x, y=y, vx=vx, vy=vy)


def unicycle_from_point_mass(pm: PointMassState, prev_heading: float = 0.0) -> VehicleState:
    """Convert a point-mass state to a unicycle state.

    Below ``V_EPS`` the velocity vector no longer defines a heading; the
    previous heading (or the lane direction at the first frame) is held.
    """
    v = math.hypot(pm.vx, pm.vy)
    theta = math.atan2(pm.vy, pm.vx) if v > V_EPS else prev_heading
    return VehicleState(x=pm.x, y=pm.y, theta=theta, v=v)


def rollout_actions(init: JointState, actions: np.ndarray, dt: float) -> Trajectory:
    """Integrate a joint action sequence into a Trajectory.

    ``actions`` is (T, N, 2) with columns [accel, yaw_rate]; agent order
    follows ``init.agent_ids``.
    """
    actions = np.asarray(actions, dtype=np.float64)
    if actions.ndim != 3 or actions.shape[2] != 2:
        raise InvalidStateError(f"rollout_actions: bad action shape {actions.shape}")
    agent_ids = init.agent_ids
    if actions.shape[1] != len(agent_ids):
        raise InvalidStateError(
            f"rollout_actions: {actions.shape[1]} action columns for "
            f"{len(agent_ids)} agents"
        )
    if not np.all(np.isfinite(actions)):
        raise InvalidStateError("rollout_actions: non-finite action")
    init_arr = init.as_array(agent_ids)
    states = kernels.rollout_unicycle(np.ascontiguousarray(init_arr), np.ascontiguousarray(actions), dt)
    return Trajectory(agent_ids=agent_ids, actions=actions, states=states, init=init, dt=dt)


def recover_actions(init: np.ndarray, states: np.ndarray, dt: float) -> np.ndarray:
    """Invert the Euler dynamics: actions whose rollout reproduces ``states``.

    init: (N, 4); states: (T, N, 4). Exact, including frames where the
    original speed clamped at zero (the recovered accel is then the
    exact-stop action). Heading differences are wrapped to (-pi, pi].
    """
    states = np.asarray(states, dtype=np.float64)
    full = np.concatenate([init[None, :, :], states], axis=0)
    dv = np.diff(full[:, :, 3], axis=0) / dt
    dth = np.diff(full[:, :, 2], axis=0)
    dth = (dth + math.pi) % (2.0 * math.pi) - math.pi
    return np.stack([dv, dth / dt], axis=2)


def replay_states(
    agent_ids: Sequence[int], states: np.ndarray, start_t: int, dt: float
) -> list[JointState]:
    """Wrap a raw (T, N, 4) state block into per-frame JointStates."""
    out = []
    for t in range(states.shape[0]):
        out.append(
            JointState(
                states={
                    a: VehicleState(*states[t, n]) for n, a in enumerate(agent_ids)
                },
                t=start_t + t,
                dt=dt,
            )
        )
    return out
