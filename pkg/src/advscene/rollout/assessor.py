"""Rule-based plan review: simulate the step, check limits and geometry.

The assessor integrates the planned point-mass commands for its 10 frames
with background vehicles replaying their recorded trajectories, then rejects
plans that breach control limits, leave the drivable interval, hit background
traffic, collide with the target too early, or lose ground on the instructed
interaction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from advscene.rollout.instructions import Instruction
from advscene.rollout.plan import (
    BACKGROUND_COLLISION,
    BOUNDARY_VIOLATION,
    CONTROL_OUT_OF_RANGE,
    GOAL_REGRESSION,
    PLAN_STEP_LEN,
    PREMATURE_COLLISION,
    Failure,
    Plan,
    Verdict,
)
from advscene.scene.dynamics import integrate_point_mass, unicycle_from_point_mass
from advscene.scene.geometry import bbox_gap, boundary_violation, obb_overlap
from advscene.scene.types import (
    AgentDims,
    JointState,
    PointMassState,
    RoadMap,
    VehicleState,
)


@dataclass
class AssessorConfig:
    a_lat_max: float = 4.0
    a_lon_max: float = 6.0
    min_collision_step: int = 3
    goal_eps: float = 1e-6
    # phases whose declared intent is to close on the target; repositioning
    # and lane-change phases legitimately let the gap grow
    approach_phases: Tuple[str, ...] = ("approach", "press", "brake", "close")

    def demands_approach(self, phase: str) -> bool:
        return phase in self.approach_phases


@dataclass
class SimContext:
    """Mutable world state of one rollout between planning steps."""

    frame: int  # next future frame index to simulate (0-based)
    controlled: Dict[int, PointMassState]
    headings: Dict[int, float]
    bg_ids: Tuple[int, ...]
    bg_states: np.ndarray  # (F, n_bg, 4) replay with constant-velocity tail
    dims: Dict[int, AgentDims]
    road: RoadMap
    direction: int
    dt: float

    def bg_state(self, agent_id: int, frame: int) -> VehicleState:
        col = self.bg_ids.index(agent_id)
        f = min(frame, self.bg_states.shape[0] - 1)
        return VehicleState(*self.bg_states[f, col])

    def vehicle_state(self, agent_id: int, frame: int) -> VehicleState:
        if agent_id in self.controlled:
            return unicycle_from_point_mass(
                self.controlled[agent_id], self.headings[agent_id]
            )
        return self.bg_state(agent_id, frame)

    def joint_state(self) -> JointState:
        states = {}
        for a in self.dims:
            states[a] = self.vehicle_state(a, self.frame)
        return JointState(states=states, t=self.frame, dt=self.dt)


def simulate_step(plan: Plan, ctx: SimContext):
    """Integrate one plan step without mutating the context.

    Returns (frames, end_controlled, end_headings): per-frame joint states
    for the 10 simulated frames plus the final point-mass states/headings of
    the controlled agents.
    """
    pm = dict(ctx.controlled)
    headings = dict(ctx.headings)
    frames: List[JointState] = []
    for f in range(PLAN_STEP_LEN):
        frame_idx = ctx.frame + f
        for agent_id in plan.agent_ids:
            pm[agent_id] = integrate_point_mass(pm[agent_id], plan.controls[agent_id][f], ctx.dt)
            headings[agent_id] = unicycle_from_point_mass(
                pm[agent_id], headings[agent_id]
            ).theta
        states = {}
        for a in ctx.dims:
            if a in pm:
                states[a] = unicycle_from_point_mass(pm[a], headings[a])
            else:
                states[a] = ctx.bg_state(a, frame_idx)
        frames.append(JointState(states=states, t=frame_idx, dt=ctx.dt))
    return frames, pm, headings


def _pair_gap(frame: JointState, dims: Dict[int, AgentDims], a: int, b: int) -> float:
    return bbox_gap(frame.states[a], dims[a], frame.states[b], dims[b])


def assess_plan(
    plan: Plan, ctx: SimContext, instr: Instruction, cfg: AssessorConfig
) -> Verdict:
    """Review one plan; failures are data for the revision loop, not errors."""
    failures: List[Failure] = []
    seen = set()

    def add(code: str, detail: str, frame: int) -> None:
        if code not in seen:
            seen.add(code)
            failures.append(Failure(code=code, detail=detail, frame=frame))

    for agent_id in plan.agent_ids:
        for f, cmd in enumerate(plan.controls[agent_id]):
            if abs(cmd.a_lat) > cfg.a_lat_max or abs(cmd.a_lon) > cfg.a_lon_max:
                add(
                    CONTROL_OUT_OF_RANGE,
                    f"agent {agent_id}: |a_lat|={abs(cmd.a_lat):.2f} (max {cfg.a_lat_max}), "
                    f"|a_lon|={abs(cmd.a_lon):.2f} (max {cfg.a_lon_max})",
                    f,
                )
                break

    frames, _, _ = simulate_step(plan, ctx)
    bounds = ctx.road.bounds_for(ctx.direction)
    start = ctx.joint_state()

    for f, frame in enumerate(frames):
        for agent_id in plan.agent_ids:
            s = frame.states[agent_id]
            if boundary_violation(s.y, bounds, 0.0) > 0.0:
                add(
                    BOUNDARY_VIOLATION,
                    f"agent {agent_id}: y={s.y:.2f} outside [{bounds[0]:.2f}, {bounds[1]:.2f}]",
                    f,
                )
            for bg in ctx.bg_ids:
                if obb_overlap(s, ctx.dims[agent_id], frame.states[bg], ctx.dims[bg]):
                    add(BACKGROUND_COLLISION, f"agent {agent_id} hit background {bg}", f)
        if plan.step_index < cfg.min_collision_step:
            for adv in instr.adversarial_ids:
                if obb_overlap(
                    frame.states[instr.ego_id],
                    ctx.dims[instr.ego_id],
                    frame.states[adv],
                    ctx.dims[adv],
                ):
                    add(
                        PREMATURE_COLLISION,
                        f"ego-adversarial contact at step {plan.step_index} "
                        f"(before step {cfg.min_collision_step})",
                        f,
                    )

    for adv in instr.adversarial_ids:
        if plan.phase_of(adv) in cfg.approach_phases:
            gap_start = _pair_gap(start, ctx.dims, instr.ego_id, adv)
            gap_end = _pair_gap(frames[-1], ctx.dims, instr.ego_id, adv)
            if gap_end > gap_start + cfg.goal_eps:
                add(
                    GOAL_REGRESSION,
                    f"ego-adversarial gap grew {gap_start:.2f} -> {gap_end:.2f} m "
                    f"while agent {adv} is in an approach phase",
                    PLAN_STEP_LEN - 1,
                )

    return Verdict.ok() if not failures else Verdict.fail(failures)
