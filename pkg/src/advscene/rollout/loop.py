"""The closed loop: build state text, plan, assess, execute or revise.

Only plans that passed review ever reach the executed trace. The loop ends on
ego-adversarial contact, on the step budget, or after ``max_retries``
consecutive rejections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from advscene.rollout.agents import DriverAgent, GlobalState
from advscene.rollout.assessor import AssessorConfig, SimContext, assess_plan, simulate_step
from advscene.rollout.instructions import Instruction, make_instruction
from advscene.rollout.plan import Plan, Verdict
from advscene.rollout.state_text import build_global_state
from advscene.scene.geometry import obb_overlap
from advscene.scene.serialize import road_from_dict, road_to_dict
from advscene.scene.types import (
    ROLE_ADVERSARIAL,
    ROLE_BACKGROUND,
    ROLE_EGO,
    AgentDims,
    JointState,
    PointMassState,
    VehicleState,
)
from advscene.ingest.windows import ScenarioWindow, T_FUTURE, T_HIST, window_from_positions

MAX_STEPS_DEFAULT = 13
MAX_RETRIES_DEFAULT = 3

TERMINATED_COLLISION = "collision"
TERMINATED_MAX_STEPS = "max_steps"
TERMINATED_RETRY_EXHAUSTED = "retry_exhausted"


@dataclass
class MemoryEntry:
    step_index: int
    intentions: Dict[int, str]
    controls: Dict[int, List]
    executed_states: List[JointState]


@dataclass
class PlanMemory:
    """Append-only record of executed planning steps."""

    entries: List[MemoryEntry] = field(default_factory=list)

    def append(self, entry: MemoryEntry) -> None:
        if self.entries and entry.step_index != self.entries[-1].step_index + 1:
            raise ValueError("PlanMemory: non-consecutive step index")
        if not self.entries and entry.step_index != 0:
            raise ValueError("PlanMemory: first step index must be 0")
        self.entries.append(entry)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class Outcome:
    collided: bool = False
    collision_frame: Optional[int] = None
    collision_pair: Optional[Tuple[int, int]] = None
    terminated_reason: str = TERMINATED_MAX_STEPS


@dataclass
class RolloutRecord:
    """Everything stage 2 needs about one stage-1 episode."""

    instruction: Instruction
    window: ScenarioWindow
    memory: PlanMemory
    trace: List[JointState]  # executed future frames, world frame, t = 0..
    outcome: Outcome

    @property
    def dims(self) -> Dict[int, AgentDims]:
        return self.window.dims

    @property
    def dt(self) -> float:
        return self.window.dt


def _roles_from_instruction(
    dims: Dict[int, AgentDims], instr: Instruction
) -> Dict[int, AgentDims]:
    out = {}
    for a, d in dims.items():
        if a == instr.ego_id:
            role = ROLE_EGO
        elif a in instr.adversarial_ids:
            role = ROLE_ADVERSARIAL
        else:
            role = ROLE_BACKGROUND
        out[a] = replace(d, role=role)
    return out


def _background_replay(
    window: ScenarioWindow, bg_ids: Tuple[int, ...], n_frames: int
) -> np.ndarray:
    """(n_frames, n_bg, 4) replay; beyond the window the last velocity holds."""
    out = np.zeros((n_frames, len(bg_ids), 4), dtype=np.float64)
    for col, agent in enumerate(bg_ids):
        for f in range(min(n_frames, T_FUTURE)):
            out[f, col] = window.future[f].states[agent].as_array()
    if n_frames > T_FUTURE:
        last = out[T_FUTURE - 1].copy()
        dt = window.dt
        for f in range(T_FUTURE, n_frames):
            steps = f - (T_FUTURE - 1)
            out[f, :, 0] = last[:, 0] + last[:, 3] * np.cos(last[:, 2]) * dt * steps
            out[f, :, 1] = last[:, 1] + last[:, 3] * np.sin(last[:, 2]) * dt * steps
            out[f, :, 2] = last[:, 2]
            out[f, :, 3] = last[:, 3]
    return out


def _find_collision(
    frames: List[JointState], dims: Dict[int, AgentDims], instr: Instruction
) -> Optional[Tuple[int, Tuple[int, int]]]:
    for f, frame in enumerate(frames):
        ego = frame.states[instr.ego_id]
        for adv in instr.adversarial_ids:
            if obb_overlap(ego, dims[instr.ego_id], frame.states[adv], dims[adv]):
                return f, (instr.ego_id, adv)
    return None


def run_rollout(
    window: ScenarioWindow,
    instr: Instruction,
    agent: DriverAgent,
    assessor_cfg: Optional[AssessorConfig] = None,
    max_steps: int = MAX_STEPS_DEFAULT,
    max_retries: int = MAX_RETRIES_DEFAULT,
) -> RolloutRecord:
    """Run the plan/assess/execute loop from a scenario window."""
    instr.validate_ids(window.agent_ids)
    assessor_cfg = assessor_cfg or AssessorConfig()
    dims = _roles_from_instruction(window.dims, instr)
    window = ScenarioWindow(
        history=window.history,
        future=window.future,
        road=window.road,
        dims=dims,
        direction=window.direction,
        dt=window.dt,
        start_frame=window.start_frame,
    )

    bg_ids = tuple(a for a in window.agent_ids if a not in instr.controlled_ids)
    init = window.init
    controlled = {}
    headings = {}
    for a in instr.controlled_ids:
        s = init.states[a]
        controlled[a] = PointMassState(
            x=s.x, y=s.y, vx=s.v * math.cos(s.theta), vy=s.v * math.sin(s.theta)
        )
        headings[a] = s.theta
    ctx = SimContext(
        frame=0,
        controlled=controlled,
        headings=headings,
        bg_ids=bg_ids,
        bg_states=_background_replay(window, bg_ids, max_steps * 10 + 10),
        dims=dims,
        road=window.road,
        direction=window.direction,
        dt=window.dt,
    )

    memory = PlanMemory()
    trace: List[JointState] = []
    outcome = Outcome()
    step = 0
    retries = 0
    feedback: Optional[Verdict] = None
    while step < max_steps:
        text = build_global_state(
            ctx.joint_state(), window.road, dims, instr, memory, window.direction
        )
        gs = GlobalState(
            text=text,
            scene=ctx.joint_state(),
            road=window.road,
            dims=dims,
            instruction=instr,
            memory=memory,
            step_index=step,
            direction=window.direction,
            dt=window.dt,
        )
        plan = agent.plan(gs, feedback)
        verdict = assess_plan(plan, ctx, instr, assessor_cfg)
        if not verdict.passed:
            retries += 1
            feedback = verdict
            if retries > max_retries:
                outcome.terminated_reason = TERMINATED_RETRY_EXHAUSTED
                break
            continue

        frames, new_pm, new_headings = simulate_step(plan, ctx)
        collision = _find_collision(frames, dims, instr)
        if collision is not None:
            cut, pair = collision
            frames = frames[: cut + 1]
            outcome.collided = True
            outcome.collision_frame = ctx.frame + cut
            outcome.collision_pair = pair
            outcome.terminated_reason = TERMINATED_COLLISION
        memory.append(
            MemoryEntry(
                step_index=step,
                intentions=dict(plan.intentions),
                controls={a: list(seq) for a, seq in plan.controls.items()},
                executed_states=frames,
            )
        )
        trace.extend(frames)
        ctx.frame += len(frames)
        ctx.controlled = new_pm
        ctx.headings = new_headings
        retries = 0
        feedback = None
        step += 1
        if outcome.collided:
            break

    return RolloutRecord(
        instruction=instr, window=window, memory=memory, trace=trace, outcome=outcome
    )


# ---------- JSON serialization (schema documented in docs/file_formats.md) ----------


def _frame_to_list(frame: JointState) -> list:
    return [
        {
            "id": a,
            "x": frame.states[a].x,
            "y": frame.states[a].y,
            "theta": frame.states[a].theta,
            "v": frame.states[a].v,
        }
        for a in sorted(frame.states)
    ]


def _frames_from_lists(rows: list, dt: float, t0: int = 0) -> List[JointState]:
    out = []
    for t, row in enumerate(rows):
        out.append(
            JointState(
                states={
                    int(e["id"]): VehicleState(
                        x=float(e["x"]),
                        y=float(e["y"]),
                        theta=float(e["theta"]),
                        v=float(e["v"]),
                    )
                    for e in row
                },
                t=t0 + t,
                dt=dt,
            )
        )
    return out


def record_to_dict(rec: RolloutRecord) -> dict:
    w = rec.window
    return {
        "instruction": {
            "raw_text": rec.instruction.raw_text,
            "pattern": rec.instruction.pattern,
            "ego_id": rec.instruction.ego_id,
            "adversarial_ids": list(rec.instruction.adversarial_ids),
            "target_id": rec.instruction.target_id,
        },
        "window": {
            "dt": w.dt,
            "direction": w.direction,
            "start_frame": w.start_frame,
            "agents": [
                {
                    "id": a,
                    "role": w.dims[a].role,
                    "length": w.dims[a].length,
                    "width": w.dims[a].width,
                }
                for a in w.agent_ids
            ],
            "map": road_to_dict(w.road),
            "history": [_frame_to_list(f) for f in w.history],
            "future": [_frame_to_list(f) for f in w.future],
        },
        "memory": [
            {
                "step_index": e.step_index,
                "intentions": {str(a): t for a, t in sorted(e.intentions.items())},
                "controls": {
                    str(a): [[c.a_lat, c.a_lon] for c in seq]
                    for a, seq in sorted(e.controls.items())
                },
                "executed_states": [_frame_to_list(f) for f in e.executed_states],
            }
            for e in rec.memory.entries
        ],
        "trace": [_frame_to_list(f) for f in rec.trace],
        "outcome": {
            "collided": rec.outcome.collided,
            "collision_frame": rec.outcome.collision_frame,
            "collision_pair": list(rec.outcome.collision_pair)
            if rec.outcome.collision_pair
            else None,
            "terminated_reason": rec.outcome.terminated_reason,
        },
    }


def record_from_dict(d: dict) -> RolloutRecord:
    from advscene.scene.types import FrameAccel

    wd = d["window"]
    dt = float(wd["dt"])
    dims = {
        int(a["id"]): AgentDims(
            agent_id=int(a["id"]),
            length=float(a["length"]),
            width=float(a["width"]),
            role=a["role"],
        )
        for a in wd["agents"]
    }
    window = ScenarioWindow(
        history=_frames_from_lists(wd["history"], dt, int(wd["start_frame"])),
        future=_frames_from_lists(
            wd["future"], dt, int(wd["start_frame"]) + T_HIST
        ),
        road=road_from_dict(wd["map"]),
        dims=dims,
        direction=int(wd["direction"]),
        dt=dt,
        start_frame=int(wd["start_frame"]),
    )
    instr = make_instruction(
        d["instruction"]["raw_text"],
        d["instruction"]["ego_id"],
        d["instruction"]["adversarial_ids"],
        d["instruction"]["target_id"],
        d["instruction"]["pattern"],
    )
    memory = PlanMemory()
    for e in d["memory"]:
        memory.append(
            MemoryEntry(
                step_index=int(e["step_index"]),
                intentions={int(a): t for a, t in e["intentions"].items()},
                controls={
                    int(a): [FrameAccel(a_lat=float(p[0]), a_lon=float(p[1])) for p in seq]
                    for a, seq in e["controls"].items()
                },
                executed_states=_frames_from_lists(e["executed_states"], dt),
            )
        )
    o = d["outcome"]
    outcome = Outcome(
        collided=bool(o["collided"]),
        collision_frame=o["collision_frame"],
        collision_pair=tuple(o["collision_pair"]) if o["collision_pair"] else None,
        terminated_reason=o["terminated_reason"],
    )
    return RolloutRecord(
        instruction=instr, window=window, memory=memory, trace=_frames_from_lists(d["trace"], dt), outcome=outcome
    )
