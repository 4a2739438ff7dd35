"""Deterministic textual serialization of the scene for the driver agent.

Identical inputs must produce byte-identical text: fixed section order,
sorted ids, values rounded to 2 decimals.
"""

from __future__ import annotations

from typing import Dict, Mapping

from advscene.rollout.instructions import Instruction
from advscene.scene.types import AgentDims, JointState, RoadMap

MEMORY_TAIL = 3
NO_MEMORY_MARKER = "no prior steps"


def build_global_state(
    scene: JointState,
    road: RoadMap,
    dims: Mapping[int, AgentDims],
    instr: Instruction,
    memory,
    direction: int,
) -> str:
    lines = []
    lines.append("USER INSTRUCTION:")
    lines.append(f"  {instr.raw_text}")
    lines.append(
        f"PATTERN: {instr.pattern} (ego={instr.ego_id}, "
        f"adversarial={list(instr.adversarial_ids)}, target={instr.target_id})"
    )
    lines.append("ROAD:")
    lo, hi = road.bounds_for(direction)
    lines.append(f"  drivable lateral interval: [{lo:.2f}, {hi:.2f}] m")
    group = road.lanes_for(direction)
    for lane in group:
        lines.append(
            f"  lane {lane.lane_id}: center y={lane.y_center:.2f} width={lane.width:.2f}"
        )
    if len(group) > 1:
        adjacency = " <-> ".join(str(l.lane_id) for l in group)
        lines.append(f"  adjacency: {adjacency}")
    lines.append(f"FRAME: {scene.t} (dt={scene.dt:.3f} s)")
    lines.append("VEHICLES:")
    for agent_id in sorted(scene.states):
        s = scene.states[agent_id]
        d = dims[agent_id]
        lane_id = road.lane_of(s.y, direction)
        lines.append(
            f"  id={agent_id} role={d.role} x={s.x:.2f} y={s.y:.2f} "
            f"heading={s.theta:.2f} speed={s.v:.2f} size={d.length:.2f}x{d.width:.2f} "
            f"lane={lane_id}"
        )
    lines.append("MEMORY:")
    entries = list(memory.entries) if memory is not None else []
    if not entries:
        lines.append(f"  {NO_MEMORY_MARKER}")
    else:
        for entry in entries[-MEMORY_TAIL:]:
            intents = "; ".join(
                f"{a}: {entry.intentions[a]}" for a in sorted(entry.intentions)
            )
            lines.append(f"  step {entry.step_index}: {intents}")
    return "\n".join(lines) + "\n"
