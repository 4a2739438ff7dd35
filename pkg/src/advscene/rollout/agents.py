"""Driver agents: the hermetic scripted policy and the LLM-backed adapter.

Both implement ``plan(state, feedback) -> Plan``. The scripted agent is a
deterministic finite-state policy per attack pattern with a small correction
table for assessor feedback; it makes the whole closed loop testable without
network access.
"""

from __future__ import annotations

import importlib.resources as resources
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Protocol, Tuple

from advscene.errors import AgentFormatError, FormatError
from advscene.llm.client import ChatTranscript, ChatConfig
from advscene.llm.parsing import parse_plan_response
from advscene.rollout.instructions import (
    BRAKE,
    CUT_IN,
    CUSTOM,
    MULTI_VEHICLE,
    OVERTAKE_CUT_BACK,
    Instruction,
)
from advscene.rollout.plan import (
    BACKGROUND_COLLISION,
    BOUNDARY_VIOLATION,
    CONTROL_OUT_OF_RANGE,
    GOAL_REGRESSION,
    PLAN_STEP_LEN,
    PREMATURE_COLLISION,
    Plan,
    Verdict,
)
from advscene.scene.dynamics import integrate_point_mass
from advscene.scene.types import AgentDims, FrameAccel, JointState, PointMassState, RoadMap


@dataclass
class GlobalState:
    """What an agent sees at one planning step."""

    text: str
    scene: JointState
    road: RoadMap
    dims: Mapping[int, AgentDims]
    instruction: Instruction
    memory: object
    step_index: int
    direction: int
    dt: float


class DriverAgent(Protocol):
    def plan(self, state: GlobalState, feedback: Optional[Verdict]) -> Plan: ...


def _clip(v: float, lim: float) -> float:
    return max(-lim, min(lim, v))


@dataclass
class ScriptedAgent:
    """Deterministic finite-state attack policy (one instance per rollout).

    The ego vehicle holds its speed; each adversarial vehicle follows the
    pattern's phase logic on a simulated point-mass preview of the step.
    Assessor feedback adjusts the policy: lateral magnitudes halve on
    boundary violations, closing accelerates on goal regression, and the
    remaining failure codes map to yielding corrections.
    """

    a_lat_max: float = 4.0
    a_lon_max: float = 6.0
    lat_accel: float = 3.0
    brake_accel: float = -4.5
    lead_gap: float = 4.5

    _lat_scale: float = 1.0
    _approach_gain: float = 1.0
    _yield_step: bool = False
    _match_speed_step: bool = False
    _memos: Dict[int, Dict] = field(default_factory=dict)

    def _apply_feedback(self, feedback: Optional[Verdict]) -> None:
        self._yield_step = False
        self._match_speed_step = False
        if feedback is None or feedback.passed:
            return
        for code in feedback.codes():
            if code == BOUNDARY_VIOLATION:
                self._lat_scale *= 0.5
            elif code == BACKGROUND_COLLISION:
                self._yield_step = True
            elif code == PREMATURE_COLLISION:
                self._match_speed_step = True
            elif code == GOAL_REGRESSION:
                self._approach_gain = min(3.0, self._approach_gain * 1.5)
            # CONTROL_OUT_OF_RANGE needs no state: commands are always clipped

    def _lat_toward(self, y: float, vy: float, y_target: float, a: float) -> float:
        """Bang-bang lateral control that arrives at y_target with vy ~ 0."""
        u = y_target - y
        if abs(u) < 0.05 and abs(vy) < 0.05:
            return _clip(-vy / 0.2, a)
        brake_dist = vy * vy / (2.0 * a) if a > 0 else 0.0
        if vy * u > 0 and abs(u) <= brake_dist:
            return -math.copysign(a, vy)
        return math.copysign(a, u)

    def _adv_command(
        self,
        pattern: str,
        adv: PointMassState,
        ego: PointMassState,
        own_lane_y: float,
        ego_lane_y: float,
        phase_memo: Dict,
    ) -> Tuple[str, FrameAccel]:
        lat = self.lat_accel * self._lat_scale
        dx = adv.x - ego.x
        rel_v = adv.vx - ego.vx
        # "settled" in the ego lane: close to center with lateral motion spent
        in_ego_lane = abs(adv.y - ego_lane_y) < 0.35 and abs(adv.vy) < 1.0

        if pattern == BRAKE:
            phase = "brake"
            a_lon = self.brake_accel * self._approach_gain
            a_lat = self._lat_toward(adv.y, adv.vy, ego_lane_y, min(lat, 1.0))
        elif pattern == CUT_IN:
            settled = (in_ego_lane and rel_v < 0.5) or phase_memo.get("braking")
            if settled and dx > 0:
                phase_memo["braking"] = True
                phase = "brake"
                a_lon = self.brake_accel * self._approach_gain
                a_lat = self._lat_toward(adv.y, adv.vy, ego_lane_y, min(lat, 2.5))
            elif dx < self.lead_gap and not phase_memo.get("cutting"):
                phase = "reposition"
                a_lon = 0.8 * (self.lead_gap + 1.0 - dx) - 1.2 * rel_v + 2.0
                a_lat = self._lat_toward(adv.y, adv.vy, own_lane_y, min(lat, 1.0))
            else:
                phase_memo["cutting"] = True
                phase = "lane_change"
                a_lon = _clip(-1.2 * rel_v - 0.5, 3.0)
                a_lat = self._lat_toward(adv.y, adv.vy, ego_lane_y, lat)
        elif pattern == OVERTAKE_CUT_BACK:
            if phase_memo.get("cut_back") or (dx > self.lead_gap and abs(adv.y - ego_lane_y) > 0.35):
                phase_memo["cut_back"] = True
                settled = (in_ego_lane and rel_v < 0.5) or phase_memo.get("braking")
                if settled:
                    phase_memo["braking"] = True
                    phase = "brake"
                    a_lon = self.brake_accel * self._approach_gain
                    a_lat = self._lat_toward(adv.y, adv.vy, ego_lane_y, min(lat, 2.5))
                else:
                    phase = "cut_back"
                    a_lon = _clip(-1.5 * rel_v - 1.0, 4.5)
                    a_lat = self._lat_toward(adv.y, adv.vy, ego_lane_y, lat)
            elif abs(adv.y - own_lane_y) > 0.35 and dx < 0:
                phase = "reposition"
                a_lon = 0.6 * (2.0 - rel_v) + 1.5
                a_lat = self._lat_toward(adv.y, adv.vy, own_lane_y, lat)
            else:
                phase = "overtake"
                # cap the speed advantage so cutting back stays feasible
                a_lon = 2.5 * self._approach_gain if rel_v < 5.0 else _clip(-0.5 * (rel_v - 5.0), 1.0)
                a_lat = self._lat_toward(adv.y, adv.vy, own_lane_y, min(lat, 1.0))
        else:  # MULTI_VEHICLE escorts / CUSTOM fall back to the cut-in logic
            return self._adv_command(CUT_IN, adv, ego, own_lane_y, ego_lane_y, phase_memo)

        if self._yield_step:
            phase, a_lat, a_lon = "hold", 0.0, -1.0
        if self._match_speed_step:
            phase, a_lon = "hold", _clip(-1.0 * rel_v, 2.0)
        # the policy always respects the control limits; the assessor re-checks
        a_lat = _clip(a_lat, self.a_lat_max)
        a_lon = _clip(a_lon, self.a_lon_max)
        return phase, FrameAccel(a_lat=a_lat, a_lon=a_lon)

    def plan(self, state: GlobalState, feedback: Optional[Verdict]) -> Plan:
        self._apply_feedback(feedback)
        instr = state.instruction
        road = state.road
        scene = state.scene

        def pm_of(agent_id: int) -> PointMassState:
            s = scene.states[agent_id]
            return PointMassState(
                x=s.x, y=s.y, vx=s.v * math.cos(s.theta), vy=s.v * math.sin(s.theta)
            )

        pm = {a: pm_of(a) for a in instr.controlled_ids}
        lane_y = {
            lane.lane_id: lane.y_center for lane in road.lanes_for(state.direction)
        }
        ego_lane_y = lane_y[road.lane_of(scene.states[instr.ego_id].y, state.direction)]
        own_lane = {
            adv: lane_y[road.lane_of(scene.states[adv].y, state.direction)]
            for adv in instr.adversarial_ids
        }

        controls: Dict[int, List[FrameAccel]] = {a: [] for a in instr.controlled_ids}
        phases: Dict[int, str] = {instr.ego_id: "hold"}
        memos: Dict[int, Dict] = {
            adv: self._memos.setdefault(adv, {}) for adv in instr.adversarial_ids
        }
        escorts = instr.adversarial_ids[1:] if instr.pattern == MULTI_VEHICLE else ()
        for f in range(PLAN_STEP_LEN):
            ego_cmd = FrameAccel(0.0, 0.0)
            controls[instr.ego_id].append(ego_cmd)
            for adv in instr.adversarial_ids:
                if adv in escorts:
                    a_lon = _clip(1.0 * (pm[instr.ego_id].vx - pm[adv].vx), 2.0)
                    a_lat = self._lat_toward(pm[adv].y, pm[adv].vy, own_lane[adv], 1.0)
                    phase, cmd = "escort", FrameAccel(a_lat=a_lat, a_lon=a_lon)
                else:
                    phase, cmd = self._adv_command(
                        instr.pattern if instr.pattern != MULTI_VEHICLE else CUT_IN,
                        pm[adv],
                        pm[instr.ego_id],
                        own_lane[adv],
                        ego_lane_y,
                        memos[adv],
                    )
                if f == 0:
                    phases[adv] = phase  # the step's intention is its opening phase
                controls[adv].append(cmd)
                pm[adv] = integrate_point_mass(pm[adv], cmd, state.dt)
            pm[instr.ego_id] = integrate_point_mass(pm[instr.ego_id], ego_cmd, state.dt)

        intentions = {instr.ego_id: "phase=hold; maintain lane and speed"}
        for adv in instr.adversarial_ids:
            intentions[adv] = f"phase={phases[adv]}; {instr.pattern} maneuver"
        return Plan(step_index=state.step_index, intentions=intentions, controls=controls)


def load_prompt(name: str = "driver_v1.txt") -> str:
    return (
        resources.files("advscene.rollout").joinpath("prompts").joinpath(name).read_text()
    )


def format_feedback(feedback: Optional[Verdict]) -> str:
    if feedback is None or feedback.passed:
        return "none"
    return "; ".join(f"{f.code} at frame {f.frame}: {f.detail}" for f in feedback.failures)


SYSTEM_PROMPT = (
    "You plan short control sequences for vehicles in a highway simulation. "
    "Follow the user's scenario goal exactly and answer with a single JSON "
    "object, no prose outside the JSON."
)


@dataclass
class LlmDriverAgent:
    """Prompts a chat model per planning step and parses its plan."""

    client: object  # anything with .complete(ChatTranscript) -> str
    template: str = field(default_factory=load_prompt)
    parse_retries: int = 1

    def plan(self, state: GlobalState, feedback: Optional[Verdict]) -> Plan:
        entries = list(state.memory.entries) if state.memory is not None else []
        memory_text = (
            "no prior steps"
            if not entries
            else "\n".join(
                f"step {e.step_index}: "
                + "; ".join(f"{a}: {e.intentions[a]}" for a in sorted(e.intentions))
                for e in entries[-3:]
            )
        )
        prompt = self.template.format(
            instruction=state.instruction.raw_text,
            scenario_state=state.text,
            memory=memory_text,
            feedback=format_feedback(feedback),
            controlled_ids=list(state.instruction.controlled_ids),
            plan_len=PLAN_STEP_LEN,
        )
        transcript = ChatTranscript.start(SYSTEM_PROMPT, prompt)
        text = self.client.complete(transcript)
        last_err: Optional[FormatError] = None
        for attempt in range(self.parse_retries + 1):
            try:
                return parse_plan_response(
                    text,
                    step_index=state.step_index,
                    expected_agents=state.instruction.controlled_ids,
                )
            except FormatError as exc:
                last_err = exc
                if attempt == self.parse_retries:
                    break
                transcript = transcript.extend(
                    text,
                    f"That response could not be parsed ({exc}). "
                    "Reply again with only the JSON object in the required shape.",
                )
                text = self.client.complete(transcript)
        raise AgentFormatError(f"driver agent output unparseable after retry: {last_err}")
