"""Strict structured-output parsing for driver plans and anchor sets.

Values pass through untouched: no clamping, no rounding. Out-of-range
controls are the assessor's to reject, which keeps the review loop
meaningful.
"""

from __future__ import annotations

import json
import math
import re
from typing import Iterable, Optional, Sequence

from advscene.anchors.types import Anchor, AnchorSet
from advscene.errors import FormatError, RangeError

_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def extract_json_block(text: str) -> str:
    """The fenced JSON block if present, else the first balanced object."""
    m = _FENCE.search(text)
    if m:
        return m.group(1).strip()
    start = text.find("{")
    if start < 0:
        raise FormatError("no JSON object found in response")
    depth = 0
    in_str = False
    escape = False
    for i, ch in enumerate(text[start:], start):
        if in_str:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    raise FormatError("unbalanced JSON object in response")


def _load(text: str) -> dict:
    block = extract_json_block(text)
    try:
        data = json.loads(block)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError("top-level JSON value must be an object")
    return data


def _require_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{path}: expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise FormatError(f"{path}: non-finite value {out!r}")
    return out


def parse_plan_response(
    text: str, step_index: int = 0, expected_agents: Optional[Sequence[int]] = None
):
    """Parse a driver-agent response into a Plan.

    Expected shape::

        {"intentions": {"<agent_id>": "..."},
         "controls": {"<agent_id>": [[a_lat, a_lon] x 10]}}
    """
    from advscene.rollout.plan import PLAN_STEP_LEN, Plan
    from advscene.scene.types import FrameAccel

    data = _load(text)
    for key in ("intentions", "controls"):
        if key not in data or not isinstance(data[key], dict):
            raise FormatError(f"{key}: missing or not an object")
    controls = {}
    for raw_id, seq in data["controls"].items():
        try:
            agent = int(raw_id)
        except ValueError as exc:
            raise FormatError(f"controls: non-integer agent id {raw_id!r}") from exc
        if not isinstance(seq, list) or len(seq) != PLAN_STEP_LEN:
            got = len(seq) if isinstance(seq, list) else type(seq).__name__
            raise FormatError(f"controls.{raw_id}[{got}]: want exactly {PLAN_STEP_LEN} command pairs")
        cmds = []
        for f, pair in enumerate(seq):
            if not isinstance(pair, list) or len(pair) != 2:
                raise FormatError(f"controls.{raw_id}[{f}]: want [a_lat, a_lon]")
            cmds.append(
                FrameAccel(
                    a_lat=_require_number(pair[0], f"controls.{raw_id}[{f}][0]"),
                    a_lon=_require_number(pair[1], f"controls.{raw_id}[{f}][1]"),
                )
            )
        controls[agent] = cmds
    intentions = {}
    for raw_id, intent in data["intentions"].items():
        try:
            agent = int(raw_id)
        except ValueError as exc:
            raise FormatError(f"intentions: non-integer agent id {raw_id!r}") from exc
        intentions[agent] = str(intent)
    if set(intentions) != set(controls):
        raise FormatError("intentions and controls name different agent sets")
    if expected_agents is not None and set(controls) != set(expected_agents):
        raise FormatError(
            f"controls: agent set {sorted(controls)} != expected {sorted(expected_agents)}"
        )
    return Plan(step_index=step_index, intentions=intentions, controls=controls)


def parse_anchor_response(
    text: str, horizon: int, adversarial_ids: Iterable[int] = ()
) -> AnchorSet:
    """Parse an anchor-extraction response.

    Expected shape: ``{"anchors": [{"agent_id", "x", "y", "t", "explanation"?}]}``.
    Times must be integers in [0, horizon), strictly increasing per agent;
    adversarial anchors must carry a non-empty explanation.
    """
    adversarial = set(int(a) for a in adversarial_ids)
    data = _load(text)
    if "anchors" not in data or not isinstance(data["anchors"], list):
        raise FormatError("anchors: missing or not a list")
    seen = {}
    out = []
    for idx, entry in enumerate(data["anchors"]):
        path = f"anchors[{idx}]"
        if not isinstance(entry, dict):
            raise FormatError(f"{path}: expected an object")
        try:
            agent = int(entry["agent_id"])
        except (KeyError, ValueError, TypeError) as exc:
            raise FormatError(f"{path}.agent_id: missing or non-integer") from exc
        if "t" not in entry:
            raise FormatError(f"{path}.t: missing")
        t_raw = entry["t"]
        if isinstance(t_raw, bool) or not isinstance(t_raw, int):
            raise FormatError(f"{path}.t: expected an integer frame index")
        if not 0 <= t_raw < horizon:
            raise RangeError(f"{path}.t: {t_raw} outside [0, {horizon})")
        if t_raw in seen.setdefault(agent, set()):
            raise FormatError(f"{path}.t: duplicate frame {t_raw} for agent {agent}")
        seen[agent].add(t_raw)
        x = _require_number(entry.get("x"), f"{path}.x")
        y = _require_number(entry.get("y"), f"{path}.y")
        explanation = entry.get("explanation")
        if agent in adversarial and not (isinstance(explanation, str) and explanation.strip()):
            raise FormatError(f"{path}: adversarial anchor requires an explanation")
        out.append(
            Anchor(
                agent_id=agent,
                x=x,
                y=y,
                t=t_raw,
                explanation=str(explanation) if explanation is not None else None,
            )
        )
    return AnchorSet(out)
