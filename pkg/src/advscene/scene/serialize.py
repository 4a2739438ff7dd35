"""Scenario JSON schema shared by every stage.

Layout::

    {
      "dt": 0.04,
      "agents": [{"id": 1, "role": "ego", "length": 4.5, "width": 2.0}, ...],
      "map": {
        "lane_centerlines": [[[x0, y], [x1, y]], ...],
        "lateral_bounds": {"1": [y_lower, y_upper], ...},
        "lanes": [{"lane_id": 1, "y_center": 2.0, "width": 4.0, "direction": 1}, ...],
        "x_range": [x0, x1]
      },
      "frames": [[{"id": 1, "x": ..., "y": ..., "theta": ..., "v": ...}, ...], ...]
    }

All lengths in meters, angles in radians.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict

from advscene.errors import SchemaError
from advscene.scene.types import (
    AgentDims,
    JointState,
    Lane,
    RoadMap,
    Scenario,
    VehicleState,
)


def road_to_dict(road: RoadMap) -> Dict[str, Any]:
    return {
        "lane_centerlines": [[list(p) for p in line] for line in road.lane_centerlines],
        "lateral_bounds": {str(d): list(b) for d, b in sorted(road.bounds.items())},
        "lanes": [
            {
                "lane_id": l.lane_id,
                "y_center": l.y_center,
                "width": l.width,
                "direction": l.direction,
            }
            for l in road.lanes
        ],
        "x_range": list(road.x_range),
    }


def road_from_dict(d: Dict[str, Any]) -> RoadMap:
    try:
        lanes = tuple(
            Lane(
                lane_id=int(l["lane_id"]),
                y_center=float(l["y_center"]),
                width=float(l["width"]),
                direction=int(l["direction"]),
            )
            for l in d["lanes"]
        )
        bounds = {int(k): (float(v[0]), float(v[1])) for k, v in d["lateral_bounds"].items()}
        x_range = tuple(float(v) for v in d.get("x_range", (0.0, 420.0)))
    except KeyError as exc:
        raise SchemaError(f"map: missing key {exc.args[0]!r}") from exc
    return RoadMap(lanes=lanes, bounds=bounds, x_range=x_range)


def scenario_to_dict(sc: Scenario) -> Dict[str, Any]:
    return {
        "dt": sc.dt,
        "agents": [
            {
                "id": a,
                "role": sc.dims[a].role,
                "length": sc.dims[a].length,
                "width": sc.dims[a].width,
            }
            for a in sc.agent_ids
        ],
        "map": road_to_dict(sc.road),
        "frames": [
            [
                {
                    "id": a,
                    "x": f.states[a].x,
                    "y": f.states[a].y,
                    "theta": f.states[a].theta,
                    "v": f.states[a].v,
                }
                for a in sorted(f.states)
            ]
            for f in sc.frames
        ],
    }


def scenario_from_dict(d: Dict[str, Any]) -> Scenario:
    for key in ("dt", "agents", "map", "frames"):
        if key not in d:
            raise SchemaError(f"scenario: missing key {key!r}")
    dt = float(d["dt"])
    dims = {
        int(a["id"]): AgentDims(
            agent_id=int(a["id"]),
            length=float(a["length"]),
            width=float(a["width"]),
            role=a["role"],
        )
        for a in d["agents"]
    }
    frames = []
    for t, frame in enumerate(d["frames"]):
        states = {
            int(e["id"]): VehicleState(
                x=float(e["x"]), y=float(e["y"]), theta=float(e["theta"]), v=float(e["v"])
            )
            for e in frame
        }
        frames.append(JointState(states=states, t=t, dt=dt))
    return Scenario(dt=dt, dims=dims, road=road_from_dict(d["map"]), frames=frames)


def dump_json(obj: Dict[str, Any], path: str | Path) -> None:
    """Deterministic JSON: sorted keys, stable float repr, trailing newline."""
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def load_json(path: str | Path) -> Dict[str, Any]:
    return json.loads(Path(path).read_text())


def save_scenario(sc: Scenario, path: str | Path) -> None:
    dump_json(scenario_to_dict(sc), path)


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(load_json(path))
