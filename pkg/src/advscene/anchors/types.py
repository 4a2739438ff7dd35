"""Sparse spatiotemporal anchors preserving stage-1 interaction structure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from advscene.errors import InvalidStateError


@dataclass(frozen=True)
class Anchor:
    agent_id: int
    x: float
    y: float
    t: int  # frame index within the regeneration horizon, [0, T)
    explanation: Optional[str] = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise InvalidStateError(f"Anchor: non-finite position ({self.x}, {self.y})")


@dataclass
class AnchorSet:
    """Anchors grouped per agent, sorted by frame.

    Invariants (established by ``validate_anchors``): strictly increasing t
    per agent, and every adversarial anchor time also carries an ego anchor.
    """

    anchors: List[Anchor] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.anchors)

    def __iter__(self):
        return iter(self.anchors)

    def per_agent(self) -> Dict[int, List[Anchor]]:
        out: Dict[int, List[Anchor]] = {}
        for a in sorted(self.anchors, key=lambda a: (a.agent_id, a.t)):
            out.setdefault(a.agent_id, []).append(a)
        return out

    def times_of(self, agent_id: int) -> List[int]:
        return [a.t for a in self.per_agent().get(agent_id, [])]

    def as_arrays(
        self, agent_order: Iterable[int]
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(agent_index, t, xy) arrays following ``agent_order``; skips unknown ids."""
        index = {a: i for i, a in enumerate(agent_order)}
        rows = [a for a in self.anchors if a.agent_id in index]
        agent_idx = np.array([index[a.agent_id] for a in rows], dtype=np.int64)
        t = np.array([a.t for a in rows], dtype=np.int64)
        xy = np.array([[a.x, a.y] for a in rows], dtype=np.float64).reshape(len(rows), 2)
        return agent_idx, t, xy

    def translated(self, dx: float, dy: float) -> "AnchorSet":
        return AnchorSet(
            [
                Anchor(a.agent_id, a.x + dx, a.y + dy, a.t, a.explanation)
                for a in self.anchors
            ]
        )

    def point_reflected(self) -> "AnchorSet":
        return AnchorSet(
            [Anchor(a.agent_id, -a.x, -a.y, a.t, a.explanation) for a in self.anchors]
        )

    def to_dict(self) -> dict:
        return {
            "anchors": [
                {
                    "agent_id": a.agent_id,
                    "x": a.x,
                    "y": a.y,
                    "t": a.t,
                    "explanation": a.explanation,
                }
                for a in sorted(self.anchors, key=lambda a: (a.agent_id, a.t))
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnchorSet":
        return cls(
            [
                Anchor(
                    agent_id=int(e["agent_id"]),
                    x=float(e["x"]),
                    y=float(e["y"]),
                    t=int(e["t"]),
                    explanation=e.get("explanation"),
                )
                for e in d["anchors"]
            ]
        )
