"""Plan and verdict types for the closed-loop rollout."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

from advscene.errors import InvalidStateError
from advscene.scene.types import FrameAccel

PLAN_STEP_LEN = 10

BOUNDARY_VIOLATION = "boundary_violation"
BACKGROUND_COLLISION = "background_collision"
CONTROL_OUT_OF_RANGE = "control_out_of_range"
GOAL_REGRESSION = "goal_regression"
PREMATURE_COLLISION = "premature_collision"
FAILURE_CODES = (
    BOUNDARY_VIOLATION,
    BACKGROUND_COLLISION,
    CONTROL_OUT_OF_RANGE,
    GOAL_REGRESSION,
    PREMATURE_COLLISION,
)


@dataclass
class Plan:
    """One planning step: per-agent intention text plus 10 frame commands."""

    step_index: int
    intentions: Dict[int, str]
    controls: Dict[int, List[FrameAccel]]

    def __post_init__(self) -> None:
        if set(self.intentions) != set(self.controls):
            raise InvalidStateError("Plan: intention/control agent sets differ")
        for agent, seq in self.controls.items():
            if len(seq) != PLAN_STEP_LEN:
                raise InvalidStateError(
                    f"Plan: agent {agent} has {len(seq)} commands, want {PLAN_STEP_LEN}"
                )

    @property
    def agent_ids(self) -> List[int]:
        return sorted(self.controls)

    def phase_of(self, agent_id: int) -> str:
        """Leading ``phase=<name>`` token of the intention text, if present."""
        text = self.intentions.get(agent_id, "")
        for token in text.replace(";", " ").split():
            if token.startswith("phase="):
                return token[len("phase="):]
        return ""


@dataclass(frozen=True)
class Failure:
    code: str
    detail: str
    frame: int


@dataclass
class Verdict:
    passed: bool
    failures: List[Failure] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.passed != (not self.failures):
            raise InvalidStateError("Verdict: passed flag inconsistent with failures")

    @classmethod
    def ok(cls) -> "Verdict":
        return cls(passed=True)

    @classmethod
    def fail(cls, failures: List[Failure]) -> "Verdict":
        return cls(passed=False, failures=failures)

    def codes(self) -> List[str]:
        return [f.code for f in self.failures]
