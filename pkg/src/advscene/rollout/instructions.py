"""Natural-language instruction plus its parsed structure."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

from advscene.errors import InvalidStateError

CUT_IN = "cut_in"
BRAKE = "brake"
OVERTAKE_CUT_BACK = "overtake_cut_back"
MULTI_VEHICLE = "multi_vehicle"
CUSTOM = "custom"
PATTERNS = (CUT_IN, BRAKE, OVERTAKE_CUT_BACK, MULTI_VEHICLE, CUSTOM)

_KEYWORDS = (
    (OVERTAKE_CUT_BACK, ("overtake", "cut back", "cuts back", "return to", "returns to")),
    (CUT_IN, ("cut in", "cuts in", "cut-in", "merge in front", "changes lanes in front")),
    (BRAKE, ("brake", "brakes", "slow down suddenly", "decelerate")),
)


def infer_pattern(text: str, n_adversaries: int = 1) -> str:
    low = text.lower()
    if n_adversaries > 1:
        return MULTI_VEHICLE
    for pattern, keys in _KEYWORDS:
        if any(k in low for k in keys):
            return pattern
    return CUSTOM


@dataclass(frozen=True)
class Instruction:
    raw_text: str
    pattern: str
    ego_id: int
    adversarial_ids: Tuple[int, ...]
    target_id: int

    def __post_init__(self) -> None:
        if self.pattern not in PATTERNS:
            raise InvalidStateError(f"Instruction: unknown pattern {self.pattern!r}")
        if self.ego_id in self.adversarial_ids:
            raise InvalidStateError("Instruction: ego cannot be adversarial")
        if not self.adversarial_ids:
            raise InvalidStateError("Instruction: needs at least one adversarial vehicle")

    def validate_ids(self, scenario_ids: Iterable[int]) -> None:
        known = set(scenario_ids)
        for a in (self.ego_id, *self.adversarial_ids, self.target_id):
            if a not in known:
                raise InvalidStateError(f"Instruction: vehicle {a} not in scenario")

    @property
    def controlled_ids(self) -> Tuple[int, ...]:
        return (self.ego_id, *self.adversarial_ids)


def make_instruction(
    text: str,
    ego_id: int,
    adversarial_ids: Iterable[int],
    target_id: Optional[int] = None,
    pattern: Optional[str] = None,
) -> Instruction:
    adv = tuple(int(a) for a in adversarial_ids)
    return Instruction(
        raw_text=text,
        pattern=pattern or infer_pattern(text, len(adv)),
        ego_id=int(ego_id),
        adversarial_ids=adv,
        target_id=int(target_id) if target_id is not None else int(ego_id),
    )
