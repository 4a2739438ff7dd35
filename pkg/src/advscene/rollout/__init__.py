from advscene.rollout.plan import (
    FAILURE_CODES,
    PLAN_STEP_LEN,
    Failure,
    Plan,
    Verdict,
)
from advscene.rollout.instructions import (
    BRAKE,
    CUT_IN,
    CUSTOM,
    MULTI_VEHICLE,
    OVERTAKE_CUT_BACK,
    PATTERNS,
    Instruction,
    infer_pattern,
    make_instruction,
)
from advscene.rollout.state_text import build_global_state
from advscene.rollout.assessor import AssessorConfig, SimContext, assess_plan, simulate_step
from advscene.rollout.agents import (
    DriverAgent,
    GlobalState,
    LlmDriverAgent,
    ScriptedAgent,
    load_prompt,
)
from advscene.rollout.loop import (
    MAX_RETRIES_DEFAULT,
    MAX_STEPS_DEFAULT,
    MemoryEntry,
    Outcome,
    PlanMemory,
    RolloutRecord,
    TERMINATED_COLLISION,
    TERMINATED_MAX_STEPS,
    TERMINATED_RETRY_EXHAUSTED,
    record_from_dict,
    record_to_dict,
    run_rollout,
)

__all__ = [
    "AssessorConfig",
    "BRAKE",
    "CUT_IN",
    "CUSTOM",
    "DriverAgent",
    "FAILURE_CODES",
    "Failure",
    "GlobalState",
    "Instruction",
    "LlmDriverAgent",
    "MAX_RETRIES_DEFAULT",
    "MAX_STEPS_DEFAULT",
    "MULTI_VEHICLE",
    "MemoryEntry",
    "OVERTAKE_CUT_BACK",
    "Outcome",
    "PATTERNS",
    "PLAN_STEP_LEN",
    "Plan",
    "PlanMemory",
    "RolloutRecord",
    "ScriptedAgent",
    "SimContext",
    "TERMINATED_COLLISION",
    "TERMINATED_MAX_STEPS",
    "TERMINATED_RETRY_EXHAUSTED",
    "Verdict",
    "assess_plan",
    "build_global_state",
    "infer_pattern",
    "load_prompt",
    "make_instruction",
    "record_from_dict",
    "record_to_dict",
    "run_rollout",
    "simulate_step",
]
