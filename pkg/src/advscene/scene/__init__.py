from advscene.scene.dynamics import (
    V_EPS,
    integrate_point_mass,
    integrate_unicycle,
    recover_actions,
    rollout_actions,
    unicycle_from_point_mass,
)
from advscene.scene.geometry import bbox_gap, boundary_violation, box_corners, obb_overlap
from advscene.scene.types import (
    AgentDims,
    FrameAccel,
    JointState,
    Lane,
    PointMassState,
    RoadMap,
    Scenario,
    Trajectory,
    VehicleAction,
    VehicleState,
    single_direction_road,
)

__all__ = [
    "AgentDims",
    "FrameAccel",
    "JointState",
    "Lane",
    "PointMassState",
    "RoadMap",
    "Scenario",
    "Trajectory",
    "VehicleAction",
    "VehicleState",
    "V_EPS",
    "bbox_gap",
    "boundary_violation",
    "box_corners",
    "integrate_point_mass",
    "integrate_unicycle",
    "obb_overlap",
    "recover_actions",
    "rollout_actions",
    "single_direction_road",
    "unicycle_from_point_mass",
]
