"""Composite guidance objective: anchor alignment, non-target collision
suppression, and lateral boundary adherence, with its exact action gradient.

The heavy lifting (rollout, pairwise soft gaps, adjoint sweep) happens in the
selected kernel backend; this module owns configuration, the guided-pair
rule, and the structured-type interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from advscene import kernels
from advscene.anchors.types import AnchorSet
from advscene.errors import ConfigError

ROLE_EGO_CODE = 0
ROLE_ADV_CODE = 1


@dataclass(frozen=True)
class GuidanceConfig:
    """Weights and shape parameters of the guidance objective."""

    lam_anchor: float = 1.0
    lam_avoid: float = 1.0
    lam_boundary: float = 1.0
    strength: float = 1.0  # overall step-size multiplier on the correction
    d_safe: float = 1.0
    sigma: float = 1.0
    delta_boundary: float = 0.3
    gap_temperature: float = 0.1

    def __post_init__(self) -> None:
        if min(self.lam_anchor, self.lam_avoid, self.lam_boundary) < 0.0:
            raise ConfigError("GuidanceConfig: weights must be non-negative")
        if self.sigma <= 0.0 or self.d_safe <= 0.0 or self.gap_temperature <= 0.0:
            raise ConfigError("GuidanceConfig: sigma, d_safe, gap_temperature must be > 0")

    @property
    def inactive(self) -> bool:
        return self.lam_anchor == 0.0 and self.lam_avoid == 0.0 and self.lam_boundary == 0.0


def build_pair_set(roles: Sequence[int]) -> np.ndarray:
    """All agent pairs except (ego, adversarial): those collisions are the goal."""
    n = len(roles)
    pairs: List[Tuple[int, int]] = []
    for i in range(n):
        for j in range(i + 1, n):
            duo = {int(roles[i]), int(roles[j])}
            if duo == {ROLE_EGO_CODE, ROLE_ADV_CODE}:
                continue
            pairs.append((i, j))
    return np.array(pairs, dtype=np.int64).reshape(len(pairs), 2)


def guidance_loss(
    actions: np.ndarray,
    init: np.ndarray,
    dt: float,
    anchors: AnchorSet,
    cfg: GuidanceConfig,
    dims: np.ndarray,
    bounds: np.ndarray,
    roles: Optional[Sequence[int]] = None,
    pairs: Optional[np.ndarray] = None,
    agent_ids: Optional[Sequence[int]] = None,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Objective value, its gradient w.r.t. ``actions``, and the raw terms.

    actions: (T, N, 2) physical units; init: (N, 4); dims/bounds: (N, 2).
    ``pairs`` overrides the role-based guided-pair rule when given.
    Returns (J, dJ/dactions, [j_anchor, j_avoid, j_boundary]); the component
    array is unweighted.
    """
    actions = np.ascontiguousarray(actions, dtype=np.float64)
    init = np.ascontiguousarray(init, dtype=np.float64)
    n = actions.shape[1]
    if pairs is None:
        pairs = build_pair_set(roles if roles is not None else [2] * n)
    ids = agent_ids if agent_ids is not None else range(n)
    anchor_agent, anchor_t, anchor_xy = anchors.as_arrays(ids)
    j, grad, comps = kernels.guidance_eval(
        actions,
        init,
        dt,
        np.ascontiguousarray(dims, dtype=np.float64),
        anchor_agent,
        anchor_t,
        np.ascontiguousarray(anchor_xy),
        np.ascontiguousarray(pairs, dtype=np.int64),
        np.ascontiguousarray(bounds, dtype=np.float64),
        cfg.lam_anchor,
        cfg.lam_avoid,
        cfg.lam_boundary,
        cfg.d_safe,
        cfg.sigma,
        cfg.delta_boundary,
        cfg.gap_temperature,
    )
    return float(j), grad, comps
