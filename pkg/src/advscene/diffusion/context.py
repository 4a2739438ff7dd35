"""Action tensors and per-agent conditioning features for the denoiser.

The denoiser sees each agent as one row: its own normalized history, its
pose/speed relative to the scene origin, up to 7 neighbor states at the
current frame (nearest-first by longitudinal offset), its lateral bound
offsets, and a role one-hot. Everything is derived deterministically from a
normalized window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from advscene.errors import ShapeError
from advscene.ingest.windows import N_MAX, T_FUTURE, T_HIST, ModelSample

POS_X_SCALE = 50.0
POS_Y_SCALE = 10.0
V_SCALE = 30.0

NEIGHBOR_SLOTS = N_MAX - 1
NEIGHBOR_FEATS = 5  # dx, dy, dtheta, dv, present
CONTEXT_DIM = T_HIST * 4 + 4 + NEIGHBOR_SLOTS * NEIGHBOR_FEATS + 2 + 3


@dataclass
class ActionTensor:
    """Padded joint action tensor with an agent validity mask.

    values: (T, N_MAX, 2); masked slots are zero. ``mean``/``std`` are the
    per-channel normalization stats; values may be in normalized or physical
    units depending on the pipeline stage (the sampler tracks which).
    """

    values: np.ndarray
    mask: np.ndarray  # (N_MAX,) bool
    mean: np.ndarray  # (2,)
    std: np.ndarray  # (2,)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.values.ndim != 3 or self.values.shape[2] != 2:
            raise ShapeError(f"ActionTensor: bad shape {self.values.shape}")
        if self.mask.shape != (self.values.shape[1],):
            raise ShapeError(
                f"ActionTensor: mask {self.mask.shape} vs {self.values.shape[1]} agents"
            )
        if not np.all(np.isfinite(self.values)):
            raise ShapeError("ActionTensor: non-finite values")
        self.values[:, ~self.mask, :] = 0.0

    def masked(self, values: np.ndarray) -> "ActionTensor":
        return ActionTensor(values=values, mask=self.mask, mean=self.mean, std=self.std)

    def normalize(self) -> "ActionTensor":
        out = (self.values - self.mean) / self.std
        out[:, ~self.mask, :] = 0.0
        return self.masked(out)

    def denormalize(self) -> "ActionTensor":
        out = self.values * self.std + self.mean
        out[:, ~self.mask, :] = 0.0
        return self.masked(out)


@dataclass
class ConditioningContext:
    """Everything the sampler needs about one scene besides the noise."""

    features: np.ndarray  # (N_MAX, CONTEXT_DIM)
    mask: np.ndarray  # (N_MAX,) bool
    init: np.ndarray  # (N_MAX, 4) window-frame states at t0
    dims: np.ndarray  # (N_MAX, 2)
    bounds: np.ndarray  # (N_MAX, 2)
    roles: np.ndarray  # (N_MAX,) uint8
    agent_ids: np.ndarray  # (N_MAX,) int64, -1 for padding
    dt: float

    @property
    def n_active(self) -> int:
        return int(self.mask.sum())

    def active_ids(self) -> Tuple[int, ...]:
        return tuple(int(a) for a in self.agent_ids[self.mask])


def encode_context(sample: ModelSample, n_max: int = N_MAX) -> ConditioningContext:
    n = sample.n_agents
    if n > n_max:
        raise ShapeError(f"encode_context: {n} agents exceed N_MAX={n_max}")
    feats = np.zeros((n_max, CONTEXT_DIM), dtype=np.float64)
    mask = np.zeros(n_max, dtype=bool)
    mask[:n] = True

    init = np.zeros((n_max, 4), dtype=np.float64)
    init[:n] = sample.init
    dims = np.zeros((n_max, 2), dtype=np.float64)
    dims[:n] = sample.dims
    bounds = np.tile([-1.0, 1.0], (n_max, 1))
    bounds[:n] = sample.bounds
    roles = np.full(n_max, 2, dtype=np.uint8)
    roles[:n] = sample.roles
    agent_ids = np.full(n_max, -1, dtype=np.int64)
    agent_ids[:n] = sample.agent_ids

    for i in range(n):
        own = sample.history[i].copy()  # (T_HIST, 4)
        own[:, 0] = (own[:, 0] - sample.init[i, 0]) / POS_X_SCALE
        own[:, 1] = (own[:, 1] - sample.init[i, 1]) / POS_Y_SCALE
        own[:, 3] = own[:, 3] / V_SCALE
        off = 0
        feats[i, off : off + T_HIST * 4] = own.reshape(-1)
        off += T_HIST * 4
        feats[i, off : off + 4] = [
            sample.init[i, 0] / POS_X_SCALE,
            sample.init[i, 1] / POS_Y_SCALE,
            sample.init[i, 2],
            sample.init[i, 3] / V_SCALE,
        ]
        off += 4
        others = sorted(
            (j for j in range(n) if j != i),
            key=lambda j: (abs(sample.init[j, 0] - sample.init[i, 0]), j),
        )[:NEIGHBOR_SLOTS]
        for slot, j in enumerate(others):
            base = off + slot * NEIGHBOR_FEATS
            feats[i, base + 0] = (sample.init[j, 0] - sample.init[i, 0]) / POS_X_SCALE
            feats[i, base + 1] = (sample.init[j, 1] - sample.init[i, 1]) / POS_Y_SCALE
            feats[i, base + 2] = sample.init[j, 2] - sample.init[i, 2]
            feats[i, base + 3] = (sample.init[j, 3] - sample.init[i, 3]) / V_SCALE
            feats[i, base + 4] = 1.0
        off += NEIGHBOR_SLOTS * NEIGHBOR_FEATS
        feats[i, off + 0] = (sample.bounds[i, 0] - sample.init[i, 1]) / POS_Y_SCALE
        feats[i, off + 1] = (sample.bounds[i, 1] - sample.init[i, 1]) / POS_Y_SCALE
        off += 2
        feats[i, off + int(sample.roles[i])] = 1.0

    return ConditioningContext(
        features=feats,
        mask=mask,
        init=init,
        dims=dims,
        bounds=bounds,
        roles=roles,
        agent_ids=agent_ids,
        dt=sample.dt,
    )


def pad_actions(actions: np.ndarray, n_max: int = N_MAX) -> Tuple[np.ndarray, np.ndarray]:
    """Pad (T, N, 2) actions to (T, N_MAX, 2) plus the validity mask."""
    T, n = actions.shape[0], actions.shape[1]
    out = np.zeros((T, n_max, 2), dtype=np.float64)
    out[:, :n, :] = actions
    mask = np.zeros(n_max, dtype=bool)
    mask[:n] = True
    return out, mask
