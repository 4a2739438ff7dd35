"""Noise-prediction network: a per-agent residual MLP with manual backprop.

One row per agent: flattened noisy actions, a sinusoidal embedding of the
diffusion step, and the agent's conditioning features. Weights are shared
across agents; interaction enters through the neighbor features in the
context. The output head is zero-initialized so an untrained net predicts
zero noise.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from advscene.errors import SchemaError, ShapeError
from advscene.diffusion.context import CONTEXT_DIM, ActionTensor, ConditioningContext
from advscene.ingest.windows import T_FUTURE

CHECKPOINT_TAG = "advscene-denoiser-v1"


@dataclass(frozen=True)
class ArchSpec:
    horizon: int = T_FUTURE
    action_dim: int = 2
    step_embed_dim: int = 64
    context_dim: int = CONTEXT_DIM
    width: int = 256
    blocks: int = 4

    @property
    def input_dim(self) -> int:
        return self.horizon * self.action_dim + self.step_embed_dim + self.context_dim

    @property
    def output_dim(self) -> int:
        return self.horizon * self.action_dim


def param_order(arch: ArchSpec) -> List[str]:
    names = ["w_in", "b_in"]
    for b in range(arch.blocks):
        names += [
            f"blk{b}_w1",
            f"blk{b}_b1",
            f"blk{b}_ws",
            f"blk{b}_wk",
            f"blk{b}_w2",
            f"blk{b}_b2",
        ]
    names += ["w_out", "b_out"]
    return names


def init_weights(arch: ArchSpec, seed: int = 0) -> Dict[str, np.ndarray]:
    """Xavier hidden layers, zero output head."""
    rng = np.random.default_rng(seed)

    def xavier(n_in: int, n_out: int) -> np.ndarray:
        return rng.normal(0.0, math.sqrt(2.0 / (n_in + n_out)), size=(n_in, n_out))

    params: Dict[str, np.ndarray] = {
        "w_in": xavier(arch.input_dim, arch.width),
        "b_in": np.zeros(arch.width),
    }
    for b in range(arch.blocks):
        params[f"blk{b}_w1"] = xavier(arch.width, arch.width)
        params[f"blk{b}_b1"] = np.zeros(arch.width)
        params[f"blk{b}_ws"] = np.zeros((arch.step_embed_dim, arch.width))
        params[f"blk{b}_wk"] = xavier(arch.step_embed_dim, arch.width)
        params[f"blk{b}_w2"] = xavier(arch.width, arch.width)
        params[f"blk{b}_b2"] = np.zeros(arch.width)
    params["w_out"] = np.zeros((arch.width, arch.output_dim))
    params["b_out"] = np.zeros(arch.output_dim)
    return params


def step_embedding(k: int, dim: int) -> np.ndarray:
    half = dim // 2
    freqs = np.exp(-math.log(10000.0) * np.arange(half) / max(1, half - 1))
    ang = k * freqs
    return np.concatenate([np.sin(ang), np.cos(ang)])


def _silu(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    sig = 1.0 / (1.0 + np.exp(-x))
    return x * sig, sig


def forward_rows(
    params: Dict[str, np.ndarray], arch: ArchSpec, rows: np.ndarray
) -> Tuple[np.ndarray, dict]:
    """Forward pass on (B, input_dim) rows; cache holds what backward needs.

    The step-embedding slice of the input also conditions each block through
    a learned scale and shift, so per-step gains don't have to survive the
    full depth.
    """
    if rows.shape[1] != arch.input_dim:
        raise ShapeError(f"forward_rows: {rows.shape[1]} features, want {arch.input_dim}")
    e0 = arch.horizon * arch.action_dim
    emb = rows[:, e0 : e0 + arch.step_embed_dim]
    h = rows @ params["w_in"] + params["b_in"]
    cache = {"rows": rows, "emb": emb, "h": [h]}
    acts = []
    for b in range(arch.blocks):
        pre = h @ params[f"blk{b}_w1"] + params[f"blk{b}_b1"]
        scale = 1.0 + emb @ params[f"blk{b}_ws"]
        a1 = pre * scale + emb @ params[f"blk{b}_wk"]
        z1, sig = _silu(a1)
        a2 = z1 @ params[f"blk{b}_w2"] + params[f"blk{b}_b2"]
        h = h + a2
        acts.append((pre, scale, a1, sig, z1))
        cache["h"].append(h)
    cache["acts"] = acts
    out = h @ params["w_out"] + params["b_out"]
    return out, cache


def backward_rows(
    params: Dict[str, np.ndarray], arch: ArchSpec, cache: dict, dout: np.ndarray
) -> Dict[str, np.ndarray]:
    """Reverse-mode sweep; returns parameter gradients for a given dL/dout."""
    grads: Dict[str, np.ndarray] = {}
    h_list = cache["h"]
    grads["w_out"] = h_list[-1].T @ dout
    grads["b_out"] = dout.sum(axis=0)
    dh = dout @ params["w_out"].T
    emb = cache["emb"]
    for b in range(arch.blocks - 1, -1, -1):
        pre, scale, a1, sig, z1 = cache["acts"][b]
        da2 = dh  # residual: h_out = h_in + a2
        grads[f"blk{b}_w2"] = z1.T @ da2
        grads[f"blk{b}_b2"] = da2.sum(axis=0)
        dz1 = da2 @ params[f"blk{b}_w2"].T
        da1 = dz1 * sig * (1.0 + a1 * (1.0 - sig))
        grads[f"blk{b}_wk"] = emb.T @ da1
        grads[f"blk{b}_ws"] = emb.T @ (da1 * pre)
        dpre = da1 * scale
        grads[f"blk{b}_w1"] = h_list[b].T @ dpre
        grads[f"blk{b}_b1"] = dpre.sum(axis=0)
        dh = dh + dpre @ params[f"blk{b}_w1"].T
    grads["w_in"] = cache["rows"].T @ dh
    grads["b_in"] = dh.sum(axis=0)
    return grads


@dataclass
class DenoiserWeights:
    arch: ArchSpec
    params: Dict[str, np.ndarray]
    norm_mean: np.ndarray = field(default_factory=lambda: np.zeros(2))
    norm_std: np.ndarray = field(default_factory=lambda: np.ones(2))
    schedule_steps: int = 50
    beta_start: float = 0.004
    beta_end: float = 0.16
    epochs: int = 0
    loss_curve: List[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        for name in param_order(self.arch):
            if name not in self.params:
                raise ShapeError(f"DenoiserWeights: missing parameter {name}")
            if not np.all(np.isfinite(self.params[name])):
                raise ShapeError(f"DenoiserWeights: non-finite parameter {name}")


def assemble_rows(
    values: np.ndarray, k: int, context: ConditioningContext, arch: ArchSpec
) -> Tuple[np.ndarray, np.ndarray]:
    """Rows for the active agents of one scene; returns (rows, active_index)."""
    active = np.flatnonzero(context.mask)
    emb = step_embedding(k, arch.step_embed_dim)
    rows = np.empty((active.size, arch.input_dim), dtype=np.float64)
    for r, i in enumerate(active):
        rows[r] = np.concatenate(
            [values[:, i, :].reshape(-1), emb, context.features[i]]
        )
    return rows, active


def denoiser_forward(
    tau_k: ActionTensor, k: int, context: ConditioningContext, weights: DenoiserWeights
) -> ActionTensor:
    """Predict the noise component; masked agents map to exact zeros."""
    arch = weights.arch
    values = tau_k.values
    if values.shape != (arch.horizon, context.mask.shape[0], arch.action_dim):
        raise ShapeError(
            f"denoiser_forward: actions {values.shape}, want "
            f"({arch.horizon}, {context.mask.shape[0]}, {arch.action_dim})"
        )
    rows, active = assemble_rows(values, k, context, arch)
    out = np.zeros_like(values)
    if active.size:
        pred, _ = forward_rows(weights.params, arch, rows)
        for r, i in enumerate(active):
            out[:, i, :] = pred[r].reshape(arch.horizon, arch.action_dim)
    return tau_k.masked(out)


def save_weights(weights: DenoiserWeights, path: str | Path) -> None:
    """uint64 LE header length + JSON header + float32 LE parameter blob."""
    order = param_order(weights.arch)
    header = {
        "format": CHECKPOINT_TAG,
        "arch": asdict(weights.arch),
        "norm": {
            "mean": [float(v) for v in weights.norm_mean],
            "std": [float(v) for v in weights.norm_std],
        },
        "schedule": {
            "K": weights.schedule_steps,
            "beta_start": weights.beta_start,
            "beta_end": weights.beta_end,
        },
        "training": {"epochs": weights.epochs, "loss_curve": weights.loss_curve},
        "params": [{"name": n, "shape": list(weights.params[n].shape)} for n in order],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for n in order:
            fh.write(np.ascontiguousarray(weights.params[n], dtype="<f4").tobytes())


def load_weights(path: str | Path) -> DenoiserWeights:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise SchemaError(f"{path}: truncated checkpoint")
    (hlen,) = struct.unpack_from("<Q", raw, 0)
    header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    if header.get("format") != CHECKPOINT_TAG:
        raise SchemaError(f"{path}: unknown checkpoint format {header.get('format')!r}")
    arch = ArchSpec(**header["arch"])
    off = 8 + hlen
    params: Dict[str, np.ndarray] = {}
    for spec in header["params"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=off)
        params[spec["name"]] = arr.astype(np.float64).reshape(shape)
        off += arr.nbytes
    return DenoiserWeights(
        arch=arch,
        params=params,
        norm_mean=np.array(header["norm"]["mean"], dtype=np.float64),
        norm_std=np.array(header["norm"]["std"], dtype=np.float64),
        schedule_steps=int(header["schedule"]["K"]),
        beta_start=float(header["schedule"]["beta_start"]),
        beta_end=float(header["schedule"]["beta_end"]),
        epochs=int(header["training"]["epochs"]),
        loss_curve=[float(v) for v in header["training"]["loss_curve"]],
    )
