"""Denoiser training: epsilon-prediction objective with Adam updates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from advscene.errors import ConfigError, DivergenceError
from advscene.diffusion.context import ConditioningContext, encode_context, pad_actions
from advscene.diffusion.network import (
    ArchSpec,
    DenoiserWeights,
    backward_rows,
    forward_rows,
    init_weights,
    param_order,
    step_embedding,
)
from advscene.diffusion.schedule import DiffusionSchedule
from advscene.ingest.windows import ModelSample

STD_FLOOR = 1e-6


@dataclass
class TrainConfig:
    epochs: int = 20
    lr: float = 0.003
    batch_size: int = 64
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8


class Adam:
    """Adaptive-moment estimation over a named parameter dict."""

    def __init__(self, params: Dict[str, np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.m = {n: np.zeros_like(p) for n, p in params.items()}
        self.v = {n: np.zeros_like(p) for n, p in params.items()}
        self.t = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        self.t += 1
        b1, b2 = self.cfg.adam_beta1, self.cfg.adam_beta2
        bias1 = 1.0 - b1**self.t
        bias2 = 1.0 - b2**self.t
        for n, g in grads.items():
            self.m[n] = b1 * self.m[n] + (1.0 - b1) * g
            self.v[n] = b2 * self.v[n] + (1.0 - b2) * g * g
            params[n] -= (
                self.cfg.lr * (self.m[n] / bias1) / (np.sqrt(self.v[n] / bias2) + self.cfg.adam_eps)
            )


def action_norm_stats(samples: Sequence[ModelSample]) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean/std over every valid action entry; std floored."""
    stacked = np.concatenate([s.actions.reshape(-1, 2) for s in samples], axis=0)
    mean = stacked.mean(axis=0)
    std = np.maximum(stacked.std(axis=0), STD_FLOOR)
    return mean, std


def train_denoiser(
    samples: Sequence[ModelSample],
    sched: DiffusionSchedule,
    cfg: Optional[TrainConfig] = None,
    arch: Optional[ArchSpec] = None,
    contexts: Optional[List[ConditioningContext]] = None,
) -> DenoiserWeights:
    """Minimize E ||eps - eps_theta(forward_noise(tau0, k, eps), k, c)||^2.

    Deterministic for a fixed seed: sample order, step draws, and noise all
    come from one generator. Emits the per-epoch mean loss in the returned
    weights' ``loss_curve``.
    """
    if not samples:
        raise ConfigError("train_denoiser: no samples")
    cfg = cfg or TrainConfig()
    arch = arch or ArchSpec()
    rng = np.random.default_rng(cfg.seed)

    mean, std = action_norm_stats(samples)
    if contexts is None:
        contexts = [encode_context(s) for s in samples]
    padded = []
    for s in samples:
        values, _ = pad_actions(s.actions)
        padded.append((values - mean) / std)

    params = init_weights(arch, seed=cfg.seed)
    opt = Adam(params, cfg)
    emb_table = np.stack(
        [step_embedding(k, arch.step_embed_dim) for k in range(sched.K + 1)]
    )
    curve: List[float] = []
    n = len(samples)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            rows_list, target_list = [], []
            for idx in batch:
                ctx = contexts[idx]
                x0 = padded[idx]
                k = int(rng.integers(1, sched.K + 1))
                noise = rng.standard_normal(x0.shape)
                noise[:, ~ctx.mask, :] = 0.0
                ab = sched.alpha_bar[k]
                x_k = np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * noise
                for i in np.flatnonzero(ctx.mask):
                    rows_list.append(
                        np.concatenate(
                            [x_k[:, i, :].reshape(-1), emb_table[k], ctx.features[i]]
                        )
                    )
                    target_list.append(noise[:, i, :].reshape(-1))
            rows = np.stack(rows_list)
            targets = np.stack(target_list)
            pred, cache = forward_rows(params, arch, rows)
            diff = pred - targets
            loss = float(np.mean(diff * diff))
            if not np.isfinite(loss):
                raise DivergenceError(f"train_denoiser: NaN loss at epoch {epoch}, batch {n_batches}")
            dout = (2.0 / diff.size) * diff
            grads = backward_rows(params, arch, cache, dout)
            opt.step(params, grads)
            epoch_loss += loss
            n_batches += 1
        curve.append(epoch_loss / max(1, n_batches))

    return DenoiserWeights(
        arch=arch,
        params=params,
        norm_mean=mean,
        norm_std=std,
        schedule_steps=sched.K,
        beta_start=float(sched.beta[1]),
        beta_end=float(sched.beta[-1]),
        epochs=cfg.epochs,
        loss_curve=curve,
    )
