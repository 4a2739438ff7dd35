"""Anchor- and rule-guided ancestral sampling of joint action trajectories.

Each reverse step estimates the clean action tensor, applies a gradient
correction of the guidance objective on that estimate (scaled by the guidance
strength and the step's posterior variance), then takes the standard DDPM
posterior step. With all guidance weights zero the loop reduces exactly to
unguided ancestral sampling with an identical random stream.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from advscene.anchors.types import AnchorSet
from advscene.diffusion.context import ActionTensor, ConditioningContext, encode_context
from advscene.diffusion.guidance import GuidanceConfig, build_pair_set, guidance_loss
from advscene.diffusion.network import DenoiserWeights, denoiser_forward
from advscene.diffusion.schedule import (
    DiffusionSchedule,
    make_schedule,
    posterior_mean,
    predict_clean,
)
from advscene.errors import DivergenceError
from advscene.ingest.windows import normalize_window
from advscene.scene.dynamics import rollout_actions
from advscene.scene.types import JointState, Trajectory, VehicleState


def schedule_from_weights(weights: DenoiserWeights) -> DiffusionSchedule:
    return make_schedule(weights.schedule_steps, weights.beta_start, weights.beta_end)


def guided_denoise(
    context: ConditioningContext,
    anchors: AnchorSet,
    sched: DiffusionSchedule,
    weights: DenoiserWeights,
    cfg: GuidanceConfig,
    rng_seed: int,
) -> Trajectory:
    """Sample one guided joint trajectory (window frame).

    Deterministic in ``rng_seed``. Returns the integrated Trajectory over the
    active agents; anchors are given in the same (window) frame as
    ``context.init``.
    """
    rng = np.random.default_rng(rng_seed)
    arch = weights.arch
    T, n_slots = arch.horizon, context.mask.shape[0]
    mask3 = context.mask[None, :, None]

    active = np.flatnonzero(context.mask)
    init_active = context.init[active]
    dims_active = context.dims[active]
    bounds_active = context.bounds[active]
    roles_active = context.roles[active]
    pairs = build_pair_set(roles_active)
    active_ids = context.agent_ids[active]
    std = weights.norm_std

    x = rng.standard_normal((T, n_slots, 2)) * mask3
    tensor = ActionTensor(values=x, mask=context.mask, mean=weights.norm_mean, std=std)
    for k in range(sched.K, 0, -1):
        eps_hat = denoiser_forward(tensor, k, context, weights)
        tau0 = predict_clean(tensor.values, eps_hat.values, k, sched)
        if not cfg.inactive:
            phys = tau0[:, active, :] * std + weights.norm_mean
            _, g_phys, _ = guidance_loss(
                phys,
                init_active,
                context.dt,
                anchors,
                cfg,
                dims_active,
                bounds_active,
                pairs=pairs,
                agent_ids=active_ids,
            )
            g_norm = np.zeros_like(tau0)
            g_norm[:, active, :] = g_phys * std
            tau0 = tau0 - cfg.strength * sched.posterior_var[k] * g_norm
        mu = posterior_mean(tau0, tensor.values, k, sched)
        if k > 1:
            z = rng.standard_normal((T, n_slots, 2)) * mask3
            nxt = mu + np.sqrt(sched.posterior_var[k]) * z
        else:
            nxt = mu
        if not np.all(np.isfinite(nxt)):
            raise DivergenceError(f"guided_denoise: non-finite sample at step k={k}")
        tensor = tensor.masked(nxt)

    actions = (tensor.values[:, active, :] * std + weights.norm_mean).copy()
    init_joint = JointState(
        states={
            int(a): VehicleState(*init_active[i]) for i, a in enumerate(active_ids)
        },
        t=0,
        dt=context.dt,
    )
    return rollout_actions(init_joint, actions, context.dt)


def anchors_to_window_frame(
    anchors: AnchorSet, origin: Tuple[float, float], flipped: bool
) -> AnchorSet:
    out = anchors.translated(-origin[0], -origin[1])
    return out.point_reflected() if flipped else out


def regenerate_window(
    window,
    anchors: AnchorSet,
    weights: DenoiserWeights,
    cfg: GuidanceConfig,
    rng_seed: int,
    sched: Optional[DiffusionSchedule] = None,
) -> Trajectory:
    """Regenerate a stage-1 scenario window; returns a world-frame Trajectory.

    Anchors arrive in world coordinates; the sampled actions are frame
    invariant (the normalization transform is a rigid motion), so integrating
    them from the world-frame initial state yields the world trajectory.
    """
    sched = sched or schedule_from_weights(weights)
    sample = normalize_window(window)
    context = encode_context(sample)
    local = anchors_to_window_frame(anchors, sample.origin, sample.flipped)
    traj = guided_denoise(context, local, sched, weights, cfg, rng_seed)
    return rollout_actions(window.init, traj.actions, window.dt)
