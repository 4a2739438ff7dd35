from advscene.diffusion.context import (
    CONTEXT_DIM,
    ActionTensor,
    ConditioningContext,
    encode_context,
    pad_actions,
)
from advscene.diffusion.guidance import GuidanceConfig, build_pair_set, guidance_loss
from advscene.diffusion.network import (
    ArchSpec,
    DenoiserWeights,
    denoiser_forward,
    init_weights,
    load_weights,
    save_weights,
)
from advscene.diffusion.sampler import (
    anchors_to_window_frame,
    guided_denoise,
    regenerate_window,
    schedule_from_weights,
)
from advscene.diffusion.schedule import (
    DiffusionSchedule,
    forward_noise,
    make_schedule,
    posterior_mean,
    predict_clean,
)
from advscene.diffusion.training import TrainConfig, action_norm_stats, train_denoiser

__all__ = [
    "ActionTensor",
    "ArchSpec",
    "CONTEXT_DIM",
    "ConditioningContext",
    "DenoiserWeights",
    "DiffusionSchedule",
    "GuidanceConfig",
    "TrainConfig",
    "action_norm_stats",
    "anchors_to_window_frame",
    "build_pair_set",
    "denoiser_forward",
    "encode_context",
    "forward_noise",
    "guidance_loss",
    "guided_denoise",
    "init_weights",
    "load_weights",
    "make_schedule",
    "pad_actions",
    "posterior_mean",
    "predict_clean",
    "regenerate_window",
    "save_weights",
    "schedule_from_weights",
    "train_denoiser",
]
