"""DDPM variance schedule and the closed-form noising/denoising identities.

Tables are 1-indexed by diffusion step k in [1, K]; index 0 holds the
conventions alpha_bar[0] = 1 and posterior_var[1] = 0 that make the final
reverse step collapse onto the clean estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from advscene.errors import ConfigError, ShapeError


@dataclass(frozen=True)
class DiffusionSchedule:
    beta: np.ndarray  # (K+1,); beta[0] = 0, unused
    alpha: np.ndarray  # 1 - beta
    alpha_bar: np.ndarray  # cumulative product; alpha_bar[0] = 1
    posterior_var: np.ndarray  # (1 - alpha_bar[k-1]) / (1 - alpha_bar[k]) * beta[k]

    @property
    def K(self) -> int:
        return self.beta.shape[0] - 1


def make_schedule(K: int, beta_start: float = 0.004, beta_end: float = 0.16) -> DiffusionSchedule:
    """Linear beta schedule with derived alpha / alpha_bar / posterior tables."""
    if K < 1:
        raise ConfigError(f"make_schedule: K {K} < 1")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise ConfigError(
            f"make_schedule: need 0 < beta_start <= beta_end < 1, got [{beta_start}, {beta_end}]"
        )
    beta = np.zeros(K + 1, dtype=np.float64)
    beta[1:] = np.linspace(beta_start, beta_end, K)
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    posterior_var = np.zeros(K + 1, dtype=np.float64)
    posterior_var[1:] = (1.0 - alpha_bar[:-1]) / (1.0 - alpha_bar[1:]) * beta[1:]
    return DiffusionSchedule(
        beta=beta, alpha=alpha, alpha_bar=alpha_bar, posterior_var=posterior_var
    )


def _check_step(k: int, sched: DiffusionSchedule) -> None:
    if not 1 <= k <= sched.K:
        raise ConfigError(f"step k={k} outside [1, {sched.K}]")


def forward_noise(
    tau0: np.ndarray, k: int, sched: DiffusionSchedule, noise: np.ndarray
) -> np.ndarray:
    """Closed-form forward marginal: sqrt(ab_k) tau0 + sqrt(1 - ab_k) noise."""
    _check_step(k, sched)
    tau0 = np.asarray(tau0, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != tau0.shape:
        raise ShapeError(f"forward_noise: noise {noise.shape} vs tau0 {tau0.shape}")
    ab = sched.alpha_bar[k]
    return np.sqrt(ab) * tau0 + np.sqrt(1.0 - ab) * noise


def predict_clean(
    tau_k: np.ndarray, eps_hat: np.ndarray, k: int, sched: DiffusionSchedule
) -> np.ndarray:
    """Invert the forward marginal given a noise estimate."""
    _check_step(k, sched)
    if np.asarray(eps_hat).shape != np.asarray(tau_k).shape:
        raise ShapeError(
            f"predict_clean: eps {np.asarray(eps_hat).shape} vs tau {np.asarray(tau_k).shape}"
        )
    ab = sched.alpha_bar[k]
    return (tau_k - np.sqrt(1.0 - ab) * eps_hat) / np.sqrt(ab)


def posterior_mean(
    tau0_hat: np.ndarray, tau_k: np.ndarray, k: int, sched: DiffusionSchedule
) -> np.ndarray:
    """Reverse-step mean fusing the clean estimate with the current noisy sample."""
    _check_step(k, sched)
    ab_k = sched.alpha_bar[k]
    ab_prev = sched.alpha_bar[k - 1]
    c0 = np.sqrt(ab_prev) * sched.beta[k] / (1.0 - ab_k)
    ck = np.sqrt(sched.alpha[k]) * (1.0 - ab_prev) / (1.0 - ab_k)
    return c0 * tau0_hat + ck * tau_k
