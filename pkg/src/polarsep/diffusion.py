"""DDPM noise schedule, forward noising and reverse sampling.

Schedule arrays are indexed directly by the timestep ``t`` in ``1..T``.
Slot 0 holds the noiseless state (``beta[0] = 0``, ``alpha_bar[0] = 1``),
so formulas follow the usual DDPM notation.

The denoiser is any callable ``denoiser(z_t, t, cond) -> eps_hat``; no
network is involved here. Randomness always comes from an explicit
``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Denoiser = Callable[[np.ndarray, int, object], np.ndarray]


@dataclass(frozen=True, eq=False)
class DiffusionSchedule:
    T_steps: int
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    sigma: np.ndarray
    variance: str = "beta"

    def check_t(self, t: int) -> int:
        if not 1 <= t <= self.T_steps:
            raise ValueError(f"timestep {t} outside 1..{self.T_steps}")
        return int(t)


def make_schedule(T_steps: int = 1000, beta_start: float = 1e-4, beta_end: float = 0.02,
                  variance: str = "beta") -> DiffusionSchedule:
    """Linear beta schedule, endpoints included.

    ``variance`` selects the reverse-step noise scale: ``"beta"`` uses
    ``sigma_t = sqrt(beta_t)``; ``"posterior"`` uses
    ``sqrt(beta_t (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t))``.
    """
    if int(T_steps) != T_steps or T_steps < 1:
        raise ValueError("T_steps must be a positive integer")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ValueError("need 0 < beta_start <= beta_end < 1")
    T_steps = int(T_steps)
    beta = np.zeros(T_steps + 1)
    beta[1:] = np.linspace(beta_start, beta_end, T_steps) if T_steps > 1 else beta_start
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    if variance == "beta":
        sigma = np.sqrt(beta)
    elif variance == "posterior":
        post = np.zeros(T_steps + 1)
        post[1:] = beta[1:] * (1.0 - alpha_bar[:-1]) / (1.0 - alpha_bar[1:])
        sigma = np.sqrt(post)
    else:
        raise ValueError(f"unknown variance choice {variance!r}")
    for arr in (beta, alpha, alpha_bar, sigma):
        arr.setflags(write=False)
    return DiffusionSchedule(T_steps, beta, alpha, alpha_bar, sigma, variance)


def _same_shape(a, b, what="eps"):
    if np.shape(a) != np.shape(b):
        raise ValueError(f"{what} shape {np.shape(b)} does not match {np.shape(a)}")


def q_sample(z0, t: int, eps, schedule: DiffusionSchedule) -> np.ndarray:
    """Jump straight to step ``t``: ``sqrt(abar_t) z0 + sqrt(1 - abar_t) eps``."""
    t = schedule.check_t(t)
    _same_shape(z0, eps)
    ab = schedule.alpha_bar[t]
    return np.sqrt(ab) * np.asarray(z0, dtype=np.float64) + np.sqrt(1.0 - ab) * np.asarray(eps, dtype=np.float64)


def step_sample(z_prev, t: int, eps, schedule: DiffusionSchedule) -> np.ndarray:
    """One forward step: ``sqrt(1 - beta_t) z_{t-1} + sqrt(beta_t) eps``.

    Composing this from ``t = 1`` reproduces the marginal of
    :func:`q_sample` in distribution.
    """
    t = schedule.check_t(t)
    _same_shape(z_prev, eps)
    b = schedule.beta[t]
    return np.sqrt(1.0 - b) * np.asarray(z_prev, dtype=np.float64) + np.sqrt(b) * np.asarray(eps, dtype=np.float64)


def reverse_step(z_t, t: int, denoiser: Denoiser, cond, schedule: DiffusionSchedule,
                 noise: Optional[np.ndarray] = None) -> np.ndarray:
    """One ancestral step ``z_t -> z_{t-1}``.

    ``noise=None`` runs deterministically. At ``t = 1`` the noise term is
    always dropped.
    """
    t = schedule.check_t(t)
    z_t = np.asarray(z_t, dtype=np.float64)
    eps_hat = np.asarray(denoiser(z_t, t, cond), dtype=np.float64)
    _same_shape(z_t, eps_hat, "denoiser output")
    coef = schedule.beta[t] / np.sqrt(1.0 - schedule.alpha_bar[t])
    mean = (z_t - coef * eps_hat) / np.sqrt(schedule.alpha[t])
    if noise is None or t == 1:
        return mean
    _same_shape(z_t, noise, "noise")
    return mean + schedule.sigma[t] * noise


def generate(denoiser: Denoiser, cond, schedule: DiffusionSchedule, seed: int,
             shape, stochastic: bool = True, trace: Optional[list] = None) -> np.ndarray:
    """Sample ``z_0`` by running the reverse chain from ``z_T ~ N(0, I)``.

    ``z_T`` and every per-step noise draw come from one generator seeded with
    ``seed``, so the output is bit-identical for a fixed seed and denoiser.
    If ``trace`` is a list, ``(t, z_t)`` pairs are appended to it.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(shape)
    for t in range(schedule.T_steps, 0, -1):
        if trace is not None:
            trace.append((t, z))
        noise = rng.standard_normal(shape) if stochastic and t > 1 else None
        z = reverse_step(z, t, denoiser, cond, schedule, noise)
    if trace is not None:
        trace.append((0, z))
    return z


def oracle_denoiser(z0, schedule: DiffusionSchedule) -> Denoiser:
    """Denoiser that knows the clean sample and returns the exact noise."""
    z0 = np.asarray(z0, dtype=np.float64)

    def predict(z_t, t, cond=None):
        ab = schedule.alpha_bar[t]
        return (z_t - np.sqrt(ab) * z0) / np.sqrt(1.0 - ab)

    return predict


def zero_denoiser(z_t, t, cond=None):
    return np.zeros_like(z_t)


def ddpm_loss(eps_hat, eps_true) -> float:
    """Mean squared error between predicted and true noise."""
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    eps_true = np.asarray(eps_true, dtype=np.float64)
    _same_shape(eps_hat, eps_true)
    return float(np.mean((eps_hat - eps_true) ** 2))
