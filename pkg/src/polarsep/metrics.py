"""Losses and image-quality metrics.

Inputs are images in the :mod:`polarsep.imagecore` convention; every
metric requires both inputs to have identical shape.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Mapping, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .imagecore import check_image, same_geometry

PHASE_EPS = 1e-9


def _pair(a, b):
    a = check_image(a, "a")
    b = check_image(b, "b")
    same_geometry(a, b)
    return a, b


def _planes(img: np.ndarray) -> np.ndarray:
    """``(C, H, W)`` view of an image."""
    return img[None] if img.ndim == 2 else np.moveaxis(img, 2, 0)


def l1(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean(np.abs(a - b)))


def tv_loss(a, b) -> float:
    """Mean absolute difference of forward-difference gradients.

    Horizontal and vertical differences are evaluated on the common
    ``(H-1) x (W-1)`` region and averaged together.
    """
    a, b = _pair(a, b)
    if min(a.shape[:2]) < 2:
        raise ValueError("tv_loss needs images of at least 2x2")

    def grads(img):
        p = _planes(img)
        gx = p[:, :-1, 1:] - p[:, :-1, :-1]
        gy = p[:, 1:, :-1] - p[:, :-1, :-1]
        return np.stack([gx, gy])

    return float(np.mean(np.abs(grads(a) - grads(b))))


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


def padded_fft2(plane: np.ndarray) -> np.ndarray:
    """2-D DFT after zero-padding each side to the next power of two."""
    h, w = plane.shape
    padded = np.zeros((_next_pow2(h), _next_pow2(w)))
    padded[:h, :w] = plane
    return np.fft.fft2(padded)


def phase_loss(a, b) -> float:
    """Mean wrapped phase difference of the 2-D Fourier coefficients.

    Per channel, differences are folded into ``[0, pi]`` and frequencies
    where either spectrum has magnitude below ``1e-9`` are skipped. The
    result is the mean over all remaining coefficients of all channels.
    """
    a, b = _pair(a, b)
    total = 0.0
    count = 0
    for pa, pb in zip(_planes(a), _planes(b)):
        fa, fb = padded_fft2(pa), padded_fft2(pb)
        keep = (np.abs(fa) >= PHASE_EPS) & (np.abs(fb) >= PHASE_EPS)
        diff = np.abs(np.angle(fa[keep]) - np.angle(fb[keep]))
        diff = np.minimum(diff, 2 * np.pi - diff)
        total += float(diff.sum())
        count += int(keep.sum())
    return total / count if count else 0.0


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    a, b = _pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / mse))


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def ssim(a, b, data_range: float = 1.0, window: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03) -> float:
    """Single-scale SSIM with a Gaussian window, valid positions only.

    The SSIM map is averaged over positions and then over channels.
    """
    a, b = _pair(a, b)
    if min(a.shape[:2]) < window:
        raise ValueError(f"images must be at least {window}x{window} for SSIM")
    g = gaussian_window(window, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2

    def filt(x):
        return np.einsum("ijkl,kl->ij", sliding_window_view(x, g.shape), g)

    scores = []
    for x, y in zip(_planes(a), _planes(b)):
        mx, my = filt(x), filt(y)
        vx = filt(x * x) - mx * mx
        vy = filt(y * y) - my * my
        cov = filt(x * y) - mx * my
        num = (2 * mx * my + c1) * (2 * cov + c2)
        den = (mx * mx + my * my + c1) * (vx + vy + c2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))


@dataclass(frozen=True)
class LossWeights:
    """Term weights: L1, perceptual, TV, phase, diffusion, reconstruction."""

    gamma1: float = 1.0
    gamma2: float = 0.0
    gamma3: float = 0.1
    gamma4: float = 0.1
    gamma5: float = 1.0
    gamma6: float = 1.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and non-negative")


TERM_WEIGHT = {
    "l1": "gamma1",
    "perceptual": "gamma2",
    "tv": "gamma3",
    "phase": "gamma4",
    "diff": "gamma5",
    "recon": "gamma6",
}


def stage_loss(components: Mapping[str, float], weights: LossWeights = LossWeights()):
    """Weighted sum of precomputed loss terms.

    ``components`` maps term names (``l1``, ``perceptual``, ``tv``,
    ``phase``, ``diff``, ``recon``) to values; absent terms contribute
    nothing. Returns ``(total, {term: weighted value})``.
    """
    unknown = set(components) - set(TERM_WEIGHT)
    if unknown:
        raise ValueError(f"unknown loss term(s): {sorted(unknown)}")
    breakdown = {}
    for term, wname in TERM_WEIGHT.items():
        if term in components:
            breakdown[term] = getattr(weights, wname) * float(components[term])
    return float(sum(breakdown.values())), breakdown


def stage1_loss(pred, target, weights: LossWeights = LossWeights(),
                perceptual: Optional[Callable[[np.ndarray, np.ndarray], float]] = None):
    """L1 + perceptual + TV + phase on a predicted/target image pair.

    The perceptual term needs a caller-supplied callback; without one it
    contributes 0.
    """
    terms = {
        "l1": l1(pred, target),
        "perceptual": float(perceptual(pred, target)) if perceptual is not None else 0.0,
        "tv": tv_loss(pred, target),
        "phase": phase_loss(pred, target),
    }
    return stage_loss(terms, weights)


def stage2_loss(diff_loss: float, pred, target, weights: LossWeights = LossWeights(),
                perceptual=None):
    """``gamma5 * diff + gamma6 * recon`` where ``recon`` is :func:`stage1_loss`."""
    recon, _ = stage1_loss(pred, target, weights, perceptual)
    return stage_loss({"diff": diff_loss, "recon": recon}, weights)


METRIC_ORDER = ("l1", "tv", "phase", "psnr", "ssim")


def metric_suite(a, b) -> dict[str, float]:
    """All comparison metrics in a fixed order (SSIM skipped if too small)."""
    out = {"l1": l1(a, b), "tv": tv_loss(a, b), "phase": phase_loss(a, b), "psnr": psnr(a, b)}
    if min(np.shape(a)[:2]) >= 11:
        out["ssim"] = ssim(a, b)
    return out
