"""Decoding of division-of-focal-plane polarized colour mosaics.

Decoding runs in two steps. :func:`split_angles` pulls the four
polarizer sub-lattices out of the mosaic; each is a quarter-size Bayer
image. :func:`demosaic_bilinear` then interpolates each of those to RGB.
"""

from __future__ import annotations

import numpy as np

from .imagecore import RawMosaic
from .layouts import ANGLES, MosaicLayout, get_layout
from .stokes import PolarFrame

__all__ = [
    "MosaicLayout",
    "split_angles",
    "demosaic_bilinear",
    "decode_frame",
    "bayer_from_rgb",
    "assemble_mosaic",
]

_K_GREEN = np.array([[0, 1, 0], [1, 4, 1], [0, 1, 0]], dtype=np.float64) / 4.0
_K_RED_BLUE = np.array([[1, 2, 1], [2, 4, 2], [1, 2, 1]], dtype=np.float64) / 4.0


def _as_plane(mosaic) -> np.ndarray:
    if isinstance(mosaic, RawMosaic):
        return mosaic.normalized()
    plane = np.asarray(mosaic, dtype=np.float64)
    if plane.ndim != 2:
        raise ValueError("mosaic must be 2-D")
    return plane


def _resolve_layout(mosaic, layout):
    if layout is not None:
        return layout
    if isinstance(mosaic, RawMosaic):
        return get_layout(mosaic.layout_id)
    return MosaicLayout()


def split_angles(mosaic, layout: MosaicLayout | None = None) -> dict[int, np.ndarray]:
    """Split a mosaic into four quarter-resolution Bayer images.

    Parameters
    ----------
    mosaic : RawMosaic or ndarray
        Sensor readout. Arrays are taken as already normalized to [0, 1].
    layout : MosaicLayout, optional
        Defaults to the layout named by the mosaic header.

    Returns
    -------
    dict
        ``{angle_deg: bayer_image}``, each of shape ``(H/2, W/2)``.
    """
    plane = _as_plane(mosaic)
    layout = _resolve_layout(mosaic, layout)
    h, w = plane.shape
    if h % 4 or w % 4:
        raise ValueError(f"mosaic dimensions must be multiples of 4, got {plane.shape}")
    out = {}
    for angle in ANGLES:
        r, c = layout.angle_site(angle)
        out[angle] = plane[r::2, c::2].copy()
    return out


def assemble_mosaic(bayers: dict[int, np.ndarray], layout: MosaicLayout) -> np.ndarray:
    """Inverse of :func:`split_angles` for float planes."""
    h, w = bayers[0].shape
    plane = np.empty((2 * h, 2 * w), dtype=np.float64)
    for angle in ANGLES:
        r, c = layout.angle_site(angle)
        plane[r::2, c::2] = bayers[angle]
    return plane


def _color_masks(shape, bayer_pattern) -> np.ndarray:
    layout_colors = MosaicLayout(bayer_pattern=tuple(tuple(r) for r in bayer_pattern))
    masks = np.zeros((3,) + tuple(shape), dtype=bool)
    for ch, sites in layout_colors.color_sites().items():
        for r, c in sites:
            masks[ch, r::2, c::2] = True
    return masks


def bayer_from_rgb(rgb: np.ndarray, bayer_pattern) -> np.ndarray:
    """Keep only each pixel's native colour sample."""
    masks = _color_masks(rgb.shape[:2], bayer_pattern)
    return np.einsum("chw,hwc->hw", masks.astype(np.float64), rgb)


def _filter3x3(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1, mode="reflect")
    h, w = img.shape
    out = np.zeros_like(img)
    for dy in range(3):
        for dx in range(3):
            k = kernel[dy, dx]
            if k:
                out += k * padded[dy : dy + h, dx : dx + w]
    return out


def demosaic_bilinear(bayer: np.ndarray, bayer_pattern=(("R", "G"), ("G", "B"))) -> np.ndarray:
    """Bilinear demosaicking with reflect padding.

    Native samples pass through unchanged. Missing greens average the four
    edge neighbours; missing red/blue average the two or four nearest
    same-colour sites. Reflect padding keeps the CFA parity at borders.
    """
    bayer = np.asarray(bayer, dtype=np.float64)
    if bayer.ndim != 2 or bayer.shape[0] < 2 or bayer.shape[1] < 2:
        raise ValueError(f"Bayer image must be 2-D and at least 2x2, got {bayer.shape}")
    masks = _color_masks(bayer.shape, bayer_pattern)
    rgb = np.empty(bayer.shape + (3,), dtype=np.float64)
    for ch in range(3):
        kernel = _K_GREEN if ch == 1 else _K_RED_BLUE
        rgb[:, :, ch] = _filter3x3(np.where(masks[ch], bayer, 0.0), kernel)
    return rgb


def decode_frame(mosaic, layout: MosaicLayout | None = None) -> PolarFrame:
    layout = _resolve_layout(mosaic, layout)
    quarters = split_angles(mosaic, layout)
    rgb = [demosaic_bilinear(quarters[a], layout.bayer_pattern) for a in ANGLES]
    return PolarFrame(*rgb)
