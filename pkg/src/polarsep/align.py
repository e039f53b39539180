"""Geometric alignment: translation by phase correlation, affine fitting
from point pairs, and inverse warping with bilinear sampling.

Point coordinates are ``(x, y)`` = (column, row). An :class:`AffineTransform`
maps *output* pixel coordinates to *source* coordinates, which is what an
inverse warp needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import FormatError, RankError
from .imagecore import check_image


@dataclass(frozen=True, eq=False)
class AffineTransform:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (2, 3) or not np.all(np.isfinite(m)):
            raise ValueError("affine matrix must be a finite 2x3 array")
        if abs(np.linalg.det(m[:, :2])) <= 1e-6:
            raise RankError("affine transform is singular")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "AffineTransform":
        return cls(np.eye(2, 3))

    @classmethod
    def translation(cls, dx: float, dy: float) -> "AffineTransform":
        return cls([[1.0, 0.0, dx], [0.0, 1.0, dy]])

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.matrix[:, :2].T + self.matrix[:, 2]

    def inverse(self) -> "AffineTransform":
        lin_inv = np.linalg.inv(self.matrix[:, :2])
        return AffineTransform(np.hstack([lin_inv, -lin_inv @ self.matrix[:, 2:]]))

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(2, 3)))

    def __matmul__(self, other: "AffineTransform") -> "AffineTransform":
        """``(a @ b).apply(p) == a.apply(b.apply(p))``."""
        lin = self.matrix[:, :2] @ other.matrix[:, :2]
        off = self.matrix[:, :2] @ other.matrix[:, 2] + self.matrix[:, 2]
        return AffineTransform(np.column_stack([lin, off]))


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def phase_correlate(a: np.ndarray, b: np.ndarray) -> tuple[int, int]:
    """Integer shift ``(dx, dy)`` such that ``b`` is ``a`` moved by it.

    For circular shifts ``b == np.roll(a, (dy, dx), axis=(0, 1))`` the
    result is exact. Ties in the correlation peak go to the smallest shift
    norm, then to the lexicographically smallest ``(dx, dy)``.
    """
    a = check_image(a, "a")
    b = check_image(b, "b")
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("phase_correlate expects single-channel images")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    h, w = a.shape
    if not (_is_pow2(h) and _is_pow2(w)) or min(h, w) < 8:
        raise ValueError(f"dimensions must be powers of two >= 8, got {a.shape}")
    cross = np.conj(np.fft.fft2(a)) * np.fft.fft2(b)
    mag = np.abs(cross)
    cross = np.divide(cross, mag, out=np.zeros_like(cross), where=mag > 1e-12 * max(mag.max(), 1e-300))
    corr = np.fft.ifft2(cross).real
    peak = corr.max()
    rows, cols = np.nonzero(corr >= peak - 1e-9 * max(abs(peak), 1e-12))
    dys = np.where(rows >= h // 2, rows - h, rows)
    dxs = np.where(cols >= w // 2, cols - w, cols)
    candidates = sorted(zip(dxs.tolist(), dys.tolist()), key=lambda s: (s[0] ** 2 + s[1] ** 2, s))
    dx, dy = candidates[0]
    return int(dx), int(dy)


def estimate_affine(correspondences) -> AffineTransform:
    """Least-squares affine ``A`` minimising ``sum |A src - dst|^2``.

    ``correspondences`` is a sequence of ``((sx, sy), (tx, ty))`` pairs or
    an ``(N, 4)`` array of ``sx sy tx ty`` rows.
    """
    arr = np.asarray(correspondences, dtype=np.float64).reshape(-1, 4)
    if not np.all(np.isfinite(arr)):
        raise ValueError("correspondences must be finite")
    if len(arr) < 3:
        raise RankError(f"need at least 3 correspondences, got {len(arr)}")
    src, dst = arr[:, :2], arr[:, 2:]
    design = np.column_stack([src, np.ones(len(src))])
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise RankError("correspondences are collinear or repeated")
    sol, *_ = np.linalg.lstsq(design, dst, rcond=None)
    return AffineTransform(sol.T)


def read_correspondences(path) -> np.ndarray:
    """Parse ``sx sy tx ty`` lines; ``#`` starts a comment."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 numbers")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: not a number") from None
    return np.array(rows, dtype=np.float64).reshape(-1, 4)


def _warp_plane(plane: np.ndarray, t: AffineTransform) -> np.ndarray:
    if t.is_identity():
        return plane.copy()
    h, w = plane.shape
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    m = t.matrix
    src_x = m[0, 0] * xs + m[0, 1] * ys + m[0, 2]
    src_y = m[1, 0] * xs + m[1, 1] * ys + m[1, 2]
    # scipy "mirror" is numpy "reflect": d c b | a b c d | c b a
    return ndimage.map_coordinates(plane, [src_y, src_x], order=1, mode="mirror")


def warp(img: np.ndarray, t: AffineTransform | Sequence[AffineTransform]) -> np.ndarray:
    """Inverse-warp ``img`` with bilinear sampling and reflect padding.

    ``t`` is one transform for all channels or one per channel.
    """
    img = check_image(img)
    if isinstance(t, AffineTransform):
        transforms = [t] * (1 if img.ndim == 2 else img.shape[2])
    else:
        transforms = list(t)
    if img.ndim == 2:
        if len(transforms) != 1:
            raise ValueError("single-channel image takes exactly one transform")
        return _warp_plane(img, transforms[0])
    if len(transforms) != img.shape[2]:
        raise ValueError(f"need {img.shape[2]} transforms, got {len(transforms)}")
    return np.stack([_warp_plane(img[:, :, c], tr) for c, tr in enumerate(transforms)], axis=2)
