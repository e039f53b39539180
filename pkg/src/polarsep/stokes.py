"""Linear Stokes parameters from four polarizer angles.

All maps are computed per colour channel with no coupling between
channels. The unpolarized image is defined as ``S0``, i.e. the sum of the
four angle images divided by two, which undoes the one-half attenuation of
an ideal polarizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import check_image, same_geometry

EPS_S0 = 1e-9
CANONICAL_ANGLES = (0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4)


@dataclass(frozen=True, eq=False)
class PolarFrame:
    """Radiance images behind polarizers at 0, 45, 90 and 135 degrees."""

    i0: np.ndarray
    i45: np.ndarray
    i90: np.ndarray
    i135: np.ndarray

    def __post_init__(self):
        imgs = []
        for name in ("i0", "i45", "i90", "i135"):
            img = check_image(getattr(self, name), name)
            if img.min() < 0.0:
                raise ValueError(f"{name}: negative radiance")
            imgs.append(img)
        same_geometry(*imgs)
        for name, img in zip(("i0", "i45", "i90", "i135"), imgs):
            object.__setattr__(self, name, img)

    def as_tuple(self):
        return self.i0, self.i45, self.i90, self.i135

    @property
    def shape(self):
        return self.i0.shape


@dataclass(frozen=True, eq=False)
class StokesMap:
    s0: np.ndarray
    s1: np.ndarray
    s2: np.ndarray

    def __post_init__(self):
        maps = [check_image(getattr(self, n), n) for n in ("s0", "s1", "s2")]
        same_geometry(*maps)
        for n, m in zip(("s0", "s1", "s2"), maps):
            object.__setattr__(self, n, m)

    @property
    def shape(self):
        return self.s0.shape

    def polarized_intensity(self) -> np.ndarray:
        return np.hypot(self.s1, self.s2)

    def is_realizable(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.s0 >= -tol) and np.all(self.polarized_intensity() <= self.s0 + tol))

    def __add__(self, other: "StokesMap") -> "StokesMap":
        return StokesMap(self.s0 + other.s0, self.s1 + other.s1, self.s2 + other.s2)


def compute_stokes(frame: PolarFrame) -> StokesMap:
    i0, i45, i90, i135 = frame.as_tuple()
    return StokesMap(
        s0=(i0 + i45 + i90 + i135) / 2.0,
        s1=i0 - i90,
        s2=i45 - i135,
    )


def unpolarized(frame: PolarFrame) -> np.ndarray:
    """Total intensity ``S0`` of the frame."""
    return compute_stokes(frame).s0


def dolp(s: StokesMap) -> np.ndarray:
    """Degree of linear polarization in [0, 1]; 0 where ``s0 <= 1e-9``."""
    out = np.zeros_like(s.s0)
    ok = s.s0 > EPS_S0
    out[ok] = s.polarized_intensity()[ok] / s.s0[ok]
    return np.clip(out, 0.0, 1.0)


def aolp(s: StokesMap, return_mask: bool = False):
    """Angle of linear polarization in (-pi/2, pi/2].

    Uses the two-argument arctangent, ``0.5 * atan2(s2, s1)``. Pixels with
    ``s1 == s2 == 0`` have no defined angle; they get 0 and, with
    ``return_mask=True``, are flagged in the returned boolean mask.
    """
    angle = 0.5 * np.arctan2(s.s2, s.s1)
    angle = np.where(angle <= -np.pi / 2, angle + np.pi, angle)
    degenerate = (s.s1 == 0.0) & (s.s2 == 0.0)
    angle = np.where(degenerate, 0.0, angle)
    if return_mask:
        return angle, degenerate
    return angle


def degenerate_mask(s: StokesMap) -> np.ndarray:
    """Pixels where DOLP or AOLP fall back to their defined defaults."""
    return (s.s0 <= EPS_S0) | ((s.s1 == 0.0) & (s.s2 == 0.0))


def intensity_at(s: StokesMap, phi: float, tol: float = 1e-12) -> np.ndarray:
    """Radiance seen through an ideal linear polarizer at angle ``phi``.

    Evaluates ``0.5 * (s0 + s1 cos 2phi + s2 sin 2phi)``. Negative values no
    larger than ``tol`` in magnitude are rounding noise and are set to 0;
    anything more negative means ``s`` is not physically realizable.
    """
    val = 0.5 * (s.s0 + s.s1 * np.cos(2 * phi) + s.s2 * np.sin(2 * phi))
    if val.min() < -tol:
        raise ValueError("Stokes map is not realizable (negative intensity)")
    return np.maximum(val, 0.0)


def frame_from_stokes(s: StokesMap) -> PolarFrame:
    return PolarFrame(*(intensity_at(s, phi) for phi in CANONICAL_ANGLES))
