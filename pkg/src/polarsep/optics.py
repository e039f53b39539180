"""Polarized image formation through a single glass interface.

The simulator is deliberately exact. Reflection and transmission are
incoherent, so their Stokes vectors add. Each layer's polarization
follows the Fresnel power coefficients of one lossless dielectric
interface. The resulting mixtures are the ground truth used to check
every separation routine.

Reflected light is polarized along ``phi_perp`` (the s direction).
Transmitted light is polarized along ``phi_perp + pi/2`` (the p
direction).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import read_key_values
from .errors import DomainError, FormatError
from .imagecore import RawMosaic, check_image, quantize16, read_image, same_geometry
from .layouts import ANGLES, get_layout
from .mosaic import assemble_mosaic, bayer_from_rgb
from .stokes import PolarFrame, StokesMap, frame_from_stokes


class FresnelCoefficients(NamedTuple):
    r_s: np.ndarray
    r_p: np.ndarray
    t_s: np.ndarray
    t_p: np.ndarray


@dataclass(frozen=True)
class InterfaceSpec:
    """Air/glass interface. ``theta`` is the angle of incidence in radians.

    Fields may be numpy arrays to evaluate many configurations at once.
    """

    n1: float = 1.0
    n2: float = 1.5
    theta: float = 0.0

    def __post_init__(self):
        n1, n2, theta = (np.asarray(v, dtype=np.float64) for v in (self.n1, self.n2, self.theta))
        if np.any(n1 < 1.0) or np.any(n2 <= 0.0):
            raise DomainError("refractive indices must satisfy n1 >= 1 and n2 > 0")
        if np.any(theta < 0.0) or np.any(theta >= np.pi / 2):
            raise DomainError("angle of incidence must lie in [0, pi/2)")
        if np.any(np.sin(theta) * n1 / n2 > 1.0):
            raise DomainError("total internal reflection: sin(theta) * n1 / n2 > 1")

    @classmethod
    def from_degrees(cls, n1=1.0, n2=1.5, theta_deg=0.0) -> "InterfaceSpec":
        return cls(n1, n2, np.deg2rad(theta_deg))


def fresnel(interface: InterfaceSpec) -> FresnelCoefficients:
    """Fresnel power reflectances and transmittances for s and p light."""
    n1 = np.asarray(interface.n1, dtype=np.float64)
    n2 = np.asarray(interface.n2, dtype=np.float64)
    theta = np.asarray(interface.theta, dtype=np.float64)
    cos_i = np.cos(theta)
    sin_t = n1 * np.sin(theta) / n2
    if np.any(sin_t > 1.0):
        raise DomainError("total internal reflection")
    cos_t = np.sqrt(1.0 - sin_t**2)
    r_s = ((n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t)) ** 2
    r_p = ((n2 * cos_i - n1 * cos_t) / (n2 * cos_i + n1 * cos_t)) ** 2
    return FresnelCoefficients(r_s, r_p, 1.0 - r_s, 1.0 - r_p)


def brewster_angle(n1: float, n2: float) -> float:
    if np.any(np.asarray(n1) <= 0) or np.any(np.asarray(n2) <= 0):
        raise DomainError("refractive indices must be positive")
    return np.arctan(np.asarray(n2, dtype=np.float64) / n1)


def _dop(a, b):
    a, b = np.asarray(a), np.asarray(b)
    total = a + b
    out = np.divide(np.abs(a - b), total, out=np.zeros_like(total), where=total > 0)
    return out[()]


def reflection_dolp(coeffs: FresnelCoefficients):
    """Degree of polarization of reflected light for unpolarized input."""
    return _dop(coeffs.r_s, coeffs.r_p)


def transmission_dolp(coeffs: FresnelCoefficients):
    return _dop(coeffs.t_s, coeffs.t_p)


@dataclass(frozen=True, eq=False)
class SceneSpec:
    """Ground-truth description of one mixed capture.

    ``depolarize_transmission`` forces the transmitted layer to be
    unpolarized, the idealisation assumed by Brewster-angle separation.
    Otherwise its degree of polarization is the larger of the Fresnel value
    and ``dolp_t_extra``.
    """

    transmission: np.ndarray
    reflection: np.ndarray
    interface: InterfaceSpec
    phi_perp: float = 0.0
    dolp_t_extra: float = 0.0
    depolarize_transmission: bool = False

    def __post_init__(self):
        t = check_image(self.transmission, "transmission")
        r = check_image(self.reflection, "reflection")
        same_geometry(t, r)
        if t.min() < 0 or r.min() < 0:
            raise ValueError("scene radiance must be non-negative")
        if not -np.pi / 2 < self.phi_perp <= np.pi / 2:
            raise ValueError("phi_perp must lie in (-pi/2, pi/2]")
        if not 0.0 <= self.dolp_t_extra <= 1.0:
            raise ValueError("dolp_t_extra must lie in [0, 1]")
        if np.ndim(self.interface.theta) != 0:
            raise ValueError("scene interface must be scalar")
        object.__setattr__(self, "transmission", t)
        object.__setattr__(self, "reflection", r)


@dataclass(frozen=True, eq=False)
class Synthesis:
    mixed: StokesMap
    frame: PolarFrame
    alpha_t: float
    alpha_r: float
    dolp_r: float
    dolp_t: float
    coefficients: FresnelCoefficients
    reflection_stokes: StokesMap
    transmission_stokes: StokesMap
    reflection_frame: PolarFrame
    transmission_frame: PolarFrame


def _polarized_layer(radiance, dop, orientation) -> StokesMap:
    return StokesMap(
        s0=radiance,
        s1=dop * radiance * np.cos(2 * orientation),
        s2=dop * radiance * np.sin(2 * orientation),
    )


def synthesize(scene: SceneSpec) -> Synthesis:
    """Mix transmission and reflection as seen through the four polarizers.

    The unpolarized mixture satisfies ``S0 = alpha_t * T + alpha_r * R``
    with ``alpha_r = (R_s + R_p) / 2`` and ``alpha_t = (T_s + T_p) / 2``.
    """
    c = fresnel(scene.interface)
    alpha_r = float((c.r_s + c.r_p) / 2)
    alpha_t = float((c.t_s + c.t_p) / 2)
    dop_r = float(reflection_dolp(c))
    if scene.depolarize_transmission:
        dop_t = 0.0
    else:
        dop_t = max(float(transmission_dolp(c)), scene.dolp_t_extra)
    refl = _polarized_layer(alpha_r * scene.reflection, dop_r, scene.phi_perp)
    trans = _polarized_layer(alpha_t * scene.transmission, dop_t, scene.phi_perp + np.pi / 2)
    mixed = refl + trans
    return Synthesis(
        mixed=mixed,
        frame=frame_from_stokes(mixed),
        alpha_t=alpha_t,
        alpha_r=alpha_r,
        dolp_r=dop_r,
        dolp_t=dop_t,
        coefficients=c,
        reflection_stokes=refl,
        transmission_stokes=trans,
        reflection_frame=frame_from_stokes(refl),
        transmission_frame=frame_from_stokes(trans),
    )


def mosaic_from_frame(frame: PolarFrame, layout_id: int = 0) -> tuple[RawMosaic, int]:
    """Point-sample a polar frame onto the sensor grid.

    Returns the 16-bit mosaic (twice the frame size in each direction) and
    the number of samples clipped to [0, 1] before quantization.
    """
    layout = get_layout(layout_id)
    h, w = frame.shape[:2]
    if h % 2 or w % 2:
        raise ValueError(f"frame dimensions must be even, got {h}x{w}")
    bayers = {}
    for angle, img in zip(ANGLES, frame.as_tuple()):
        bayers[angle] = img if img.ndim == 2 else bayer_from_rgb(img, layout.bayer_pattern)
    plane = assemble_mosaic(bayers, layout)
    n_clipped = int(np.count_nonzero((plane < 0.0) | (plane > 1.0)))
    samples = quantize16(np.clip(plane, 0.0, 1.0))
    return RawMosaic(samples, layout_id=layout_id), n_clipped


def render_mosaic(scene: SceneSpec, layout_id: int = 0) -> tuple[RawMosaic, int]:
    return mosaic_from_frame(synthesize(scene).frame, layout_id)


SCENE_KEYS = ("n1", "n2", "theta_deg", "phi_perp_deg", "dolp_t_extra")


def load_scene(transmission_path, reflection_path, params_path) -> SceneSpec:
    """Build a scene from two image files and a ``key=value`` parameter file.

    Recognised keys: ``n1``, ``n2``, ``theta_deg``, ``phi_perp_deg``,
    ``dolp_t_extra``.
    """
    raw = read_key_values(params_path)
    unknown = sorted(set(raw) - set(SCENE_KEYS))
    if unknown:
        raise FormatError(f"unknown scene parameter(s): {', '.join(unknown)}")
    try:
        p = {k: float(v) for k, v in raw.items()}
    except ValueError as exc:
        raise FormatError(f"bad scene parameter: {exc}") from None
    interface = InterfaceSpec.from_degrees(p.get("n1", 1.0), p.get("n2", 1.5), p.get("theta_deg", 0.0))
    return SceneSpec(
        transmission=read_image(transmission_path),
        reflection=read_image(reflection_path),
        interface=interface,
        phi_perp=float(np.deg2rad(p.get("phi_perp_deg", 0.0))),
        dolp_t_extra=p.get("dolp_t_extra", 0.0),
    )
