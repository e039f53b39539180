"""Reflection/transmission separation.

Two routes are provided:

* :func:`search_alpha_edge` needs a registered transmission reference. It
  finds the blending weight that leaves the fewest transmission edges in
  the residual reflection.
* :func:`separate_brewster` works from Stokes maps alone. It assumes the
  transmission is unpolarized and the reflection is linearly polarized
  with a known degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .imagecore import check_image, same_geometry
from .stokes import StokesMap

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
# objective values closer than this count as tied
TIE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SeparationResult:
    t_hat: np.ndarray
    r_hat: np.ndarray
    alpha_t: float
    alpha_r: float
    objective_value: float
    clip_fraction: float = 0.0


def mix(t, r, alpha_t: float, alpha_r: float) -> np.ndarray:
    t = check_image(t, "t")
    r = check_image(r, "r")
    same_geometry(t, r)
    if alpha_t < 0 or alpha_r < 0:
        raise ValueError("blending coefficients must be non-negative")
    return alpha_t * t + alpha_r * r


def reflection_residual(m, t, alpha_t: float, alpha_r: float = 1.0) -> np.ndarray:
    """``(m - alpha_t * t) / alpha_r`` without clipping."""
    if alpha_r <= 0:
        raise ValueError("alpha_r must be positive")
    return (m - alpha_t * t) / alpha_r


def estimate_reflection(m, t, alpha_t: float, alpha_r: float = 1.0, return_clip: bool = False):
    """Invert the two-layer mixture for the reflection.

    Negative values are clipped to zero; with ``return_clip=True`` the
    fraction of clipped samples is returned as well.
    """
    m = check_image(m, "m")
    t = check_image(t, "t")
    same_geometry(m, t)
    r = reflection_residual(m, t, alpha_t, alpha_r)
    neg = r < 0
    r = np.where(neg, 0.0, r)
    if return_clip:
        return r, float(neg.mean())
    return r


def edge_magnitude(img: np.ndarray) -> np.ndarray:
    """Forward-difference gradient magnitude, summed over channels.

    The output drops the last row and column.
    """
    img = img if img.ndim == 3 else img[:, :, None]
    gx = img[:-1, 1:, :] - img[:-1, :-1, :]
    gy = img[1:, :-1, :] - img[:-1, :-1, :]
    return np.sqrt(gx**2 + gy**2).sum(axis=2)


def _ncc(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    na = np.sqrt(np.sum(a * a))
    nb = np.sqrt(np.sum(b * b))
    if na == 0.0 or nb <= 1e-12 * max(na, 1.0):
        return 0.0
    return float(np.sum(a * b) / (na * nb))


class EdgeObjective:
    """Objective of the blending-weight search, as a function of ``alpha_t``.

    Value = NCC(|grad(alpha_t t)|, |grad R(alpha_t)|)
    + penalty_weight * mean(max(-R(alpha_t), 0)), with ``R = m - alpha_t t``.
    """

    def __init__(self, m, t, penalty_weight: float = 10.0):
        self.m = check_image(m, "m")
        self.t = check_image(t, "t")
        same_geometry(self.m, self.t)
        if min(self.m.shape[:2]) < 2:
            raise ValueError("images must be at least 2x2")
        self.t_edges = edge_magnitude(self.t)
        if not np.any(self.t_edges > 0):
            raise DegenerateInputError("transmission has no gradients")
        self.penalty_weight = penalty_weight

    def __call__(self, alpha_t: float) -> float:
        residual = self.m - alpha_t * self.t
        # NCC is scale invariant, so |grad(alpha_t t)| reduces to |grad t| (also the alpha_t -> 0 limit)
        corr = _ncc(self.t_edges, edge_magnitude(residual))
        penalty = np.mean(np.maximum(-residual, 0.0))
        return corr + self.penalty_weight * float(penalty)


def golden_section(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Minimise ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def search_alpha_edge(
    m,
    t,
    *,
    alpha_min: float = 0.0,
    alpha_max: float = 1.0,
    step: float = 0.01,
    tol: float = 1e-4,
    penalty_weight: float = 10.0,
) -> SeparationResult:
    """Find the transmission weight of ``m = alpha_t * t + R``.

    ``alpha_r`` is fixed to 1: the mixture cannot tell ``alpha_r`` from the
    brightness of ``R``. A grid search over ``[alpha_min, alpha_max]`` comes
    first. Ties go to the larger ``alpha_t``. Golden-section search then
    refines inside the neighbouring grid cells. The refined point replaces
    the grid point only when it has a strictly lower objective.
    """
    objective = EdgeObjective(m, t, penalty_weight)
    n = int(round((alpha_max - alpha_min) / step))
    if not 0.0 <= alpha_min < alpha_max or n < 1:
        raise ValueError("need 0 <= alpha_min < alpha_max and step <= alpha_max - alpha_min")
    grid = [alpha_min + k * (alpha_max - alpha_min) / n for k in range(n + 1)]
    values = [objective(a) for a in grid]
    floor = min(values)
    best_k = max(k for k, v in enumerate(values) if v <= floor + TIE_TOL)
    best_val = values[best_k]
    best_a = grid[best_k]
    lo = grid[max(best_k - 1, 0)]
    hi = grid[min(best_k + 1, len(grid) - 1)]
    if hi > lo:
        a_ref, v_ref = golden_section(objective, lo, hi, tol)
        if v_ref < best_val - TIE_TOL:
            best_a, best_val = a_ref, v_ref
    r_hat, clip = estimate_reflection(objective.m, objective.t, best_a, 1.0, return_clip=True)
    return SeparationResult(
        t_hat=objective.t.copy(),
        r_hat=r_hat,
        alpha_t=float(best_a),
        alpha_r=1.0,
        objective_value=float(best_val),
        clip_fraction=clip,
    )


def separate_brewster(mixed: StokesMap, p_r: float = 1.0) -> SeparationResult:
    """Split a Stokes map into unpolarized transmission and polarized reflection.

    The polarized intensity ``sqrt(s1^2 + s2^2)`` is attributed entirely to
    the reflection. Dividing by the reflection's degree of polarization
    ``p_r`` gives the reflection radiance, clamped to ``[0, s0]``. The
    remainder of ``s0`` is the transmission. The outputs already include
    the blending weights, so ``alpha_t = alpha_r = 1``.
    """
    if not p_r > 0:
        raise ValueError("p_r must be positive")
    s0 = mixed.s0
    raw = mixed.polarized_intensity() / p_r
    r_hat = np.clip(raw, 0.0, np.maximum(s0, 0.0))
    t_hat = s0 - r_hat
    clipped = float(np.mean(raw > np.maximum(s0, 0.0)))
    return SeparationResult(
        t_hat=t_hat,
        r_hat=r_hat,
        alpha_t=1.0,
        alpha_r=1.0,
        objective_value=0.0,
        clip_fraction=clipped,
    )
