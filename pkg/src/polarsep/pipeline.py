"""End-to-end processing of a mixed/transmission raw pair.

Stages, in order: per-channel alignment in the raw domain, angle
separation and demosaicking, Stokes maps, unpolarized images, and
reflection estimation.

Alignment treats each of the 16 sub-lattices of the 4x4 sensor tile (4
polarizer angles x 4 Bayer sites) as its own channel and gives each one
its own transform. Sub-lattice coordinates are mosaic coordinates
divided by 4.
"""

from __future__ import annotations

import contextlib
import os
from dataclasses import dataclass, field

import numpy as np

from . import align, metrics, mosaic, optics, separate, stokes
from .config import PipelineConfig, format_key_values
from .imagecore import read_raw, write_image
from .layouts import ANGLES, get_layout

TILE = 4


class StageError(Exception):
    """A pipeline stage failed; ``cause`` is the original exception."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


@contextlib.contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def sublattices(plane: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    """``{(row_offset, col_offset): plane[row::4, col::4]}`` for the 16 sites."""
    return {(p, q): plane[p::TILE, q::TILE] for p in range(TILE) for q in range(TILE)}


def _pow2_floor(n: int) -> int:
    return 1 << (n.bit_length() - 1)


def estimate_shift(reference: np.ndarray, moving: np.ndarray) -> tuple[int, int]:
    """Phase-correlation shift on the largest centred power-of-two window."""
    h, w = reference.shape
    ch, cw = _pow2_floor(h), _pow2_floor(w)
    y0, x0 = (h - ch) // 2, (w - cw) // 2
    win = (slice(y0, y0 + ch), slice(x0, x0 + cw))
    return align.phase_correlate(reference[win], moving[win])


def sublattice_transform(t: align.AffineTransform, row: int, col: int) -> align.AffineTransform:
    """Express a mosaic-coordinate transform in one sub-lattice's coordinates."""
    lin = t.matrix[:, :2]
    off = np.array([col, row], dtype=np.float64)
    shift = (lin @ off + t.matrix[:, 2] - off) / TILE
    return align.AffineTransform(np.column_stack([lin, shift]))


@dataclass
class MosaicAlignment:
    aligned: np.ndarray
    transforms: dict = field(default_factory=dict)
    shifts: dict = field(default_factory=dict)

    def consensus_shift(self):
        """Most common per-channel shift (sub-lattice pixels), or None."""
        if not self.shifts:
            return None
        values = sorted(self.shifts.values())
        return max(values, key=values.count)


def align_mosaic(reference: np.ndarray, moving: np.ndarray, correspondences=None) -> MosaicAlignment:
    """Register ``moving`` onto ``reference``, one transform per sub-lattice.

    Both inputs are normalized float mosaics of equal shape. Without
    correspondences each sub-lattice gets an integer translation from
    phase correlation. With correspondences (``sx sy tx ty`` rows in mosaic
    pixels, reference -> moving), one affine is fitted and re-expressed per
    sub-lattice.
    """
    if reference.shape != moving.shape:
        raise ValueError(f"mosaic shapes differ: {reference.shape} vs {moving.shape}")
    ref_planes = sublattices(reference)
    mov_planes = sublattices(moving)
    out = np.empty_like(moving, dtype=np.float64)
    result = MosaicAlignment(out)
    global_t = align.estimate_affine(correspondences) if correspondences is not None else None
    for (p, q), mov in mov_planes.items():
        if global_t is None:
            dx, dy = estimate_shift(ref_planes[(p, q)], mov)
            t = align.AffineTransform.translation(dx, dy)
            result.shifts[(p, q)] = (dx, dy)
        else:
            t = sublattice_transform(global_t, p, q)
        result.transforms[(p, q)] = t
        out[p::TILE, q::TILE] = align.warp(mov, t)
    return result


def _resolve(path: str, base: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base, path)


def _crop(img: np.ndarray, margin: int) -> np.ndarray:
    if margin <= 0:
        return img
    return img[margin:-margin, margin:-margin]


def resolve_p_r(cfg: PipelineConfig) -> float:
    if cfg.p_r.strip().lower() != "auto":
        return float(cfg.p_r)
    iface = optics.InterfaceSpec.from_degrees(cfg.n1, cfg.n2, cfg.theta_deg)
    return float(optics.reflection_dolp(optics.fresnel(iface)))


def write_frame(frame: stokes.PolarFrame, out_dir: str, prefix: str) -> None:
    for angle, img in zip(ANGLES, frame.as_tuple()):
        write_image(img, os.path.join(out_dir, f"{prefix}i{angle}.pfm"), "pfm")


def run_pipeline(cfg: PipelineConfig, base_dir: str = ".") -> dict:
    """Run every stage, write intermediates to ``cfg.out_dir``, return the summary.

    Relative paths in ``cfg`` are taken relative to ``base_dir``.
    """
    out_dir = _resolve(cfg.out_dir, base_dir)
    with stage("input"):
        if not cfg.mixed_raw or not cfg.transmission_raw:
            raise ValueError("config must name mixed_raw and transmission_raw")
        mixed_raw = read_raw(_resolve(cfg.mixed_raw, base_dir))
        trans_raw = read_raw(_resolve(cfg.transmission_raw, base_dir))
        layout = get_layout(cfg.layout_id)
        corr = None
        if cfg.correspondences.strip().lower() != "phase":
            corr = align.read_correspondences(_resolve(cfg.correspondences, base_dir))
        os.makedirs(out_dir, exist_ok=True)

    with stage("align"):
        alignment = align_mosaic(mixed_raw.normalized(), trans_raw.normalized(), corr)
        trans_aligned = np.clip(alignment.aligned, 0.0, None)
        write_image(trans_aligned, os.path.join(out_dir, "transmission_aligned_mosaic.pfm"), "pfm")
        lines = {}
        for (p, q), t in alignment.transforms.items():
            lines[f"site_{p}{q}"] = " ".join(repr(float(v)) for v in t.matrix.ravel())
        with open(os.path.join(out_dir, "transforms.txt"), "w") as fh:
            fh.write(format_key_values(lines))

    with stage("decode"):
        mixed_frame = mosaic.decode_frame(mixed_raw.normalized(), layout)
        trans_frame = mosaic.decode_frame(trans_aligned, layout)
        write_frame(mixed_frame, out_dir, "mixed_")
        write_frame(trans_frame, out_dir, "transmission_")

    with stage("stokes"):
        mixed_s = stokes.compute_stokes(mixed_frame)
        write_image(mixed_s.s0, os.path.join(out_dir, "mixed_s0.pfm"), "pfm")
        write_image(stokes.dolp(mixed_s), os.path.join(out_dir, "mixed_dolp.pfm"), "pfm")
        write_image(stokes.aolp(mixed_s), os.path.join(out_dir, "mixed_aolp.pfm"), "pfm")

    with stage("unpolarized"):
        m_u = stokes.unpolarized(mixed_frame)
        t_u = stokes.unpolarized(trans_frame)
        write_image(m_u, os.path.join(out_dir, "mixed_unpolarized.pfm"), "pfm")
        write_image(t_u, os.path.join(out_dir, "transmission_unpolarized.pfm"), "pfm")

    with stage("separate"):
        edge = separate.search_alpha_edge(
            m_u, t_u, alpha_min=cfg.alpha_min, alpha_max=cfg.alpha_max,
            step=cfg.alpha_step, tol=cfg.alpha_tol, penalty_weight=cfg.penalty_weight,
        )
        if cfg.separation == "edge-search":
            t_hat, r_hat = edge.t_hat, edge.r_hat
        elif cfg.separation == "brewster":
            res = separate.separate_brewster(mixed_s, resolve_p_r(cfg))
            t_hat, r_hat = res.t_hat, res.r_hat
        else:
            raise ValueError(f"unknown separation {cfg.separation!r}; valid: brewster, edge-search")
        write_image(t_hat, os.path.join(out_dir, "t_hat.pfm"), "pfm")
        write_image(r_hat, os.path.join(out_dir, "r_hat.pfm"), "pfm")

    summary: dict = {
        "mixed_raw": cfg.mixed_raw,
        "transmission_raw": cfg.transmission_raw,
        "layout_id": cfg.layout_id,
        "alignment": "phase" if corr is None else "correspondences",
    }
    shift = alignment.consensus_shift()
    if shift is not None:
        agree = sum(s == shift for s in alignment.shifts.values())
        summary.update(
            shift_sublattice_dx=shift[0], shift_sublattice_dy=shift[1],
            shift_scene_dx=2 * shift[0], shift_scene_dy=2 * shift[1],
            shift_mosaic_dx=TILE * shift[0], shift_mosaic_dy=TILE * shift[1],
            shift_agreement=f"{agree}/{len(alignment.shifts)}",
            identity_alignment=all(t.is_identity() for t in alignment.transforms.values()),
        )
    summary.update(
        separation=cfg.separation,
        alpha_t=edge.alpha_t,
        alpha_r=edge.alpha_r,
        objective=edge.objective_value,
        clip_fraction=edge.clip_fraction,
    )

    if cfg.reference_raw:
        with stage("evaluate"):
            ref_raw = read_raw(_resolve(cfg.reference_raw, base_dir))
            ref_u = stokes.unpolarized(mosaic.decode_frame(ref_raw.normalized(), layout))
            margin = cfg.metric_margin
            summary["metric_margin"] = margin
            for name, img in (("final", t_hat), ("aligned", t_u)):
                for key, value in metrics.metric_suite(_crop(img, margin), _crop(ref_u, margin)).items():
                    summary[f"{name}_{key}"] = value

    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(format_key_values(summary))
    return summary

