"""Command line entry point.

Exit codes: 0 success, 2 usage or format error, 3 I/O error, 4 numerical
domain error. Failures print a single ``polarsep: ...`` line to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import align, diffusion, metrics, mosaic, optics, separate, stokes
from .config import PipelineConfig, format_key_values
from .errors import DomainError
from .imagecore import read_image, read_raw, write_image, write_raw
from .layouts import ANGLES, get_layout
from .pipeline import StageError, estimate_shift, resolve_p_r, run_pipeline, write_frame

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DOMAIN = 0, 2, 3, 4
METHODS = ("brewster", "edge-search")


class UsageError(ValueError):
    pass


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, DomainError):
        return EXIT_DOMAIN
    if isinstance(exc, ValueError):
        return EXIT_USAGE
    if isinstance(exc, OSError):
        return EXIT_IO
    return 1


def load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    return cfg


def _say(args, text: str) -> None:
    if not args.quiet:
        sys.stdout.write(text)


def _write_report(path: str, items: dict) -> str:
    text = format_key_values(items)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


# ---------------------------------------------------------------- subcommands


def cmd_decode(args, cfg: PipelineConfig) -> int:
    raw = read_raw(args.raw)
    layout_id = raw.layout_id if args.layout is None else args.layout
    layout = get_layout(layout_id)
    frame = mosaic.decode_frame(raw, layout)
    s = stokes.compute_stokes(frame)
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    write_frame(frame, out, "")
    write_image(s.s0, os.path.join(out, "s0.pfm"), "pfm")
    write_image(stokes.dolp(s), os.path.join(out, "dolp.pfm"), "pfm")
    write_image(stokes.aolp(s), os.path.join(out, "aolp.pfm"), "pfm")
    write_image(stokes.unpolarized(frame), os.path.join(out, "unpolarized.pfm"), "pfm")
    report = {
        "source": os.path.basename(args.raw),
        "mosaic_width": raw.width,
        "mosaic_height": raw.height,
        "layout_id": layout_id,
        "degenerate_fraction": float(stokes.degenerate_mask(s).mean()),
    }
    _say(args, _write_report(os.path.join(out, "decode.txt"), report))
    return EXIT_OK


def cmd_simulate(args, cfg: PipelineConfig) -> int:
    t = read_image(args.transmission)
    if args.no_reflection:
        r = np.zeros_like(t)
    elif args.reflection:
        r = read_image(args.reflection)
    else:
        raise UsageError("a reflection image is required unless --no-reflection is given")
    iface = optics.InterfaceSpec.from_degrees(cfg.n1, cfg.n2, cfg.theta_deg)
    phi = float(np.deg2rad(cfg.phi_perp_deg))
    scene = optics.SceneSpec(t, r, iface, phi, cfg.dolp_t_extra, cfg.depolarize_transmission)
    trans_only = optics.SceneSpec(t, np.zeros_like(t), iface, phi, cfg.dolp_t_extra,
                                  cfg.depolarize_transmission)
    syn = optics.synthesize(scene)
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    write_frame(syn.frame, out, "mixed_")
    write_image(syn.mixed.s0, os.path.join(out, "mixed_unpolarized.pfm"), "pfm")
    write_image(syn.transmission_stokes.s0, os.path.join(out, "t_component.pfm"), "pfm")
    write_image(syn.reflection_stokes.s0, os.path.join(out, "r_component.pfm"), "pfm")
    raw, clipped = optics.mosaic_from_frame(syn.frame, cfg.layout_id)
    write_raw(raw, os.path.join(out, "mixed.praw"))
    raw_t, clipped_t = optics.render_mosaic(trans_only, cfg.layout_id)
    write_raw(raw_t, os.path.join(out, "transmission.praw"))
    c = syn.coefficients
    truth = {
        "n1": cfg.n1,
        "n2": cfg.n2,
        "theta_deg": cfg.theta_deg,
        "brewster_deg": float(np.rad2deg(optics.brewster_angle(cfg.n1, cfg.n2))),
        "phi_perp_deg": cfg.phi_perp_deg,
        "R_s": float(c.r_s),
        "R_p": float(c.r_p),
        "T_s": float(c.t_s),
        "T_p": float(c.t_p),
        "alpha_t": syn.alpha_t,
        "alpha_r": syn.alpha_r,
        "dolp_reflection": syn.dolp_r,
        "dolp_transmission": syn.dolp_t,
        "reflection": "none" if args.no_reflection else "image",
        "layout_id": cfg.layout_id,
        "clipped_mixed": clipped,
        "clipped_transmission": clipped_t,
    }
    _say(args, _write_report(os.path.join(out, "ground_truth.txt"), truth))
    return EXIT_OK


def _frame_paths(inputs: list[str]) -> list[str]:
    if len(inputs) == 4:
        return inputs
    if len(inputs) == 1 and os.path.isdir(inputs[0]):
        for prefix in ("", "mixed_"):
            paths = [os.path.join(inputs[0], f"{prefix}i{a}.pfm") for a in ANGLES]
            if all(os.path.exists(p) for p in paths):
                return paths
        raise UsageError(f"{inputs[0]}: no i0/i45/i90/i135 PFM files found")
    raise UsageError("brewster needs four angle images (0 45 90 135) or one directory")


def cmd_separate(args, cfg: PipelineConfig) -> int:
    if args.method == "brewster":
        frame = stokes.PolarFrame(*(read_image(p) for p in _frame_paths(args.inputs)))
        p_r = resolve_p_r(cfg)
        res = separate.separate_brewster(stokes.compute_stokes(frame), p_r)
    else:
        if len(args.inputs) != 2:
            raise UsageError("edge-search needs two inputs: MIXED TRANSMISSION")
        m, t = (read_image(p) for p in args.inputs)
        res = separate.search_alpha_edge(
            m, t, alpha_min=cfg.alpha_min, alpha_max=cfg.alpha_max, step=cfg.alpha_step,
            tol=cfg.alpha_tol, penalty_weight=cfg.penalty_weight,
        )
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    write_image(res.t_hat, os.path.join(out, "t_hat.pfm"), "pfm")
    write_image(res.r_hat, os.path.join(out, "r_hat.pfm"), "pfm")
    report = {
        "method": args.method,
        "alpha_t": res.alpha_t,
        "alpha_r": res.alpha_r,
        "objective": res.objective_value,
        "clip_fraction": res.clip_fraction,
    }
    if args.method == "brewster":
        report["p_r"] = p_r
    if args.reference:
        ref = read_image(args.reference)
        for key, value in metrics.metric_suite(res.t_hat, ref).items():
            report[key] = value
    _say(args, _write_report(os.path.join(out, "separation.txt"), report))
    return EXIT_OK


def cmd_align(args, cfg: PipelineConfig) -> int:
    ref = read_image(args.reference)
    mov = read_image(args.moving)
    if ref.shape != mov.shape:
        raise UsageError(f"shape mismatch: {ref.shape} vs {mov.shape}")
    nch = 1 if ref.ndim == 2 else ref.shape[2]
    ref_p = [ref] if nch == 1 else [ref[:, :, c] for c in range(nch)]
    mov_p = [mov] if nch == 1 else [mov[:, :, c] for c in range(nch)]
    if args.correspondences:
        t = align.estimate_affine(align.read_correspondences(args.correspondences))
        transforms = [t] * nch
    else:
        transforms = [align.AffineTransform.translation(*estimate_shift(r, m))
                      for r, m in zip(ref_p, mov_p)]
    warped = align.warp(mov, transforms if nch > 1 else transforms[0])
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    write_image(warped, os.path.join(out, "aligned.pfm"), "pfm")
    report = {f"channel_{c}": " ".join(repr(float(v)) for v in t.matrix.ravel())
              for c, t in enumerate(transforms)}
    _say(args, _write_report(os.path.join(out, "transforms.txt"), report))
    return EXIT_OK


def cmd_metrics(args, cfg: PipelineConfig) -> int:
    a = read_image(args.a)
    b = read_image(args.b)
    weights = metrics.LossWeights(cfg.gamma1, cfg.gamma2, cfg.gamma3, cfg.gamma4, cfg.gamma5, cfg.gamma6)
    values = metrics.metric_suite(a, b)
    values["stage1_loss"], _ = metrics.stage1_loss(a, b, weights)
    text = format_key_values(values)
    sys.stdout.write(text)
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "metrics.txt"), "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_diffuse(args, cfg: PipelineConfig) -> int:
    sched = diffusion.make_schedule(cfg.T_steps, cfg.beta_start, cfg.beta_end, cfg.variance)
    shape = tuple(int(v) for v in args.shape.split("x"))
    target = np.random.default_rng([cfg.seed, 1]).standard_normal(shape)
    den = diffusion.oracle_denoiser(target, sched) if args.denoiser == "oracle" else diffusion.zero_denoiser
    trace: list = []
    z0 = diffusion.generate(den, None, sched, cfg.seed, shape, stochastic=not args.deterministic,
                            trace=trace)
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "trajectory.txt"), "w", encoding="utf-8") as fh:
        fh.write("# t alpha_bar mean std\n")
        for t, z in trace:
            fh.write(f"{t} {sched.alpha_bar[t]!r} {float(z.mean())!r} {float(z.std())!r}\n")
    summary = {
        "T_steps": sched.T_steps,
        "beta_start": cfg.beta_start,
        "beta_end": cfg.beta_end,
        "variance": cfg.variance,
        "alpha_bar_T": float(sched.alpha_bar[-1]),
        "seed": cfg.seed,
        "denoiser": args.denoiser,
        "stochastic": not args.deterministic,
        "final_mean": float(z0.mean()),
        "final_std": float(z0.std()),
    }
    if args.denoiser == "oracle":
        summary["recovery_rel_error"] = float(np.linalg.norm(z0 - target) / np.linalg.norm(target))
    _say(args, _write_report(os.path.join(out, "diffusion.txt"), summary))
    return EXIT_OK


def cmd_pipeline(args, cfg: PipelineConfig) -> int:
    base = os.path.dirname(os.path.abspath(args.config))
    if args.out is not None:
        cfg.out_dir = os.path.abspath(args.out)
    summary = run_pipeline(cfg, base)
    _say(args, format_key_values(summary))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key=value config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress report output on stdout")

    parser = argparse.ArgumentParser(
        prog="polarsep",
        description="Polarization-based reflection separation toolkit.",
    )
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--quiet", action="store_true", help="suppress report output on stdout")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("decode", parents=[common], help="decode a PRAW mosaic into angle images and Stokes maps")
    p.add_argument("raw", help="PRAW file")
    p.add_argument("--layout", type=int, default=None, help="override the header layout_id")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", parents=[common], help="synthesize a labelled mixture through glass")
    p.add_argument("transmission", help="transmission radiance image")
    p.add_argument("reflection", nargs="?", help="reflection radiance image")
    p.add_argument("--no-reflection", action="store_true", help="use an all-zero reflection")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("separate", parents=[common], help="separate transmission and reflection")
    p.add_argument("method", choices=METHODS, help="separation method")
    p.add_argument("inputs", nargs="+", help="brewster: four angle images or a directory; "
                                              "edge-search: MIXED TRANSMISSION")
    p.add_argument("--reference", help="ground-truth transmission for scoring")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("align", parents=[common], help="register MOVING onto REFERENCE")
    p.add_argument("reference")
    p.add_argument("moving")
    p.add_argument("--correspondences", help="file of 'sx sy tx ty' lines (reference -> moving)")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("metrics", parents=[common], help="compare two images")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("diffuse", parents=[common], help="run the DDPM sampler and report trajectory statistics")
    p.add_argument("--shape", default="8x8", help="latent shape, e.g. 4x16x16")
    p.add_argument("--denoiser", choices=("oracle", "zero"), default="oracle")
    p.add_argument("--deterministic", action="store_true", help="drop the per-step noise")
    p.set_defaults(func=cmd_diffuse)

    p = sub.add_parser("pipeline", parents=[common], help="align, decode, separate a raw pair")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for bad usage
        return int(exc.code or 0)
    try:
        if args.command == "pipeline" and not args.config:
            raise UsageError("pipeline requires --config")
        cfg = load_config(args)
        return args.func(args, cfg)
    except Exception as exc:
        code = exit_code_for(exc)
        if code == 1:
            raise
        msg = " ".join(str(exc).split())
        sys.stderr.write(f"polarsep: {args.command}: {msg}\n")
        return code


if __name__ == "__main__":
    sys.exit(main())
