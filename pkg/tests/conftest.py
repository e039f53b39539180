import sys
import numpy as np
import pytest


def rect_image(rng, h, w, n=8, channels=None, base=0.2):
    """Piecewise-constant image of random axis-aligned rectangles."""
    shape = (h, w) if channels is None else (h, w, channels)
    img = np.full(shape, base)
    for _ in range(n):
        y0, x0 = rng.integers(0, h - 4), rng.integers(0, w - 4)
        hh, ww = rng.integers(3, max(4, h // 3)), rng.integers(3, max(4, w // 3))
        val = rng.uniform(0.3, 1.0) if channels is None else rng.uniform(0.3, 1.0, channels)
        img[y0 : y0 + hh, x0 : x0 + ww] = val
    return img


def blob_image(rng, h, w, n=5, channels=None):
    """Smooth sum of Gaussian blobs scaled to peak 1."""
    yy, xx = np.mgrid[0:h, 0:w]
    img = np.zeros((h, w) if channels is None else (h, w, channels))
    for _ in range(n):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        s = rng.uniform(0.05, 0.15) * min(h, w)
        g = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
        amp = rng.uniform(0.3, 1.0) if channels is None else rng.uniform(0.3, 1.0, channels)
        img += g if channels is None else g[..., None] * amp
    return img / img.max()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_pipeline_fixture(directory, shift=(4, -2), size=64, seed=3):
    """Brewster-angle raw pair whose transmission is moved by ``shift`` scene pixels.

    Writes ``mixed.praw``, ``transmission.praw`` (misaligned, reflection
    free), ``reference.praw`` (aligned, reflection free) and ``run.cfg``.
    Returns the config path.
    """
    from polarsep import optics
    from polarsep.imagecore import write_raw

    rng = np.random.default_rng(seed)
    pad = 16
    big = size + 2 * pad
    canvas = np.zeros((big, big, 3))
    for _ in range(25):
        y0, x0 = rng.integers(0, big - 10, 2)
        h, w = rng.integers(4, 24, 2)
        canvas[y0 : y0 + h, x0 : x0 + w] = rng.uniform(0.1, 0.9, 3)
    canvas = 0.15 + 0.8 * canvas / canvas.max()
    r = blob_image(rng, size, size, n=6, channels=3)
    dx, dy = shift
    t_ref = canvas[pad : pad + size, pad : pad + size]
    t_mov = canvas[pad - dy : pad - dy + size, pad - dx : pad - dx + size]
    iface = optics.InterfaceSpec(1.0, 1.5, optics.brewster_angle(1.0, 1.5))
    zero = np.zeros_like(r)
    scenes = {
        "mixed.praw": optics.SceneSpec(t_ref, r, iface, depolarize_transmission=True),
        "transmission.praw": optics.SceneSpec(t_mov, zero, iface, depolarize_transmission=True),
        "reference.praw": optics.SceneSpec(t_ref, zero, iface, depolarize_transmission=True),
    }
    for name, scene in scenes.items():
        raw, _ = optics.render_mosaic(scene)
        write_raw(raw, directory / name)
    cfg = directory / "run.cfg"
    cfg.write_text(
        "mixed_raw=mixed.praw\n"
        "transmission_raw=transmission.praw\n"
        "reference_raw=reference.praw\n"
        "separation=brewster\n"
        f"theta_deg={float(np.degrees(iface.theta))!r}\n"
        "out_dir=out\n"
    )
    return cfg


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(module.RESULTS):
        terminalreporter.write_line(line)
