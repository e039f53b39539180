import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from polarsep.metrics import (
    LossWeights,
    METRIC_ORDER,
    gaussian_window,
    l1,
    metric_suite,
    padded_fft2,
    phase_loss,
    psnr,
    ssim,
    stage1_loss,
    stage2_loss,
    stage_loss,
    tv_loss,
)


def direct_dft2(x):
    h, w = x.shape
    out = np.zeros((h, w), dtype=complex)
    for u in range(h):
        for v in range(w):
            acc = 0j
            for y in range(h):
                for xx in range(w):
                    acc += x[y, xx] * np.exp(-2j * np.pi * (u * y / h + v * xx / w))
            out[u, v] = acc
    return out


@pytest.mark.parametrize("shape", [(1, 1), (3, 5), (8, 8), (16, 16), (5, 16)])
def test_fft_matches_direct_dft(shape, rng):
    x = rng.random(shape)
    padded = np.zeros(padded_fft2(x).shape)
    padded[: shape[0], : shape[1]] = x
    assert padded.shape == tuple(1 << (n - 1).bit_length() for n in shape)
    np.testing.assert_allclose(padded_fft2(x), direct_dft2(padded), atol=1e-9)


def test_l1_examples(rng):
    a = rng.random((5, 6, 3))
    assert l1(a, a) == 0.0
    assert l1(a, a + 0.1) == pytest.approx(0.1, abs=1e-12)
    b = rng.random((5, 6, 3))
    assert l1(a, b) == pytest.approx(sum(abs(x - y) for x, y in zip(a.ravel(), b.ravel())) / a.size)


def test_geometry_mismatch_raises():
    for f in (l1, tv_loss, phase_loss, psnr, ssim):
        with pytest.raises(ValueError):
            f(np.zeros((12, 12)), np.zeros((12, 13)))


def test_tv_examples(rng):
    a = rng.random((6, 7))
    assert tv_loss(np.full((4, 4), 0.2), np.full((4, 4), 0.9)) == 0.0
    assert tv_loss(a, a) == 0.0
    assert tv_loss(a, a + 0.3) == pytest.approx(0.0, abs=1e-15)


def test_tv_independent(rng):
    a, b = rng.random((5, 4)), rng.random((5, 4))
    diffs = []
    for y in range(4):
        for x in range(3):
            diffs.append(abs((a[y, x + 1] - a[y, x]) - (b[y, x + 1] - b[y, x])))
            diffs.append(abs((a[y + 1, x] - a[y, x]) - (b[y + 1, x] - b[y, x])))
    assert tv_loss(a, b) == pytest.approx(np.mean(diffs), rel=1e-12)


def test_phase_loss_examples(rng):
    a = rng.random((16, 16))
    assert phase_loss(a, a) == 0.0
    assert phase_loss(a, 2 * a) <= 1e-12
    assert phase_loss(a, np.roll(a, 3, axis=1)) > 0.01


def test_phase_loss_hand_fixture():
    # 1-D signal [1, 0]: spectrum [1, 1]; shifted [0, 1]: spectrum [1, -1]
    a = np.array([[1.0, 0.0]])
    b = np.array([[0.0, 1.0]])
    # padded to 1x2: one of two frequencies differs by pi
    assert phase_loss(a, b) == pytest.approx(np.pi / 2)


def test_phase_loss_excludes_null_frequencies():
    a = np.ones((4, 4))  # only the DC term is non-zero
    assert phase_loss(a, 3 * a) == 0.0


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 5), elements=st.floats(0.01, 1)), st.floats(0.01, 100))
def test_phase_loss_scale_invariance(a, c):
    assert phase_loss(a, c * a) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 5), elements=st.floats(0, 1)), arrays(np.float64, (6, 5), elements=st.floats(0, 1)))
def test_symmetry(a, b):
    for f in (l1, tv_loss, phase_loss, psnr):
        assert f(a, b) == pytest.approx(f(b, a), rel=1e-12, abs=1e-12)
    assert 0.0 <= phase_loss(a, b) <= np.pi


def test_psnr_examples(rng):
    a = rng.random((8, 8))
    assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-9)
    assert psnr(a, a) == float("inf")
    b = rng.random((8, 8))
    mse = sum((x - y) ** 2 for x, y in zip(a.ravel(), b.ravel())) / a.size
    assert psnr(a, b) == pytest.approx(10 * np.log10(1 / mse), rel=1e-12)
    assert psnr(a, b, peak=255.0) == pytest.approx(psnr(a, b) + 20 * np.log10(255), rel=1e-12)


def direct_ssim(a, b):
    g = gaussian_window()
    c1, c2 = 0.01**2, 0.03**2
    vals = []
    for y in range(a.shape[0] - 10):
        for x in range(a.shape[1] - 10):
            pa, pb = a[y : y + 11, x : x + 11], b[y : y + 11, x : x + 11]
            ma, mb = (g * pa).sum(), (g * pb).sum()
            va = (g * (pa - ma) ** 2).sum()
            vb = (g * (pb - mb) ** 2).sum()
            cov = (g * (pa - ma) * (pb - mb)).sum()
            vals.append((2 * ma * mb + c1) * (2 * cov + c2) / ((ma**2 + mb**2 + c1) * (va + vb + c2)))
    return float(np.mean(vals))


def test_ssim_examples(rng):
    a = rng.random((16, 16))
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ssim(np.zeros((12, 12)), np.ones((12, 12))) < 0.01
    b = rng.random((16, 16))
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)
    assert ssim(a, b) == pytest.approx(direct_ssim(a, b), abs=1e-10)


def test_ssim_rgb_averages_channels(rng):
    a, b = rng.random((12, 14, 3)), rng.random((12, 14, 3))
    assert ssim(a, b) == pytest.approx(np.mean([ssim(a[..., c], b[..., c]) for c in range(3)]))


def test_ssim_too_small():
    with pytest.raises(ValueError):
        ssim(np.zeros((10, 20)), np.zeros((10, 20)))


def test_ssim_against_skimage(rng):
    metrics = pytest.importorskip("skimage.metrics")
    a = rng.random((32, 40))
    b = np.clip(a + rng.normal(0, 0.1, a.shape), 0, 1)
    ref = metrics.structural_similarity(
        a, b, data_range=1.0, gaussian_weights=True, sigma=1.5, use_sample_covariance=False
    )
    assert ssim(a, b) == pytest.approx(ref, abs=1e-9)


def test_stage_loss_examples(rng):
    a, b = rng.random((8, 8)), rng.random((8, 8))
    zero = LossWeights(0, 0, 0, 0, 0, 0)
    assert stage1_loss(a, b, zero)[0] == 0.0
    assert stage1_loss(a, b, LossWeights(1, 0, 0, 0, 0, 0))[0] == pytest.approx(l1(a, b))
    total, parts = stage1_loss(a, b, LossWeights(1, 0, 0, 2, 0, 0))
    assert total == pytest.approx(l1(a, b) + 2 * phase_loss(a, b), rel=1e-12)
    assert set(parts) == {"l1", "perceptual", "tv", "phase"}


def test_perceptual_callback(rng):
    a, b = rng.random((8, 8)), rng.random((8, 8))
    w = LossWeights(0, 3, 0, 0, 0, 0)
    assert stage1_loss(a, b, w)[0] == 0.0
    assert stage1_loss(a, b, w, perceptual=lambda x, y: 0.5)[0] == pytest.approx(1.5)


def test_stage2_loss(rng):
    a, b = rng.random((8, 8)), rng.random((8, 8))
    w = LossWeights()
    recon = stage1_loss(a, b, w)[0]
    total, parts = stage2_loss(0.4, a, b, w)
    assert total == pytest.approx(w.gamma5 * 0.4 + w.gamma6 * recon)
    assert set(parts) == {"diff", "recon"}


def test_stage_loss_validation():
    with pytest.raises(ValueError):
        stage_loss({"vgg": 1.0})
    with pytest.raises(ValueError):
        LossWeights(gamma1=-1)
    with pytest.raises(ValueError):
        LossWeights(gamma3=float("nan"))


def test_metric_suite_order(rng):
    a = rng.random((12, 12))
    out = metric_suite(a, a)
    assert tuple(out) == METRIC_ORDER
    assert out["psnr"] == float("inf") and out["ssim"] == pytest.approx(1.0)
    assert "ssim" not in metric_suite(a[:8, :8], a[:8, :8])
