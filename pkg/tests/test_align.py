import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarsep.align import (
    AffineTransform,
    estimate_affine,
    phase_correlate,
    read_correspondences,
    warp,
)
from polarsep.errors import FormatError, RankError


def textured(rng, n=32):
    return rng.random((n, n))


def test_phase_correlate_identity(rng):
    a = textured(rng)
    assert phase_correlate(a, a.copy()) == (0, 0)


def test_phase_correlate_circular_shift(rng):
    a = textured(rng)
    b = np.roll(a, (-2, 3), axis=(0, 1))
    assert phase_correlate(a, b) == (3, -2)


def test_phase_correlate_with_noise(rng):
    a = textured(rng, 64)
    b = np.roll(a, (-2, 3), axis=(0, 1)) + rng.normal(0, 0.01, a.shape)
    assert phase_correlate(a, b) == (3, -2)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([8, 16, 32]), st.data())
def test_phase_correlate_exact_within_quarter(n, data):
    q = n // 4
    dx = data.draw(st.integers(-q, q))
    dy = data.draw(st.integers(-q, q))
    a = np.random.default_rng(n).random((n, n))
    assert phase_correlate(a, np.roll(a, (dy, dx), axis=(0, 1))) == (dx, dy)


def test_phase_correlate_tie_breaks_to_smallest_shift():
    # constant images carry no shift information: every lag ties
    a = np.ones((8, 8))
    assert phase_correlate(a, a) == (0, 0)


@pytest.mark.parametrize("shape_a, shape_b", [((12, 16), (12, 16)), ((4, 4), (4, 4)), ((8, 8), (16, 16))])
def test_phase_correlate_bad_sizes(shape_a, shape_b):
    with pytest.raises(ValueError):
        phase_correlate(np.zeros(shape_a), np.zeros(shape_b))


def test_estimate_identity():
    pts = np.array([[0, 0], [10, 0], [0, 10], [7, 3]], float)
    t = estimate_affine(np.hstack([pts, pts]))
    np.testing.assert_allclose(t.matrix, np.eye(2, 3), atol=1e-12)


def test_estimate_translation():
    pts = np.array([[0, 0], [10, 0], [0, 10]], float)
    t = estimate_affine(np.hstack([pts, pts + [5, 7]]))
    np.testing.assert_allclose(t.matrix, [[1, 0, 5], [0, 1, 7]], atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_estimate_recovers_random_affine(seed):
    rng = np.random.default_rng(seed)
    lin = np.eye(2) + rng.uniform(-0.3, 0.3, (2, 2))
    true = np.column_stack([lin, rng.uniform(-20, 20, 2)])
    ys, xs = np.mgrid[0:64:8, 0:64:8]
    src = np.column_stack([xs.ravel(), ys.ravel()]).astype(float)
    dst = AffineTransform(true).apply(src)
    fit = estimate_affine(np.hstack([src, dst]))
    np.testing.assert_allclose(fit.matrix, true, atol=1e-9)


def test_estimate_rank_errors():
    with pytest.raises(RankError):
        estimate_affine([[0, 0, 0, 0], [1, 1, 1, 1]])
    with pytest.raises(RankError):
        estimate_affine([[0, 0, 1, 1], [1, 1, 2, 2], [2, 2, 3, 3], [3, 3, 4, 4]])


def test_singular_transform_rejected():
    with pytest.raises(RankError):
        AffineTransform([[1, 2, 0], [2, 4, 0]])


def test_inverse_and_composition(rng):
    t = AffineTransform([[1.1, 0.2, 3.0], [-0.1, 0.9, -2.0]])
    pts = rng.uniform(-50, 50, (10, 2))
    np.testing.assert_allclose(t.inverse().apply(t.apply(pts)), pts, atol=1e-12)
    np.testing.assert_allclose((t @ t.inverse()).matrix, np.eye(2, 3), atol=1e-12)


def test_warp_identity_exact(rng):
    img = rng.random((9, 7, 3))
    np.testing.assert_array_equal(warp(img, AffineTransform.identity()), img)


def test_warp_constant_translation():
    img = np.full((10, 10), 0.3)
    np.testing.assert_allclose(warp(img, AffineTransform.translation(3, -2)), img, atol=1e-15)


def test_warp_integer_translation_interior(rng):
    img = rng.random((12, 12))
    out = warp(img, AffineTransform.translation(2, 1))
    # output(x, y) samples source(x + 2, y + 1)
    np.testing.assert_allclose(out[:-1, :-2], img[1:, 2:], atol=1e-12)


def test_warp_reflect_padding():
    img = np.arange(5, dtype=float)[None, :].repeat(3, axis=0)
    out = warp(img, AffineTransform.translation(2, 0))
    np.testing.assert_allclose(out[0], [2, 3, 4, 3, 2])


def test_warp_round_trip_smooth():
    ys, xs = np.mgrid[0:64, 0:64].astype(float)
    img = 0.5 + 0.25 * np.sin(2 * np.pi * xs / 64) * np.cos(2 * np.pi * ys / 80)
    a = AffineTransform([[np.cos(0.05), -np.sin(0.05), 1.5], [np.sin(0.05), np.cos(0.05), -0.7]])
    back = warp(warp(img, a), a.inverse())
    err = (back - img)[8:-8, 8:-8]
    assert np.sqrt(np.mean(err**2)) <= 1e-3


def test_warp_per_channel(rng):
    img = rng.random((8, 8, 3))
    ts = [AffineTransform.identity(), AffineTransform.translation(1, 0), AffineTransform.translation(0, 1)]
    out = warp(img, ts)
    np.testing.assert_array_equal(out[:, :, 0], img[:, :, 0])
    np.testing.assert_allclose(out[:, :-1, 1], img[:, 1:, 1], atol=1e-12)
    np.testing.assert_allclose(out[:-1, :, 2], img[1:, :, 2], atol=1e-12)
    with pytest.raises(ValueError):
        warp(img, ts[:2])


def test_read_correspondences(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# header\n0 0 1 1\n10 0 11 1  # trailing\n\n0 10 1 11\n")
    arr = read_correspondences(p)
    assert arr.shape == (3, 4)
    np.testing.assert_allclose(estimate_affine(arr).matrix, [[1, 0, 1], [0, 1, 1]], atol=1e-12)
    (tmp_path / "bad.txt").write_text("1 2 3\n")
    with pytest.raises(FormatError):
        read_correspondences(tmp_path / "bad.txt")
