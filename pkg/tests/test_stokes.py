import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarsep.stokes import (
    CANONICAL_ANGLES,
    PolarFrame,
    StokesMap,
    aolp,
    compute_stokes,
    dolp,
    frame_from_stokes,
    intensity_at,
    unpolarized,
)



def frame_of(i0, i45, i90, i135):
    return PolarFrame(*(np.full((1, 1), v) for v in (i0, i45, i90, i135)))


def stokes_of(s0, s1, s2):
    return StokesMap(*(np.full((1, 1), v, dtype=float) for v in (s0, s1, s2)))


@pytest.mark.parametrize(
    "intensities, expected",
    [
        ((1, 0.5, 0, 0.5), (1, 1, 0)),
        ((0.3, 0.3, 0.3, 0.3), (0.6, 0, 0)),
        ((0.5, 1, 0.5, 0), (1, 0, 1)),
    ],
)
def test_compute_stokes_examples(intensities, expected):
    s = compute_stokes(frame_of(*intensities))
    np.testing.assert_allclose([s.s0[0, 0], s.s1[0, 0], s.s2[0, 0]], expected, atol=1e-15)


@pytest.mark.parametrize("s, expected", [((1, 1, 0), 1.0), ((0.6, 0, 0), 0.0), ((1, 0.6, 0.8), 1.0)])
def test_dolp_examples(s, expected):
    assert dolp(stokes_of(*s))[0, 0] == pytest.approx(expected, abs=1e-15)


def test_dolp_zero_intensity_is_zero():
    assert dolp(stokes_of(0.0, 0.0, 0.0))[0, 0] == 0.0
    assert dolp(stokes_of(1e-10, 1e-10, 0.0))[0, 0] == 0.0


@pytest.mark.parametrize("s, expected", [((1, 1, 0), 0.0), ((1, 0, 1), np.pi / 4), ((1, -1, 0), np.pi / 2)])
def test_aolp_examples(s, expected):
    assert aolp(stokes_of(*s))[0, 0] == pytest.approx(expected, abs=1e-15)


def test_aolp_negative_zero_maps_to_half_pi():
    s = StokesMap(np.ones((1, 1)), -np.ones((1, 1)), np.full((1, 1), -0.0))
    assert aolp(s)[0, 0] == pytest.approx(np.pi / 2)


def test_aolp_degenerate_mask():
    s = StokesMap(np.ones((1, 2)), np.array([[0.0, 1.0]]), np.array([[0.0, 0.0]]))
    angle, mask = aolp(s, return_mask=True)
    assert angle[0, 0] == 0.0
    np.testing.assert_array_equal(mask, [[True, False]])


def test_unpolarized_examples():
    assert unpolarized(frame_of(0.2, 0.2, 0.2, 0.2))[0, 0] == pytest.approx(0.4)
    assert unpolarized(frame_of(1, 0.5, 0, 0.5))[0, 0] == 1.0


def test_intensity_at_examples():
    s = stokes_of(1, 1, 0)
    assert intensity_at(s, 0.0)[0, 0] == 1.0
    assert intensity_at(s, np.pi / 2)[0, 0] == pytest.approx(0.0, abs=1e-15)
    assert intensity_at(s, np.pi / 4)[0, 0] == pytest.approx(0.5, abs=1e-15)


def test_intensity_at_rejects_unrealizable():
    with pytest.raises(ValueError):
        intensity_at(stokes_of(1, 3, 0), np.pi / 2)


def test_frame_validation():
    with pytest.raises(ValueError):
        PolarFrame(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        PolarFrame(*(np.full((2, 2), -1.0),) * 4)


def test_rgb_channels_independent(rng):
    i = [rng.random((3, 4, 3)) for _ in range(4)]
    s = compute_stokes(PolarFrame(*i))
    for c in range(3):
        sc = compute_stokes(PolarFrame(*(x[:, :, c] for x in i)))
        np.testing.assert_array_equal(s.s1[:, :, c], sc.s1)


realizable = st.tuples(
    st.floats(0.0, 10.0), st.floats(0.0, 1.0), st.floats(-np.pi, np.pi)
).map(lambda v: (v[0], v[0] * v[1] * np.cos(v[2]), v[0] * v[1] * np.sin(v[2])))


@settings(max_examples=200, deadline=None)
@given(realizable)
def test_round_trip_property(s):
    sm = stokes_of(*s)
    back = compute_stokes(frame_from_stokes(sm))
    for a, b in ((back.s0, sm.s0), (back.s1, sm.s1), (back.s2, sm.s2)):
        assert abs(a[0, 0] - b[0, 0]) <= 1e-12 * max(1.0, s[0])


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(-np.pi / 2, np.pi / 2), st.floats(-2 * np.pi, 2 * np.pi))
def test_malus_property(i0, phi0, phi):
    s = stokes_of(i0, i0 * np.cos(2 * phi0), i0 * np.sin(2 * phi0))
    assert intensity_at(s, phi)[0, 0] == pytest.approx(i0 * np.cos(phi - phi0) ** 2, abs=1e-12 * max(1, i0))


@settings(max_examples=200, deadline=None)
@given(realizable, st.floats(0.01, 100.0))
def test_dolp_aolp_ranges_and_scale_invariance(s, k):
    sm = stokes_of(*s)
    d = dolp(sm)[0, 0]
    a = aolp(sm)[0, 0]
    assert 0.0 <= d <= 1.0
    assert -np.pi / 2 < a <= np.pi / 2
    scaled = stokes_of(s[0], k * s[1], k * s[2])
    assert aolp(scaled)[0, 0] == pytest.approx(a, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(realizable)
def test_orthogonal_pairs_sum_to_s0(s):
    f = frame_from_stokes(stokes_of(*s))
    tol = 1e-12 * max(1.0, s[0])
    assert abs(f.i0 + f.i90 - s[0])[0, 0] <= tol
    assert abs(f.i45 + f.i135 - s[0])[0, 0] <= tol


def test_canonical_angles():
    np.testing.assert_allclose(np.degrees(CANONICAL_ANGLES), [0, 45, 90, 135])
