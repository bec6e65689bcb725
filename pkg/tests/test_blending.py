import numpy as np
import pytest

from mbshell.blending import blending_corner, blending_univariate, bspline3

RNG = np.random.default_rng(11)


@pytest.mark.parametrize("kind", ["polynomial", "rational"])
def test_endpoint_and_midpoint_values(kind):
    val, _, _ = blending_univariate(np.array([0.0, 0.5, 1.0]), kind)
    assert val[0] == pytest.approx([1.0, 0.0], abs=1e-14)
    assert val[1] == pytest.approx([0.5, 0.5], abs=1e-14)
    assert val[2] == pytest.approx([0.0, 1.0], abs=1e-14)


@pytest.mark.parametrize("kind", ["polynomial", "rational"])
def test_partition_of_unity(kind):
    t = RNG.random(200)
    val, d1, d2 = blending_univariate(t, kind)
    assert np.max(np.abs(val.sum(axis=-1) - 1.0)) < 1e-14
    assert np.max(np.abs(d1.sum(axis=-1))) < 1e-13
    assert np.max(np.abs(d2.sum(axis=-1))) < 1e-12


@pytest.mark.parametrize("kind", ["polynomial", "rational"])
def test_vanishes_to_second_order_at_far_end(kind):
    val, d1, d2 = blending_univariate(np.array([1.0]), kind)
    assert val[0, 0] == pytest.approx(0.0, abs=1e-14)
    assert d1[0, 0] == pytest.approx(0.0, abs=1e-13)
    assert d2[0, 0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["polynomial", "rational"])
def test_derivatives_match_finite_differences(kind):
    t = 0.02 + 0.96 * RNG.random(50)
    h = 1e-6
    val, d1, d2 = blending_univariate(t, kind)
    vp, dp, _ = blending_univariate(t + h, kind)
    vm, dm, _ = blending_univariate(t - h, kind)
    assert np.max(np.abs((vp - vm) / (2 * h) - d1)) < 1e-8
    assert np.max(np.abs((dp - dm) / (2 * h) - d2)) < 1e-7


def test_bspline_cardinal_values():
    v, _, _ = bspline3(np.array([0.0, 1.0, -1.0, 2.0, -2.0]))
    assert v == pytest.approx([2 / 3, 1 / 6, 1 / 6, 0.0, 0.0], abs=1e-15)


@pytest.mark.parametrize("kind", ["polynomial", "rational"])
def test_corner_weights_sum_to_one(kind):
    eta = RNG.random((50, 2))
    total = np.zeros(50)
    for j in (1, 2, 3, 4):
        w, _, _ = blending_corner(eta, j, kind)
        total += w
    assert np.max(np.abs(total - 1.0)) < 1e-13


def test_corner_weight_peak_and_vanishing():
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    for j in (1, 2, 3, 4):
        w, dw, d2w = blending_corner(corners, j)
        assert w[j - 1] == pytest.approx(1.0, abs=1e-14)
        opposite = (j + 1) % 4
        assert w[opposite] == pytest.approx(0.0, abs=1e-14)
        assert np.max(np.abs(dw[opposite])) < 1e-13
        assert np.max(np.abs(d2w[opposite])) < 1e-12
