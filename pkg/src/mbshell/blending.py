"""Partition-of-unity blending functions built from cubic B-spline pieces.

The univariate weight toward the chart centre is a combination of cubic
B-splines on a knot grid of spacing 1/4,

    w1(t) = B(4t + 1) + B(4t) + B(4t - 1) + B(4t - 2) / 2,

with B the cardinal cubic B-spline supported on [-2, 2].  It satisfies
w1(0) = 1, w1(1) = 0 with two vanishing derivatives at t = 1, and
w1(t) + w1(1 - t) = 1.  The rational alternative normalizes two cubic
B-splines at knot spacing 1/2: w1 = B(2t) / (B(2t) + B(2t - 2)).
"""

import numpy as np


def bspline3(t):
    """Cardinal cubic B-spline on [-2, 2] with first and second derivatives."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    sg = np.sign(t)
    val = np.zeros_like(a)
    d1 = np.zeros_like(a)
    d2 = np.zeros_like(a)
    inner = a < 1.0
    outer = (a >= 1.0) & (a < 2.0)
    ai, si = a[inner], sg[inner]
    val[inner] = (4.0 - 6.0 * ai ** 2 + 3.0 * ai ** 3) / 6.0
    d1[inner] = si * (-12.0 * ai + 9.0 * ai ** 2) / 6.0
    d2[inner] = (-12.0 + 18.0 * ai) / 6.0
    ao, so = a[outer], sg[outer]
    val[outer] = (2.0 - ao) ** 3 / 6.0
    d1[outer] = -so * (2.0 - ao) ** 2 / 2.0
    d2[outer] = 2.0 - ao
    return val, d1, d2


def blending_univariate(t, kind="polynomial"):
    """Weights (w1, w2) toward t=0 / t=1 with derivatives up to order 2.

    Returns three arrays of shape t.shape + (2,): values, first and second
    derivatives of (w1, w2).
    """
    t = np.asarray(t, dtype=float)
    if kind == "polynomial":
        v = np.zeros_like(t)
        d1 = np.zeros_like(t)
        d2 = np.zeros_like(t)
        for shift, fac in ((1.0, 1.0), (0.0, 1.0), (-1.0, 1.0), (-2.0, 0.5)):
            b, b1, b2 = bspline3(4.0 * t + shift)
            v += fac * b
            d1 += fac * 4.0 * b1
            d2 += fac * 16.0 * b2
    elif kind == "rational":
        f, f1, f2 = bspline3(2.0 * t)
        g, g1, g2 = bspline3(2.0 * t - 2.0)
        f1, f2 = 2.0 * f1, 4.0 * f2
        g1, g2 = 2.0 * g1, 4.0 * g2
        s = f + g
        s1 = f1 + g1
        s2 = f2 + g2
        v = f / s
        d1 = (f1 * s - f * s1) / s ** 2
        d2 = (f2 - 2.0 * d1 * s1 - v * s2) / s
    else:
        raise ValueError("unknown blending kind %r" % kind)
    val = np.stack([v, 1.0 - v], axis=-1)
    der1 = np.stack([d1, -d1], axis=-1)
    der2 = np.stack([d2, -d2], axis=-1)
    return val, der1, der2


def blending_corner(eta, j, kind="polynomial"):
    """Tensor-product blending weight of the chart at corner j of the element.

    eta: (n, 2) reference points.  Returns (w, dw, d2w) with dw of shape
    (n, 2) and d2w of shape (n, 2, 2), derivatives w.r.t. eta.
    """
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    # univariate factor index per axis: 0 peaks at coordinate 0, 1 at 1
    sel = ((0, 0), (1, 0), (1, 1), (0, 1))[j - 1]
    v0, d0, dd0 = blending_univariate(eta[:, 0], kind)
    v1, d1, dd1 = blending_univariate(eta[:, 1], kind)
    a, b = sel
    w = v0[:, a] * v1[:, b]
    dw = np.stack([d0[:, a] * v1[:, b], v0[:, a] * d1[:, b]], axis=-1)
    d2w = np.empty(eta.shape[:1] + (2, 2))
    d2w[:, 0, 0] = dd0[:, a] * v1[:, b]
    d2w[:, 1, 1] = v0[:, a] * dd1[:, b]
    d2w[:, 0, 1] = d2w[:, 1, 0] = d0[:, a] * d1[:, b]
    return w, dw, d2w
