"""Checks of the closed-form reference solutions."""

import numpy as np
import pytest

from mbshell import oracles

L, Q, E, T = 10.0, 1.0, 1.0e7, 0.1


def test_beam_spot_values():
    # classical midspan deflections of the propped cantilever strip
    assert oracles.beam_midspan(L, Q, E, T) == pytest.approx(
        Q * L ** 4 / (16.0 * E * T ** 3), rel=1e-14)
    assert oracles.beam_midspan(L, Q, E, T, hinged=True) == pytest.approx(
        7.0 * Q * L ** 4 / (32.0 * E * T ** 3), rel=1e-14)
    x = np.array([L / 2.0])
    assert oracles.beam_deflection(x, L, Q, E, T)[0] == pytest.approx(
        oracles.beam_midspan(L, Q, E, T), rel=1e-14)
    assert oracles.beam_deflection(x, L, Q, E, T, hinged=True)[0] == \
        pytest.approx(oracles.beam_midspan(L, Q, E, T, hinged=True),
                      rel=1e-14)


def test_beam_boundary_conditions():
    x = np.array([0.0, L])
    for hinged in (False, True):
        w, d1, d2 = oracles.beam_deflection(x, L, Q, E, T, hinged=hinged,
                                            order=2)
        scale = oracles.beam_midspan(L, Q, E, T, hinged=hinged)
        assert abs(w[0]) < 1e-14 * scale            # clamped end
        assert abs(d1[0]) < 1e-14 * scale / L       # clamped slope
        assert abs(w[1]) < 1e-14 * scale            # supported end
        assert abs(d2[1]) < 1e-12 * scale / L ** 2  # moment-free end


def test_beam_hinge_kinematics():
    eps = 1e-9
    xl = np.array([L / 2.0 - eps])
    xr = np.array([L / 2.0 + eps])
    wl, _, d2l = oracles.beam_deflection(xl, L, Q, E, T, hinged=True, order=2)
    wr, _, d2r = oracles.beam_deflection(xr, L, Q, E, T, hinged=True, order=2)
    scale = oracles.beam_midspan(L, Q, E, T, hinged=True)
    assert abs(wl[0] - wr[0]) < 1e-7 * scale           # deflection continuous
    assert abs(d2l[0]) < 1e-7 * scale / L ** 2          # hinge is moment-free
    assert abs(d2r[0]) < 1e-7 * scale / L ** 2


def test_beam_derivatives_fd():
    x = np.array([0.7, 2.1, 3.3, 4.8, 5.2, 7.9, 9.4])
    h = 1e-5
    for hinged in (False, True):
        def f(xx):
            return oracles.beam_deflection(xx, L, Q, E, T, hinged=hinged)
        w, d1, d2 = oracles.beam_deflection(x, L, Q, E, T, hinged=hinged,
                                            order=2)
        fd1 = (f(x + h) - f(x - h)) / (2.0 * h)
        fd2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / h ** 2
        assert np.max(np.abs(d1 - fd1)) < 1e-9
        assert np.max(np.abs(d2 - fd2)) < 1e-4


def test_beam_ode():
    # D w'''' = q away from the hinge, checked by FD of w''
    h = 1e-4
    x = np.linspace(1.0, 4.0, 7)
    D = E * T ** 3 / 12.0
    for hinged in (False, True):
        def d2(xx):
            return oracles.beam_deflection(xx, L, Q, E, T, hinged=hinged,
                                           order=2)[2]
        d4 = (d2(x + h) - 2.0 * d2(x) + d2(x - h)) / h ** 2
        assert np.max(np.abs(D * d4 - Q)) < 1e-4 * Q


PLATE = dict(a=1.0, b=1.0, q=1.0, D=1.0)


def _plate(kind, x, y, order=0):
    p = PLATE
    if kind == "ssss":
        return oracles.plate_ssss(x, y, p["a"], p["b"], p["q"], p["D"],
                                  order=order)
    return oracles.plate_scsc(x, y, p["a"], p["b"], p["q"], p["D"],
                              order=order)


def test_plate_center_coefficients():
    # Timoshenko's tabulated alpha coefficients for the square plate
    assert oracles.plate_center_coefficient("ssss") == pytest.approx(
        0.00406, abs=3e-6)
    assert oracles.plate_center_coefficient("scsc") == pytest.approx(
        0.00192, abs=3e-6)


def test_plate_boundary_zero():
    t = np.linspace(0.05, 0.95, 7)
    scale = oracles.plate_center_coefficient("ssss")
    for edge_x, edge_y in [(np.zeros_like(t), t), (np.ones_like(t), t),
                           (t, np.zeros_like(t)), (t, np.ones_like(t))]:
        assert np.max(np.abs(_plate("ssss", edge_x, edge_y))) < 1e-12 * scale
    for edge_x, edge_y in [(np.zeros_like(t), t - 0.5),
                           (np.ones_like(t), t - 0.5),
                           (t, np.full_like(t, -0.5)),
                           (t, np.full_like(t, 0.5))]:
        assert np.max(np.abs(_plate("scsc", edge_x, edge_y))) < 1e-12 * scale


def test_plate_clamped_slope():
    # clamped sides of the SCSC plate carry zero normal slope; the one-sided
    # difference picks up 0.5 * wyy * h from the quadratic term, so the
    # tolerance is h times the moment scale
    t = np.linspace(0.05, 0.95, 7)
    h = 1e-6
    for y in (-0.5, 0.5):
        slope = (_plate("scsc", t, np.full_like(t, y - np.sign(y) * h))
                 - _plate("scsc", t, np.full_like(t, y))) / h
        assert np.max(np.abs(slope)) < 0.1 * h


def test_plate_symmetry():
    x = np.array([0.13, 0.31, 0.42])
    y = np.array([0.21, 0.08, 0.47])
    assert np.allclose(_plate("ssss", x, y), _plate("ssss", 1.0 - x, y),
                       rtol=0, atol=1e-14)
    assert np.allclose(_plate("ssss", x, y), _plate("ssss", x, 1.0 - y),
                       rtol=0, atol=1e-14)
    ys = y - 0.5
    assert np.allclose(_plate("scsc", x, ys), _plate("scsc", 1.0 - x, ys),
                       rtol=0, atol=1e-14)
    assert np.allclose(_plate("scsc", x, ys), _plate("scsc", x, -ys),
                       rtol=0, atol=1e-14)


def test_plate_hessians_fd():
    rng = np.random.default_rng(3)
    h = 1e-5
    for kind, ylo in (("ssss", 0.1), ("scsc", -0.4)):
        x = rng.uniform(0.1, 0.9, 6)
        y = rng.uniform(ylo, ylo + 0.5, 6)
        w, wxx, wyy, wxy = _plate(kind, x, y, order=2)
        fxx = (_plate(kind, x + h, y) - 2 * w + _plate(kind, x - h, y)) / h**2
        fyy = (_plate(kind, x, y + h) - 2 * w + _plate(kind, x, y - h)) / h**2
        fxy = (_plate(kind, x + h, y + h) - _plate(kind, x + h, y - h)
               - _plate(kind, x - h, y + h)
               + _plate(kind, x - h, y - h)) / (4 * h * h)
        assert np.max(np.abs(wxx - fxx)) < 1e-5
        assert np.max(np.abs(wyy - fyy)) < 1e-5
        assert np.max(np.abs(wxy - fxy)) < 1e-5


def test_plate_biharmonic():
    # D (wxxxx + 2 wxxyy + wyyyy) = q via FD of the analytic hessian
    h = 1e-4
    x = np.array([0.31, 0.55, 0.71])
    for kind, y in (("ssss", np.array([0.41, 0.62, 0.28])),
                    ("scsc", np.array([-0.1, 0.12, 0.22]))):
        def hess(xx, yy):
            return _plate(kind, xx, yy, order=2)[1:3]
        xx0, yy0 = hess(x, y)
        lap = lambda xx, yy: hess(xx, yy)[0] + hess(xx, yy)[1]
        bih = (lap(x + h, y) + lap(x - h, y) + lap(x, y + h) + lap(x, y - h)
               - 4.0 * lap(x, y)) / h ** 2
        # remaining defect is series truncation in the fourth derivatives
        assert np.max(np.abs(bih - PLATE["q"] / PLATE["D"])) < 2e-2
