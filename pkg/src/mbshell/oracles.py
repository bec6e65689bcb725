"""Closed-form reference solutions for the benchmark problems.

All solutions are classical Kirchhoff results derived independently of the
discretization:

- propped cantilever plate strip (clamped / simply supported) under uniform
  load, with and without a frictionless hinge at midspan,
- rectangular plate, all sides simply supported (Navier double sine series),
- rectangular plate, two opposite sides simply supported and two clamped
  (Levy single series with hyperbolic corrections).
"""

import numpy as np


def bending_stiffness(E, t, nu):
    return E * t ** 3 / (12.0 * (1.0 - nu * nu))


def beam_deflection(x, L, q, E, t, hinged=False, order=0):
    """Plate strip (nu = 0) clamped at x = 0, simply supported at x = L,
    uniform transverse load q per unit area; optional frictionless hinge at
    x = L/2.  Returns the transverse deflection (positive along the load),
    or (w, w', w'') when order = 2."""
    x = np.asarray(x, dtype=float)
    if not hinged:
        c = q / (4.0 * E * t ** 3)
        w = c * (2.0 * x ** 4 - 5.0 * L * x ** 3 + 3.0 * L ** 2 * x ** 2)
        if order == 0:
            return w
        d1 = c * (8.0 * x ** 3 - 15.0 * L * x ** 2 + 6.0 * L ** 2 * x)
        d2 = c * (24.0 * x ** 2 - 30.0 * L * x + 6.0 * L ** 2)
        return w, d1, d2
    c = q / (2.0 * E * t ** 3)
    w = c * (x ** 4 - 3.0 * L * x ** 3 + 3.0 * L ** 2 * x ** 2)
    tail = c * (-2.0 * L ** 3 * x + L ** 4)
    right = x >= L / 2.0
    w = np.where(right, w + tail, w)
    if order == 0:
        return w
    d1 = c * (4.0 * x ** 3 - 9.0 * L * x ** 2 + 6.0 * L ** 2 * x)
    d1 = np.where(right, d1 - 2.0 * c * L ** 3, d1)
    d2 = c * (12.0 * x ** 2 - 18.0 * L * x + 6.0 * L ** 2)
    return w, d1, d2


def beam_midspan(L, q, E, t, hinged=False):
    if hinged:
        return 7.0 * q * L ** 4 / (32.0 * E * t ** 3)
    return q * L ** 4 / (16.0 * E * t ** 3)


def plate_ssss(x, y, a, b, q, D, terms=60, order=0):
    """Navier solution: uniform load, all edges simply supported.
    Plate occupies [0, a] x [0, b].  With order = 2 returns
    (w, wxx, wyy, wxy)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = np.arange(1, 2 * terms, 2, dtype=float)
    n = np.arange(1, 2 * terms, 2, dtype=float)
    km = np.pi * m / a
    kn = np.pi * n / b
    den = np.outer((m / a) ** 2, np.ones_like(n)) \
        + np.outer(np.ones_like(m), (n / b) ** 2)
    coef = 16.0 * q / (np.pi ** 6 * D) / (np.outer(m, n) * den * den)
    sx = np.sin(np.multiply.outer(x, km))
    sy = np.sin(np.multiply.outer(y, kn))
    w = np.einsum("...m,mn,...n->...", sx, coef, sy)
    if order == 0:
        return w
    cx = np.cos(np.multiply.outer(x, km))
    cy = np.cos(np.multiply.outer(y, kn))
    wxx = -np.einsum("...m,mn,...n->...", sx * km ** 2, coef, sy)
    wyy = -np.einsum("...m,mn,...n->...", sx, coef, sy * kn ** 2)
    wxy = np.einsum("...m,mn,...n->...", cx * km, coef, cy * kn)
    return w, wxx, wyy, wxy


def plate_scsc(x, y, a, b, q, D, terms=60, order=0):
    """Levy solution: uniform load, simply supported at x = 0, a and clamped
    at y = +-b/2.  Plate occupies [0, a] x [-b/2, b/2].  With order = 2
    returns (w, wxx, wyy, wxy)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    w = np.zeros(shape)
    wxx = np.zeros(shape)
    wyy = np.zeros(shape)
    wxy = np.zeros(shape)
    for m in range(1, 2 * terms, 2):
        kappa = m * np.pi / a
        alpha = kappa * b / 2.0
        S = 4.0 * q / (m * np.pi) / (D * kappa ** 4)
        ta = np.tanh(alpha)
        # scaled coefficients: w_m(y) = S + (Abar*cosh(k y)
        #   + Bbar*k y*sinh(k y)) / cosh(alpha)
        M = np.array([[1.0, alpha * ta], [ta, ta + alpha]])
        Abar, Bbar = np.linalg.solve(M, [-S, 0.0])
        ky = kappa * y
        ch, sh = np.cosh(ky), np.sinh(ky)
        sc = 1.0 / np.cosh(alpha)
        prof = S + (Abar * ch + Bbar * ky * sh) * sc
        sx = np.sin(kappa * x)
        w = w + prof * sx
        if order == 0:
            continue
        dprof = kappa * (Abar * sh + Bbar * (sh + ky * ch)) * sc
        ddprof = kappa ** 2 * (Abar * ch + Bbar * (2.0 * ch + ky * sh)) * sc
        wxx = wxx - kappa ** 2 * prof * sx
        wyy = wyy + ddprof * sx
        wxy = wxy + dprof * kappa * np.cos(kappa * x)
    if order == 0:
        return w
    return w, wxx, wyy, wxy


def plate_center_coefficient(kind, nu=0.3, terms=200):
    """Dimensionless center deflection w_c * D / (q a^4) of a square plate."""
    if kind == "ssss":
        return float(plate_ssss(0.5, 0.5, 1.0, 1.0, 1.0, 1.0, terms))
    if kind == "scsc":
        return float(plate_scsc(0.5, 0.0, 1.0, 1.0, 1.0, 1.0, terms))
    raise ValueError(kind)
