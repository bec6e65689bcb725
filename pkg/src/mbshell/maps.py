"""Chart parameterisations: corner rotations and quasi-conformal wedge maps.

Every chart map used here is the composition of a rigid corner map (shift
the element corner to the origin and rotate into the first quadrant) with a
radial/angular scaling

    W(z) = |z|^beta * exp(i * (c * phase(z) + offset)).

The classic wedge maps are special cases: the smooth-chart map uses
c = 4/v, the creased-chart maps use per-sector angles and element counts,
and the concave-sector map adds a phase offset of pi/2.  All maps are
returned with analytic first and second derivatives of the real 2x2
components, since for beta != 4/v the map is not holomorphic.
"""

import numpy as np

# Unit-square corners, counter-clockwise, 1-based index j in {1,2,3,4}.
CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])

# Real 2x2 rotation applied by the corner map for j in {1,2,3,4}:
# multiplication by exp(-i*pi*(j-1)/2).
ROTATIONS = np.array([
    [[1.0, 0.0], [0.0, 1.0]],
    [[0.0, 1.0], [-1.0, 0.0]],
    [[-1.0, 0.0], [0.0, -1.0]],
    [[0.0, -1.0], [1.0, 0.0]],
])


def lambda_tr(z, j):
    """Corner map: (z - z_j) * exp(-i*pi*(j-1)/2) for corner index j in 1..4."""
    zj = CORNERS[j - 1, 0] + 1j * CORNERS[j - 1, 1]
    return (np.asarray(z, dtype=complex) - zj) * np.exp(-1j * np.pi * (j - 1) / 2)


def lambda_qr_I(z, v, n, beta=1.0):
    """Wedge map |z|^beta * exp(i*phase*4/v) * exp(i*2*pi*(n-1)/v), n 1-based."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    phi = np.angle(z) % (2 * np.pi)
    return r ** beta * np.exp(1j * (phi * 4.0 / v + 2 * np.pi * (n - 1) / v))


def lambda_qr_II(z, k, s, l_s, m_s):
    """Creased-chart map: equiangular sectors, l_s elements in sector s."""
    return lambda_qr_I(z, k * l_s, (s - 1) * l_s + m_s)


def lambda_qr_III(z, k, s, l_s, m_s, beta=1.0):
    """Concave-chart map: k-1 convex sectors share the first quadrant, the
    concave sector s = k spans the remaining 3*pi/2 starting at phase pi/2."""
    if s == k:
        return lambda_qr_I(z, 4.0 * l_s / 3.0, m_s, beta) * np.exp(1j * np.pi / 2)
    return lambda_qr_I(z, 4.0 * (k - 1) * l_s, (s - 1) * l_s + m_s, beta)


def wedge(xy, beta, c, offset, order=2):
    """Evaluate W(x + i*y) = r^beta * exp(i*(c*phi + offset)) with derivatives.

    xy: (n, 2) points with r > 0 (derivatives are singular at the origin;
    callers only request order 0 there).  Returns (val, jac, hess) where
    val is (n, 2), jac is (n, 2, 2) with jac[:, i, a] = d xi_i / d x_a and
    hess is (n, 2, 2, 2) with hess[:, i, a, b] = d^2 xi_i / (d x_a d x_b).
    Entries of jac/hess are None when not requested.
    """
    xy = np.asarray(xy, dtype=float)
    x, y = xy[:, 0], xy[:, 1]
    r2 = x * x + y * y
    r = np.sqrt(r2)
    phi = np.arctan2(y, x) % (2 * np.pi)
    A = r ** beta
    psi = c * phi + offset
    cp, sp = np.cos(psi), np.sin(psi)
    val = np.stack([A * cp, A * sp], axis=-1)
    zero = r2 == 0.0
    if np.any(zero):
        val[zero] = 0.0
    if order == 0:
        return val, None, None

    with np.errstate(divide="ignore", invalid="ignore"):
        rbm2 = r ** (beta - 2.0)
        dA = np.stack([beta * x * rbm2, beta * y * rbm2], axis=-1)
        dphi = np.stack([-y / r2, x / r2], axis=-1)
    dpsi = c * dphi
    jac = np.empty(xy.shape[:-1] + (2, 2))
    # d(A cos psi), d(A sin psi)
    jac[..., 0, :] = dA * cp[..., None] - (A * sp)[..., None] * dpsi
    jac[..., 1, :] = dA * sp[..., None] + (A * cp)[..., None] * dpsi
    if order == 1:
        return val, jac, None

    with np.errstate(divide="ignore", invalid="ignore"):
        rbm4 = r ** (beta - 4.0)
        ddA = np.empty(xy.shape[:-1] + (2, 2))
        ddA[..., 0, 0] = beta * rbm4 * (r2 + (beta - 2.0) * x * x)
        ddA[..., 1, 1] = beta * rbm4 * (r2 + (beta - 2.0) * y * y)
        ddA[..., 0, 1] = ddA[..., 1, 0] = beta * (beta - 2.0) * x * y * rbm4
        r4 = r2 * r2
        ddphi = np.empty(xy.shape[:-1] + (2, 2))
        ddphi[..., 0, 0] = 2.0 * x * y / r4
        ddphi[..., 1, 1] = -2.0 * x * y / r4
        ddphi[..., 0, 1] = ddphi[..., 1, 0] = (y * y - x * x) / r4
    ddpsi = c * ddphi
    hess = np.empty(xy.shape[:-1] + (2, 2, 2))
    dA_dpsi = dA[..., :, None] * dpsi[..., None, :]
    dpsi_dpsi = dpsi[..., :, None] * dpsi[..., None, :]
    hess[..., 0, :, :] = (
        ddA * cp[..., None, None]
        - (dA_dpsi + np.swapaxes(dA_dpsi, -1, -2)) * sp[..., None, None]
        - (A * sp)[..., None, None] * ddpsi
        - (A * cp)[..., None, None] * dpsi_dpsi
    )
    hess[..., 1, :, :] = (
        ddA * sp[..., None, None]
        + (dA_dpsi + np.swapaxes(dA_dpsi, -1, -2)) * cp[..., None, None]
        + (A * cp)[..., None, None] * ddpsi
        - (A * sp)[..., None, None] * dpsi_dpsi
    )
    return val, jac, hess


def corner_local(eta, j):
    """Map reference-square points to corner-local coordinates R_j (eta - z_j)."""
    eta = np.asarray(eta, dtype=float)
    return (eta - CORNERS[j - 1]) @ ROTATIONS[j - 1].T


def corner_local_inverse(xy, j):
    xy = np.asarray(xy, dtype=float)
    return xy @ ROTATIONS[j - 1] + CORNERS[j - 1]


def chain_to_eta(j, val, jac, hess):
    """Rotate derivatives taken w.r.t. corner-local coordinates back to eta."""
    R = ROTATIONS[j - 1]
    jac_eta = jac @ R if jac is not None else None
    hess_eta = None
    if hess is not None:
        hess_eta = np.einsum("ca,...icd,db->...iab", R, hess, R)
    return val, jac_eta, hess_eta


class SectorLayout:
    """Angular layout of a chart domain: a list of (start, angle, count)
    sectors plus the radial exponent beta.  Covers every chart class:

    - smooth interior vertex: one sector of angle 2*pi with v elements,
    - creased interior vertex: k equiangular sectors of angle 2*pi/k,
    - concave vertex: k-1 convex sectors sharing the first quadrant and a
      concave sector of angle 3*pi/2 starting at phase pi/2 (listed last),
    - boundary vertex: sectors sharing a half-disk (pi) or, for a convex
      domain corner, a quarter-disk (pi/2).
    """

    def __init__(self, sectors, beta=1.0, concave=None, open_chain=False):
        # sectors: list of (start_angle, sector_angle, element_count)
        self.sectors = [(float(a), float(w), int(n)) for a, w, n in sectors]
        self.beta = float(beta)
        self.concave = concave  # index of the concave sector or None
        self.open_chain = open_chain  # True for boundary (non-cyclic) charts
        self.valence = sum(n for _, _, n in self.sectors)
        self.total_angle = sum(w for _, w, _ in self.sectors)

    @classmethod
    def smooth(cls, v, beta=1.0):
        return cls([(0.0, 2 * np.pi, v)], beta)

    @classmethod
    def creased(cls, counts, beta=1.0):
        k = len(counts)
        width = 2 * np.pi / k
        return cls([(i * width, width, n) for i, n in enumerate(counts)], beta)

    @classmethod
    def concave_chart(cls, counts, beta=1.0):
        # counts: per-sector element counts with the concave sector last.
        k = len(counts)
        width = (np.pi / 2) / (k - 1)
        secs = [(i * width, width, n) for i, n in enumerate(counts[:-1])]
        secs.append((np.pi / 2, 3 * np.pi / 2, counts[-1]))
        return cls(secs, beta, concave=k - 1)

    @classmethod
    def boundary(cls, counts, corner=False, beta=1.0):
        total = np.pi / 2 if corner else np.pi
        k = len(counts)
        width = total / k
        return cls([(i * width, width, n) for i, n in enumerate(counts)],
                   beta, open_chain=True)

    def slot_params(self, s, m):
        """Wedge parameters (c, offset) for element m (0-based) of sector s."""
        start, width, count = self.sectors[s]
        elem = width / count
        return elem / (np.pi / 2), start + m * elem

    def wedge_at(self, s, m, xy, order=2):
        c, offset = self.slot_params(s, m)
        return wedge(xy, self.beta, c, offset, order)

    def locate(self, phase):
        """Sector/element owning a chart-domain phase (half-open brackets,
        last element closed).  Raises for phases outside an open chart."""
        phase = float(phase) % (2 * np.pi)
        eps = 1e-12
        if self.open_chain and phase > self.total_angle + eps:
            raise ValueError("point outside chart domain (phase %.6f > %.6f)"
                             % (phase, self.total_angle))
        last = len(self.sectors) - 1
        for s, (start, width, count) in enumerate(self.sectors):
            rel = phase - start
            if s == last:
                rel %= 2 * np.pi
            # half-open sector brackets; the last sector is closed
            if -eps <= rel < width - eps or (s == last and rel <= width + eps):
                elem = width / count
                m = min(int(max(rel, 0.0) / elem), count - 1)
                return s, m
        raise ValueError("phase %.6f not covered by chart layout" % phase)


def psi(layout, j, s, m, eta, order=2):
    """Composed chart map of reference points for element slot (s, m) sitting
    at corner j.  Returns (xi, jac, hess) with derivatives w.r.t. eta."""
    xy = corner_local(np.atleast_2d(eta), j)
    val, jac, hess = layout.wedge_at(s, m, xy, order)
    return chain_to_eta(j, val, jac, hess)


def psi_inverse_local(layout, xi):
    """Invert the wedge part of the chart map: chart point -> (s, m, xy) with
    xy in the corner-local frame.  The caller applies the corner map inverse."""
    xi = np.asarray(xi, dtype=float)
    r = float(np.hypot(xi[0], xi[1]))
    phase = float(np.arctan2(xi[1], xi[0]) % (2 * np.pi))
    if r == 0.0:
        return 0, 0, np.zeros(2)
    s, m = layout.locate(phase)
    c, offset = layout.slot_params(s, m)
    phi = ((phase - offset) % (2 * np.pi)) / c
    phi = min(max(phi, 0.0), np.pi / 2)
    rloc = r ** (1.0 / layout.beta)
    return s, m, np.array([rloc * np.cos(phi), rloc * np.sin(phi)])
