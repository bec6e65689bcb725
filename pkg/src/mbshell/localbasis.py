"""Chart-local approximant spaces and the constrained least-squares kernel.

Every chart carries a local approximation space expressed through a raw
coefficient vector:

- smooth charts: one tensor-product quadratic in the chart coordinates xi
  (9 monomial coefficients),
- creased and boundary charts: one tensor-product quadratic per sector in
  unrolled sector coordinates theta, where every element occupies a full
  quarter-turn (theta = i^m * z in the corner-local frame), so the k = 2
  case reduces to the split-axis form with a shared axis trace,
- concave (type3) charts: per-sector quadratics for the convex sectors and
  a composite of three biquadratic Bezier patches on the quadrant squares
  of the L-shaped concave sector, C1-coupled across the internal patch
  boundaries.

Inter-sector continuity (shared quadratic traces along crease spokes) and
boundary interpolation (traces pinned to node data on the two boundary
spokes) are expressed as linear constraints and eliminated by a nullspace
factorization before the least-squares pseudoinverse.
"""

import warnings

import numpy as np

# tensor-quadratic monomial exponents, index 3*q + p for x^p y^q
EXPS = [(p, q) for q in range(3) for p in range(3)]

# unrolled-sector rotations i^m for m = 0..3
SECTOR_ROT = np.array([
    [[1.0, 0.0], [0.0, 1.0]],
    [[0.0, -1.0], [1.0, 0.0]],
    [[-1.0, 0.0], [0.0, -1.0]],
    [[0.0, 1.0], [-1.0, 0.0]],
])


class ChartLayoutError(ValueError):
    pass


def tensor_quadratic(pts, order=2):
    """Monomials x^p y^q, p,q <= 2, with derivatives w.r.t. the 2D point."""
    pts = np.asarray(pts, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    n = len(pts)
    powx = np.stack([np.ones(n), x, x * x], axis=-1)
    powy = np.stack([np.ones(n), y, y * y], axis=-1)
    dpowx = np.stack([np.zeros(n), np.ones(n), 2 * x], axis=-1)
    dpowy = np.stack([np.zeros(n), np.ones(n), 2 * y], axis=-1)
    ddpowx = np.stack([np.zeros(n), np.zeros(n), 2 * np.ones(n)], axis=-1)
    ddpowy = np.stack([np.zeros(n), np.zeros(n), 2 * np.ones(n)], axis=-1)
    val = np.empty((n, 9))
    d = np.empty((n, 9, 2)) if order >= 1 else None
    dd = np.empty((n, 9, 2, 2)) if order >= 2 else None
    for idx, (p, q) in enumerate(EXPS):
        val[:, idx] = powx[:, p] * powy[:, q]
        if order >= 1:
            d[:, idx, 0] = dpowx[:, p] * powy[:, q]
            d[:, idx, 1] = powx[:, p] * dpowy[:, q]
        if order >= 2:
            dd[:, idx, 0, 0] = ddpowx[:, p] * powy[:, q]
            dd[:, idx, 1, 1] = powx[:, p] * ddpowy[:, q]
            dd[:, idx, 0, 1] = dd[:, idx, 1, 0] = dpowx[:, p] * dpowy[:, q]
    return val, d, dd


_LAGRANGE_NODES = np.array([(x, y) for y in (-1.0, 0.0, 1.0)
                            for x in (-1.0, 0.0, 1.0)])
_LAGRANGE_COEF = np.linalg.inv(tensor_quadratic(_LAGRANGE_NODES, 0)[0])


def tensor_lagrange(pts, order=2):
    """Tensor-quadratic Lagrange basis on the grid {-1, 0, 1}^2."""
    val, d, dd = tensor_quadratic(pts, order)
    val = val @ _LAGRANGE_COEF
    if d is not None:
        d = np.einsum("nka,kj->nja", d, _LAGRANGE_COEF)
    if dd is not None:
        dd = np.einsum("nkab,kj->njab", dd, _LAGRANGE_COEF)
    return val, d, dd


def bernstein_quadratic(t):
    """Quadratic Bernstein polynomials with derivatives; t may be outside
    [0, 1] (polynomial extension)."""
    t = np.asarray(t, dtype=float)
    val = np.stack([(1 - t) ** 2, 2 * t * (1 - t), t * t], axis=-1)
    d1 = np.stack([2 * t - 2, 2 - 4 * t, 2 * t], axis=-1)
    d2 = np.stack([2 * np.ones_like(t), -4 * np.ones_like(t),
                   2 * np.ones_like(t)], axis=-1)
    return val, d1, d2


def chain_second(val, d, dd, jac, hess):
    """Push derivatives of f(xi) through xi(x): returns derivatives w.r.t. x.

    d: (n, K, 2) w.r.t. xi; jac: (n, 2, 2) with jac[:, i, a] = d xi_i/d x_a;
    hess: (n, 2, 2, 2) = d2 xi_i / dx_a dx_b.
    """
    dx = ddx = None
    if d is not None and jac is not None:
        dx = np.einsum("nki,nia->nka", d, jac)
    if dd is not None and hess is not None:
        ddx = np.einsum("nkij,nia,njb->nkab", dd, jac, jac)
        ddx += np.einsum("nki,niab->nkab", d, hess)
    return val, dx, ddx


class LocalSpace:
    """Raw basis evaluation plus coupling/pinning constraints for a chart."""

    def __init__(self, descriptor, layout):
        self.cls = descriptor.chart_class
        self.layout = layout
        self.counts = list(descriptor.sector_counts)
        self.k = len(self.counts)
        if self.cls == "smooth":
            self.n_raw = 9
        elif self.cls == "type3":
            self.n_raw = 9 * (self.k - 1) + 27
        else:
            self.n_raw = 9 * self.k
        self.open_chain = layout.open_chain
        if self.cls != "smooth":
            for count in (self.counts if self.cls != "type3"
                          else self.counts[:-1]):
                if count % 4 == 0:
                    warnings.warn(
                        "sector with a multiple of 4 elements unrolls onto "
                        "itself; coupling may be degenerate")

    # -- raw evaluation -----------------------------------------------------

    def eval(self, s, m, xy, order=2):
        """Raw basis values at corner-local points of element m of sector s.

        Returns (val, d, dd) of shapes (n, n_raw), (n, n_raw, 2),
        (n, n_raw, 2, 2); derivatives w.r.t. the corner-local coordinates.
        """
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        n = len(xy)
        val = np.zeros((n, self.n_raw))
        d = np.zeros((n, self.n_raw, 2)) if order >= 1 else None
        dd = np.zeros((n, self.n_raw, 2, 2)) if order >= 2 else None

        if self.cls == "smooth":
            xi, jac, hess = self.layout.wedge_at(s, m, xy, order)
            v, dv, ddv = tensor_lagrange(xi, order)
            v, dv, ddv = chain_second(v, dv, ddv, jac, hess)
            val[:] = v
            if order >= 1:
                d[:] = dv
            if order >= 2:
                dd[:] = ddv
            return val, d, dd

        if self.cls == "type3" and s == self.k - 1:
            self._eval_concave(s, m, xy, order, val, d, dd)
            return val, d, dd

        # creased / boundary / convex sector: quadratic in unrolled theta
        R = SECTOR_ROT[m % 4]
        theta = xy @ R.T
        v, dv, ddv = tensor_quadratic(theta, order)
        sl = slice(9 * s, 9 * s + 9)
        val[:, sl] = v
        if order >= 1:
            d[:, sl, :] = np.einsum("nki,ia->nka", dv, R)
        if order >= 2:
            dd[:, sl, :, :] = np.einsum("nkij,ia,jb->nkab", ddv, R, R)
        return val, d, dd

    def _eval_concave(self, s, m, xy, order, val, d, dd):
        xi, jac, hess = self.layout.wedge_at(s, m, xy, order)
        phase = np.arctan2(xi[:, 1], xi[:, 0]) % (2 * np.pi)
        # the concave sector spans [pi/2, 2*pi]; phases that wrapped past
        # 2*pi belong to the last patch
        phase = np.where(phase < np.pi / 2 - 1e-9, phase + 2 * np.pi, phase)
        # patch quadrants start at pi/2; tolerate roundoff at the seam
        patch = np.clip(((phase - np.pi / 2) / (np.pi / 2)).astype(int), 0, 2)
        origins = np.array([[-1.0, 0.0], [-1.0, -1.0], [0.0, -1.0]])
        base = 9 * (self.k - 1)
        for t in range(3):
            sel = patch == t
            if not np.any(sel):
                continue
            uv = xi[sel] - origins[t]
            bu, du, ddu = bernstein_quadratic(uv[:, 0])
            bv, dv_, ddv = bernstein_quadratic(uv[:, 1])
            ns = int(sel.sum())
            v_p = np.zeros((ns, self.n_raw))
            d_p = np.zeros((ns, self.n_raw, 2))
            dd_p = np.zeros((ns, self.n_raw, 2, 2))
            for j in range(3):
                for i in range(3):
                    idx = base + 9 * t + 3 * j + i
                    v_p[:, idx] = bu[:, i] * bv[:, j]
                    d_p[:, idx, 0] = du[:, i] * bv[:, j]
                    d_p[:, idx, 1] = bu[:, i] * dv_[:, j]
                    dd_p[:, idx, 0, 0] = ddu[:, i] * bv[:, j]
                    dd_p[:, idx, 1, 1] = bu[:, i] * ddv[:, j]
                    dd_p[:, idx, 0, 1] = dd_p[:, idx, 1, 0] = \
                        du[:, i] * dv_[:, j]
            jv = jac[sel] if jac is not None else None
            hv = hess[sel] if hess is not None else None
            v_p, d_x, dd_x = chain_second(
                v_p, d_p if order >= 1 else None,
                dd_p if order >= 2 else None, jv, hv)
            val[sel] = v_p
            if order >= 1:
                d[sel] = d_x
            if order >= 2:
                dd[sel] = dd_x

    # -- constraints --------------------------------------------------------

    def _sector_trace(self, s, end=False):
        """3 x n_raw rows giving the trace quadratic (value, linear, square
        radial coefficients) of sector s along its start or end spoke."""
        rows = np.zeros((3, self.n_raw))
        direction = (self.counts[s] % 4) if end else 0
        block = 9 * s
        rows[0, block + 0] = 1.0
        if direction % 2 == 0:
            sign = 1.0 if direction == 0 else -1.0
            rows[1, block + 1] = sign
            rows[2, block + 2] = 1.0
        else:
            sign = 1.0 if direction == 1 else -1.0
            rows[1, block + 3] = sign
            rows[2, block + 6] = 1.0
        return rows

    def _bezier_edge(self, which):
        """3 x n_raw rows giving the monomial coefficients of the concave
        composite along a crease spoke; which is 'start' (phase pi/2, patch 0
        right column) or 'end' (phase 2*pi, patch 2 top row)."""
        base = 9 * (self.k - 1)
        rows = np.zeros((3, self.n_raw))
        if which == "start":
            ids = [base + 3 * j + 2 for j in range(3)]        # patch 0, i=2
        else:
            ids = [base + 18 + 3 * 2 + i for i in range(3)]   # patch 2, j=2
        e0, e1, e2 = ids
        rows[0, e0] = 1.0
        rows[1, e0], rows[1, e1] = -2.0, 2.0
        rows[2, e0], rows[2, e1], rows[2, e2] = 1.0, -2.0, 1.0
        return rows

    def coupling(self):
        """Homogeneous constraint rows H (C0 trace sharing across spokes and
        C1 coupling inside the concave composite)."""
        rows = []
        if self.cls == "smooth":
            return np.zeros((0, self.n_raw))
        n_poly = self.k - 1 if self.cls == "type3" else self.k
        pairs = [(s, s + 1) for s in range(n_poly - 1)]
        if not self.open_chain and self.cls != "type3" and n_poly > 1:
            pairs.append((n_poly - 1, 0))
        for s0, s1 in pairs:
            rows.append(self._sector_trace(s0, end=True)
                        - self._sector_trace(s1, end=False))
        if self.cls == "type3":
            base = 9 * (self.k - 1)

            def P(t, i, j):
                return base + 9 * t + 3 * j + i

            block = np.zeros((12, self.n_raw))
            r = 0
            for i in range(3):  # patch0 (upper-left) / patch1 (lower-left)
                block[r, P(0, i, 0)] = 1.0
                block[r, P(1, i, 2)] = -1.0
                r += 1
                block[r, P(0, i, 1)] = 1.0
                block[r, P(0, i, 0)] = -1.0
                block[r, P(1, i, 2)] = -1.0
                block[r, P(1, i, 1)] = 1.0
                r += 1
            for j in range(3):  # patch1 / patch2 (lower-right)
                block[r, P(1, 2, j)] = 1.0
                block[r, P(2, 0, j)] = -1.0
                r += 1
                block[r, P(2, 1, j)] = 1.0
                block[r, P(2, 0, j)] = -1.0
                block[r, P(1, 2, j)] = -1.0
                block[r, P(1, 1, j)] = 1.0
                r += 1
            rows.append(block)
            # crease spokes: Bezier edge == neighbouring sector trace
            rows.append(self._bezier_edge("start")
                        - self._sector_trace(self.k - 2, end=True))
            rows.append(self._bezier_edge("end")
                        - self._sector_trace(0, end=False))
        if rows:
            return np.vstack(rows)
        return np.zeros((0, self.n_raw))

    def pinned_nodes(self):
        """Node lattice points whose data the approximant must interpolate:
        the two boundary spokes of boundary/corner charts.  Returns a list of
        (sector, element, lattice) keys; the constraint row is the V row of
        the node itself."""
        if self.cls not in ("boundary", "corner"):
            return []
        last = self.k - 1
        mlast = self.counts[last] - 1
        if self.k == 1 and self.counts[0] % 4 in (0, 2):
            # both boundary spokes unroll onto one line: a single trace
            # quadratic can only interpolate the three boundary vertices
            return [(0, 0, (0.0, 0.0)), (0, 0, (1.0, 0.0)),
                    (last, mlast, (0.0, 1.0))]
        keys = [(0, 0, (0.0, 0.0)), (0, 0, (0.5, 0.0)), (0, 0, (1.0, 0.0))]
        keys += [(last, mlast, (0.0, 0.5)), (last, mlast, (0.0, 1.0))]
        return keys


def build_projection(V, H, pin_idx, rcond=1e-10):
    """Constrained least-squares projection A with c = A d.

    V: (n_nodes, n_raw) raw basis evaluated at the chart nodes.
    H: homogeneous coupling rows.
    pin_idx: node indices whose rows of V are enforced as interpolation
    constraints (V[i] c = d_i).

    Minimizes ||V c - d|| over c subject to H c = 0 and the pinning rows.
    """
    n_nodes, n_raw = V.shape
    P = V[pin_idx] if len(pin_idx) else np.zeros((0, n_raw))
    S = np.zeros((len(pin_idx), n_nodes))
    for r, i in enumerate(pin_idx):
        S[r, i] = 1.0
    C = np.vstack([H, P])
    R = np.vstack([np.zeros((H.shape[0], n_nodes)), S])
    if C.shape[0] == 0:
        A = np.linalg.pinv(V, rcond=rcond)
        rank = np.linalg.matrix_rank(V, tol=rcond * np.linalg.norm(V, 2))
        if rank < n_raw:
            raise ChartLayoutError(
                "rank-deficient chart evaluation matrix (%d < %d)"
                % (rank, n_raw))
        return A
    U, sv, Wt = np.linalg.svd(C)
    tol = max(C.shape) * np.finfo(float).eps * (sv[0] if len(sv) else 1.0)
    rank = int(np.sum(sv > tol))
    Z = Wt[rank:].T                      # nullspace basis of the constraints
    Cp = np.linalg.pinv(C, rcond=rcond) @ R
    B = V @ Z
    nz = Z.shape[1]
    brank = np.linalg.matrix_rank(B, tol=rcond * max(
        1.0, np.linalg.norm(B, 2)))
    if brank < nz:
        raise ChartLayoutError(
            "degenerate chart layout: reduced coefficient space rank %d < %d"
            % (brank, nz))
    A = Cp + Z @ (np.linalg.pinv(B, rcond=rcond) @ (np.eye(n_nodes) - V @ Cp))
    resid = np.max(np.abs(C @ A - R)) if C.size else 0.0
    if resid > 1e-8:
        raise ChartLayoutError(
            "inconsistent chart constraints (residual %.2e)" % resid)
    return A
