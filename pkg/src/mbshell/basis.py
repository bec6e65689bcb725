"""Manifold basis assembly: per-chart node tables and least-squares
projections, and per-element evaluation of the blended basis functions
with first and second reference derivatives."""

import threading

import numpy as np

from . import maps
from .blending import blending_corner, blending_univariate
from .localbasis import LocalSpace, build_projection, chain_second, \
    tensor_lagrange, tensor_quadratic
from .maps import corner_local, corner_local_inverse, psi_inverse_local, wedge

# lattice of the 9 element nodes in corner-local coordinates; the
# enumeration order fixes the chart node numbering
LATTICE = [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0),
           (0.0, 0.5), (0.5, 0.5), (1.0, 0.5),
           (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]

_A_CACHE = {}
_A_LOCK = threading.Lock()


def _lattice_node(mesh, q, p, ab):
    """Global node id of a lattice point of quad q seen from corner p."""
    quad = mesh.quads[q]
    c = [int(quad[(p + i) % 4]) for i in range(4)]
    a, b = ab
    if a in (0.0, 1.0) and b in (0.0, 1.0):
        idx = {(0.0, 0.0): 0, (1.0, 0.0): 1, (1.0, 1.0): 2, (0.0, 1.0): 3}
        return mesh.vertex_node(c[idx[(a, b)]])
    if b == 0.0:
        return mesh.edge_node(c[0], c[1])
    if a == 1.0:
        return mesh.edge_node(c[1], c[2])
    if b == 1.0:
        return mesh.edge_node(c[3], c[2])
    if a == 0.0:
        return mesh.edge_node(c[0], c[3])
    return mesh.face_node(q)


class ChartBasis:
    """Chart of one control vertex: local space, node table and projection."""

    def __init__(self, mesh, descriptor, beta=1.0):
        self.descriptor = descriptor
        self.layout = descriptor.layout(beta)
        self.space = LocalSpace(descriptor, self.layout)
        self.beta = beta
        counts = descriptor.sector_counts

        node_ids = []
        node_index = {}
        eval_keys = []
        self.fan_index_by_quad = {}
        for f, (q, p) in enumerate(descriptor.fan):
            self.fan_index_by_quad[q] = f
            s, m = descriptor.slot_of(f)
            for ab in LATTICE:
                gid = _lattice_node(mesh, q, p, ab)
                if gid not in node_index:
                    node_index[gid] = len(node_ids)
                    node_ids.append(gid)
                    eval_keys.append((s, m, ab))
        self.node_ids = np.array(node_ids, dtype=int)
        self.node_index = node_index
        self.eval_keys = eval_keys

        pin_idx = []
        for s, m, ab in self.space.pinned_nodes():
            f = sum(counts[:s]) + m
            q, p = descriptor.fan[f]
            pin_idx.append(node_index[_lattice_node(mesh, q, p, ab)])
        self.pin_idx = pin_idx

        key = (descriptor.layout_key(), beta)
        with _A_LOCK:
            cached = _A_CACHE.get(key)
        if cached is not None:
            self.V, self.A = cached
        else:
            self.V = self._evaluation_matrix()
            self.A = build_projection(self.V, self.space.coupling(), pin_idx)
            with _A_LOCK:
                _A_CACHE.setdefault(key, (self.V, self.A))

    def _evaluation_matrix(self):
        V = np.empty((len(self.node_ids), self.space.n_raw))
        for i, (s, m, ab) in enumerate(self.eval_keys):
            val, _, _ = self.space.eval(s, m, np.array([ab]), order=0)
            V[i] = val[0]
        return V

    def node_parameters(self):
        """Chart coordinates xi of every chart node."""
        xi = np.empty((len(self.node_ids), 2))
        for i, (s, m, ab) in enumerate(self.eval_keys):
            val, _, _ = self.layout.wedge_at(s, m, np.array([ab]), order=0)
            xi[i] = val[0]
        return xi

    def local_basis(self, xi, order=2):
        """Raw local basis p at a chart point, derivatives w.r.t. xi."""
        xi = np.asarray(xi, dtype=float)
        s, m, _ = psi_inverse_local(self.layout, xi)
        cls = self.space.cls
        pts = xi[None, :]
        if cls == "smooth":
            return tensor_lagrange(pts, order)
        if cls == "type3" and s == self.space.k - 1:
            val = np.zeros((1, self.space.n_raw))
            d = np.zeros((1, self.space.n_raw, 2)) if order >= 1 else None
            dd = np.zeros((1, self.space.n_raw, 2, 2)) if order >= 2 else None
            # concave patches live directly in xi: evaluate via the identity
            # wedge by faking the element transform
            ident = _IdentityLayout(self.layout)
            space = self.space
            saved = space.layout
            space.layout = ident
            try:
                space._eval_concave(s, m, pts, order, val, d, dd)
            finally:
                space.layout = saved
            return val, d, dd
        # sector quadratic: unrolled theta is the inverse wedge of xi
        c, offset = self.layout.slot_params(s, 0)
        start = self.layout.sectors[s][0]
        th, jac, hess = wedge(pts, 1.0 / self.beta, 1.0 / c, -start / c, order)
        v, dv, ddv = tensor_quadratic(th, order)
        v, dv, ddv = chain_second(v, dv, ddv, jac, hess)
        val = np.zeros((1, self.space.n_raw))
        sl = slice(9 * s, 9 * s + 9)
        val[:, sl] = v
        d = dd = None
        if order >= 1:
            d = np.zeros((1, self.space.n_raw, 2))
            d[:, sl] = dv
        if order >= 2:
            dd = np.zeros((1, self.space.n_raw, 2, 2))
            dd[:, sl] = ddv
        return val, d, dd

    def psi_inverse(self, xi):
        """Chart point -> ((quad, corner position), eta)."""
        s, m, xy = psi_inverse_local(self.layout, xi)
        f = sum(self.descriptor.sector_counts[:s]) + m
        q, p = self.descriptor.fan[f]
        return (q, p), corner_local_inverse(xy, p + 1)


class _IdentityLayout:
    """Wedge evaluation in chart coordinates themselves (for xi queries)."""

    def __init__(self, layout):
        self._layout = layout

    def wedge_at(self, s, m, xy, order=2):
        n = len(xy)
        val = np.asarray(xy, dtype=float)
        jac = np.broadcast_to(np.eye(2), (n, 2, 2)).copy() if order >= 1 \
            else None
        hess = np.zeros((n, 2, 2, 2)) if order >= 2 else None
        return val, jac, hess


class ElementBasis:
    """Evaluator of the non-zero basis functions over one element."""

    def __init__(self, basis_set, q):
        mesh = basis_set.mesh
        self.q = q
        self.corners = []
        node_ids = []
        node_index = {}
        self.scatter = []
        for j in (1, 2, 3, 4):
            v = int(mesh.quads[q][j - 1])
            cb = basis_set.chart(v)
            f = cb.fan_index_by_quad[q]
            s, m = cb.descriptor.slot_of(f)
            self.corners.append((j, cb, s, m))
            cols = []
            for gid in cb.node_ids:
                if gid not in node_index:
                    node_index[gid] = len(node_ids)
                    node_ids.append(gid)
                cols.append(node_index[gid])
            self.scatter.append(np.array(cols, dtype=int))
        self.node_ids = np.array(node_ids, dtype=int)
        self.blending = basis_set.blending

    def evaluate(self, eta, order=2):
        """Basis values and eta-derivatives: (N, dN, d2N) with shapes
        (n, nen), (n, nen, 2), (n, nen, 2, 2)."""
        eta = np.atleast_2d(np.asarray(eta, dtype=float))
        n = len(eta)
        nen = len(self.node_ids)
        N = np.zeros((n, nen))
        dN = np.zeros((n, nen, 2)) if order >= 1 else None
        d2N = np.zeros((n, nen, 2, 2)) if order >= 2 else None
        for (j, cb, s, m), cols in zip(self.corners, self.scatter):
            xy = corner_local(eta, j)
            P, dP, ddP = cb.space.eval(s, m, xy, order)
            R = maps.ROTATIONS[j - 1]
            g = P @ cb.A
            w, dw, d2w = blending_corner(eta, j, self.blending)
            N[:, cols] += w[:, None] * g
            if order >= 1:
                dg = np.einsum("nka,kc->nca", np.einsum(
                    "nki,ia->nka", dP, R), cb.A)
                dN[:, cols, :] += dw[:, None, :] * g[:, :, None] \
                    + w[:, None, None] * dg
            if order >= 2:
                ddg = np.einsum("nkij,ia,jb->nkab", ddP, R, R)
                ddg = np.einsum("nkab,kc->ncab", ddg, cb.A)
                d2N[:, cols, :, :] += (
                    d2w[:, None, :, :] * g[:, :, None, None]
                    + dw[:, None, :, None] * dg[:, :, None, :]
                    + dw[:, None, None, :] * dg[:, :, :, None]
                    + w[:, None, None, None] * ddg)
        return N, dN, d2N


class BasisSet:
    """All charts of a mesh plus per-element evaluators."""

    def __init__(self, mesh, beta=1.0, blending="polynomial"):
        self.mesh = mesh
        self.beta = beta
        self.blending = blending
        self._charts = {}
        self._elements = {}
        self._lock = threading.Lock()

    def chart(self, v):
        cb = self._charts.get(v)
        if cb is None:
            desc = self.mesh.classify_chart(v)
            cb = ChartBasis(self.mesh, desc, self.beta)
            with self._lock:
                cb = self._charts.setdefault(v, cb)
        return cb

    def element(self, q):
        eb = self._elements.get(q)
        if eb is None:
            eb = ElementBasis(self, q)
            with self._lock:
                eb = self._elements.setdefault(q, eb)
        return eb


def evaluate_surface(basis_set, positions, q, eta, order=2):
    """Surface point and geometric quantities from nodal positions.

    Returns (x, a, a3, da3) where a[:, :, alpha] are the tangents, a3 the
    unit normal and da3[:, :, alpha] its parametric derivatives (order 2).
    """
    eb = basis_set.element(q)
    N, dN, d2N = eb.evaluate(eta, order)
    pos = np.asarray(positions, dtype=float)[eb.node_ids]
    x = N @ pos
    if order == 0:
        return x, None, None, None
    a = np.einsum("nka,kc->nca", dN, pos)          # (n, 3, 2)
    cross = np.cross(a[:, :, 0], a[:, :, 1])
    norm = np.linalg.norm(cross, axis=1)
    scale = np.max(np.abs(pos))
    if np.any(norm < 1e-14 * max(scale * scale, 1e-30)):
        raise ValueError("collapsed element: |a1 x a2| ~ 0 in element %d"
                         % q)
    a3 = cross / norm[:, None]
    if order < 2:
        return x, a, a3, None
    x_ab = np.einsum("nkab,kc->ncab", d2N, pos)    # (n, 3, 2, 2)
    da3 = np.empty((len(x), 3, 2))
    for al in range(2):
        dcross = np.cross(x_ab[:, :, 0, al], a[:, :, 1]) \
            + np.cross(a[:, :, 0], x_ab[:, :, 1, al])
        proj = dcross - a3 * np.sum(a3 * dcross, axis=1)[:, None]
        da3[:, :, al] = proj / norm[:, None]
    return x, a, a3, da3


def univariate_basis(x, kind="polynomial"):
    """One-dimensional model of the construction on the two-element line
    [0, 2]: the centre chart carries a quadratic local space over its
    two-element domain, the end charts a linear space over their single
    element, and the element bases are blended with the univariate
    partition-of-unity weights.

    Five global nodes at x = 0, 0.5, 1, 1.5, 2 (vertices and element
    midpoints); exactly these five functions are non-zero over the two
    elements.  Returns (N, dN, d2N) of shape (npts, 5).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))

    def fitted(powers, xi_nodes):
        V = np.vander(np.asarray(xi_nodes), len(powers), increasing=True)
        return np.linalg.pinv(V)

    # chart coordinate of each chart is x - centre; least-squares fit of
    # the local polynomial to the chart's node values
    charts = {
        0.0: (1, fitted((0, 1), [0.0, 0.5, 1.0]), [0, 1, 2]),
        1.0: (2, fitted((0, 1, 2), [-1.0, -0.5, 0.0, 0.5, 1.0]),
              [0, 1, 2, 3, 4]),
        2.0: (1, fitted((0, 1), [-1.0, -0.5, 0.0]), [2, 3, 4]),
    }

    N = np.zeros((len(x), 5))
    dN = np.zeros((len(x), 5))
    d2N = np.zeros((len(x), 5))
    elem = np.clip(np.floor(x), 0, 1)
    t = x - elem
    w, dw, d2w = blending_univariate(t, kind)
    for m in (0.0, 1.0):
        sel = elem == m
        if not np.any(sel):
            continue
        for side, centre in ((0, m), (1, m + 1.0)):
            deg, A, cols = charts[centre]
            xi = x[sel] - centre
            P = np.vander(xi, deg + 1, increasing=True)
            dP = np.zeros_like(P)
            d2P = np.zeros_like(P)
            dP[:, 1:] = P[:, :-1] * np.arange(1, deg + 1)
            if deg >= 2:
                d2P[:, 2:] = P[:, :-2] * np.arange(2, deg + 1) \
                    * np.arange(1, deg)
            g = P @ A
            dg = dP @ A
            d2g = d2P @ A
            ws, dws, d2ws = w[sel, side], dw[sel, side], d2w[sel, side]
            N[np.ix_(sel, cols)] += ws[:, None] * g
            dN[np.ix_(sel, cols)] += dws[:, None] * g + ws[:, None] * dg
            d2N[np.ix_(sel, cols)] += (d2ws[:, None] * g
                                       + 2.0 * dws[:, None] * dg
                                       + ws[:, None] * d2g)
    return N, dN, d2N
