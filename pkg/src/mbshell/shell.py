"""Kirchhoff-Love thin-shell mechanics on the manifold basis.

Displacement-only formulation: three translational degrees of freedom per
basis node.  Membrane and bending strains are measured against the
reference configuration; the internal residual is assembled analytically
and the tangent stiffness by central finite differences of the element
residual (batched over perturbed configurations), which keeps the code
free of fourth-order variation algebra.

Boundary conditions: nodal constraints for displacements, a rotation
penalty along clamped edges and a joint penalty that keeps creased joint
lines rigid (the basis itself is only C0 across creases, so a crease acts
as a hinge unless penalized).
"""

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .basis import BasisSet

# eta parameterisations of the four element edges, edge i running from
# quad vertex i to vertex i+1
_EDGE_POINT = [
    lambda t: np.stack([t, np.zeros_like(t)], axis=-1),
    lambda t: np.stack([np.ones_like(t), t], axis=-1),
    lambda t: np.stack([1.0 - t, np.ones_like(t)], axis=-1),
    lambda t: np.stack([np.zeros_like(t), 1.0 - t], axis=-1),
]
_EDGE_DIR = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])


def gauss_rule_1d(n, cells=4):
    """Composite Gauss-Legendre rule on [0, 1] with `cells` equal
    sub-intervals.  The blending weights are piecewise polynomial with
    breakpoints at the quarter points, so a composite rule keeps every
    integrand panel-smooth."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0) / cells
    w = 0.5 * w / cells
    xs = np.concatenate([x + i / cells for i in range(cells)])
    ws = np.tile(w, cells)
    return xs, ws


def gauss_rule(n, cells=4):
    """Tensor composite Gauss rule on the unit square."""
    x, w = gauss_rule_1d(n, cells)
    pts = np.array([(a, b) for b in x for a in x])
    wts = np.array([wa * wb for wb in w for wa in w])
    return pts, wts


def material_tensor(M, E, nu):
    """Plane-stress Hooke tensor C^abcd from the contravariant metric M."""
    M = np.asarray(M, dtype=float)
    f = E / (1.0 - nu * nu)
    return f * (nu * np.einsum("...ab,...cd->...abcd", M, M)
                + 0.5 * (1.0 - nu)
                * (np.einsum("...ac,...bd->...abcd", M, M)
                   + np.einsum("...ad,...bc->...abcd", M, M)))


def hooke_contraction(M, eps, E, nu):
    """C : eps without forming the fourth-order tensor."""
    f = E / (1.0 - nu * nu)
    Me = np.einsum("qab,...qbc->...qac", M, eps)
    tr = np.einsum("...qaa->...q", Me)
    MeM = np.einsum("...qab,qbc->...qac", Me, M)
    return f * (nu * tr[..., None, None] * M + (1.0 - nu) * MeM)


class Material:
    def __init__(self, E, nu, thickness):
        self.E = float(E)
        self.nu = float(nu)
        self.thickness = float(thickness)


class ShellModel:
    """Assembled thin-shell problem over a control mesh."""

    def __init__(self, mesh, material, beta=1.0, blending="polynomial",
                 quadrature=3, cells=4, positions=None, penalty_scale=100.0):
        self.mesh = mesh
        self.material = material
        self.basis = BasisSet(mesh, beta=beta, blending=blending)
        self.quadrature = quadrature
        self.cells = cells
        self.X = (np.asarray(positions, dtype=float) if positions is not None
                  else mesh.node_positions())
        self.ndof = 3 * mesh.n_nodes
        self.penalty_scale = penalty_scale
        self._tables = {}
        self._eval_cache = {}
        self._geom_cache = {}
        self._groups = None
        self._edge_map = None
        self.fixed = {}           # dof index -> prescribed displacement
        self.f_ext = np.zeros(self.ndof)
        self.clamped = []         # element edge terms
        self.joints = []          # paired element edge terms
        # small step: the penalty terms and crease-element residuals carry
        # large third derivatives, and central-difference truncation error
        # in the tangent otherwise pollutes fine-mesh solves
        self._fd_step = 1e-7 * max(np.max(np.ptp(self.X, axis=0)), 1.0)

    # -- boundary conditions and loads --------------------------------------

    def _edge_elements(self, a, b):
        if self._edge_map is None:
            self._edge_map = {}
            for q, quad in enumerate(self.mesh.quads):
                for i in range(4):
                    key = tuple(sorted((int(quad[i]), int(quad[(i + 1) % 4]))))
                    self._edge_map.setdefault(key, []).append((q, i))
        return self._edge_map[tuple(sorted((int(a), int(b))))]

    def fix_node(self, node, components=(0, 1, 2), value=0.0):
        for c in np.atleast_1d(components):
            self.fixed[3 * int(node) + int(c)] = float(value)

    def fix_vertex(self, v, components=(0, 1, 2), value=0.0):
        self.fix_node(self.mesh.vertex_node(v), components, value)

    def add_point_force(self, q, eta, force):
        eb = self.basis.element(q)
        N, _, _ = eb.evaluate(np.atleast_2d(eta), order=0)
        for k, gid in enumerate(eb.node_ids):
            self.f_ext[3 * gid:3 * gid + 3] += N[0, k] * np.asarray(force)

    def add_pressure(self, load):
        """Uniform dead load per unit reference area (3-vector)."""
        load = np.asarray(load, dtype=float)
        for q in range(self.mesh.n_quads):
            tab = self.element_tables(q)
            f = np.einsum("q,qk,c->kc", tab["wdA"], tab["N"], load)
            gid = tab["nodes"]
            np.add.at(self.f_ext.reshape(-1, 3), gid, f)

    def clamp_edge(self, a, b, weight=None):
        """Penalize normal rotation along the boundary edge (a, b)."""
        elems = self._edge_elements(a, b)
        if len(elems) != 1:
            raise ValueError("clamped edge (%d, %d) is not a boundary edge"
                             % (a, b))
        self.clamped.append(self._edge_term(elems[0], weight))

    def rigid_joint(self, a, b, weight=None):
        """Penalize dihedral-angle change across the interior crease (a, b)."""
        elems = self._edge_elements(a, b)
        if len(elems) != 2:
            raise ValueError("joint edge (%d, %d) is not interior" % (a, b))
        left = self._edge_term(elems[0], weight, orient=(a, b))
        right = self._edge_term(elems[1], weight, orient=(a, b))
        self.joints.append((left, right))

    def _edge_term(self, qe, weight, orient=None):
        q, i = qe
        quad = self.mesh.quads[q]
        v0, v1 = int(quad[i]), int(quad[(i + 1) % 4])
        reverse = orient is not None and (v0, v1) != tuple(orient)
        t, w = gauss_rule_1d(self.quadrature, self.cells)
        s = 1.0 - t if reverse else t
        eta = _EDGE_POINT[i](s)
        d_eta = (-1.0 if reverse else 1.0) * _EDGE_DIR[i]
        eb = self.basis.element(q)
        N, dN, d2N = eb.evaluate(eta)
        Xl = self.X[eb.node_ids]
        dNt = dN @ d_eta                      # (nq, nen) edge-tangent rows
        Xt = np.einsum("qk,kc->qc", dNt, Xl)
        ds = np.linalg.norm(Xt, axis=1)
        gamma = (weight if weight is not None else
                 self.penalty_scale * self.material.E
                 * self.material.thickness)
        return {"q": q, "nodes": eb.node_ids, "N": N, "dN": dN, "dNt": dNt,
                "w": w * ds * gamma, "A3": _normals(dN, Xl[None])[0][0],
                "T": Xt / ds[:, None]}

    # -- element tables -----------------------------------------------------

    def basis_signature(self, q):
        """Elements whose corner charts have the same layouts and the same
        local scatter structure share identical basis tables."""
        eb = self.basis.element(q)
        layout = tuple((cb.descriptor.layout_key(), cb.beta, s, m)
                       for (_, cb, s, m) in eb.corners)
        return (layout, tuple(tuple(c) for c in eb.scatter))

    def _geometry_key(self, q, x):
        """Elements with the same basis tables and the same relative node
        positions have identical geometry tables and stiffness blocks."""
        return (self.basis_signature(q), np.round(x - x[0], 9).tobytes())

    def element_tables(self, q):
        tab = self._tables.get(q)
        if tab is not None:
            return tab
        eb = self.basis.element(q)
        sig = self.basis_signature(q)
        ev = self._eval_cache.get(sig)
        if ev is None:
            pts, wts = gauss_rule(self.quadrature, self.cells)
            ev = (pts, wts) + eb.evaluate(pts)
            self._eval_cache[sig] = ev
        pts, wts, N, dN, d2N = ev
        Xl = self.X[eb.node_ids]
        key = (sig, np.round(Xl - Xl[0], 9).tobytes())
        geom = self._geom_cache.get(key)
        if geom is None:
            A = np.einsum("qka,kc->qca", dN, Xl)
            X_ab = np.einsum("qkab,kc->qcab", d2N, Xl)
            cross = np.cross(A[:, :, 0], A[:, :, 1])
            dA = np.linalg.norm(cross, axis=1)
            A3 = cross / dA[:, None]
            Acov = np.einsum("qca,qcb->qab", A, A)
            Aab = np.linalg.inv(Acov)
            geom = {"pts": pts, "w": wts, "N": N, "dN": dN, "d2N": d2N,
                    "A": A, "X_ab": X_ab, "A3": A3, "Aab": Aab,
                    "wdA": wts * dA,
                    "B_ref": np.einsum("qcab,qc->qab", X_ab, A3)}
            self._geom_cache[key] = geom
        tab = dict(geom)
        tab["nodes"] = eb.node_ids
        self._tables[q] = tab
        return tab

    def element_groups(self):
        """Element ids grouped by shared basis and geometry tables."""
        if self._groups is None:
            groups = {}
            for q in range(self.mesh.n_quads):
                x = self.X[self.basis.element(q).node_ids]
                groups.setdefault(self._geometry_key(q, x), []).append(q)
            self._groups = list(groups.values())
        return self._groups

    # -- kinematics ---------------------------------------------------------

    def strains(self, q, positions):
        """Membrane and bending strain at the element quadrature points."""
        tab = self.element_tables(q)
        x = np.asarray(positions, dtype=float)[tab["nodes"]][None]
        alpha, beta = _strain_fields(tab, x)
        return alpha[0], beta[0]

    def _stress(self, tab, alpha, beta):
        mat = self.material
        t = mat.thickness
        n = t * hooke_contraction(tab["Aab"], alpha, mat.E, mat.nu)
        m = (t ** 3 / 12.0) * hooke_contraction(tab["Aab"], beta,
                                                mat.E, mat.nu)
        return n, m

    # -- energy and residual ------------------------------------------------

    def energy(self, u):
        positions = self.X + u.reshape(-1, 3)
        E = 0.0
        for q in range(self.mesh.n_quads):
            tab = self.element_tables(q)
            x = positions[tab["nodes"]][None]
            alpha, beta = _strain_fields(tab, x)
            n, m = self._stress(tab, alpha, beta)
            dens = 0.5 * (np.einsum("bqde,bqde->bq", n, alpha)
                          + np.einsum("bqde,bqde->bq", m, beta))
            E += float(np.dot(tab["wdA"], dens[0]))
        E += self._penalty_energy(positions)
        return E

    def _penalty_energy(self, positions):
        E = 0.0
        for term in self.clamped:
            x = positions[term["nodes"]][None]
            a3 = _normals(term["dN"], x)[0]
            diff = a3[0] - term["A3"]
            E += 0.5 * float(np.dot(term["w"], np.sum(diff * diff, axis=1)))
        for left, right in self.joints:
            g1, g2 = self._joint_gaps(left, right, positions)
            E += 0.5 * float(np.dot(left["w"], g1 * g1 + g2 * g2))
        return E

    def _joint_gaps(self, left, right, positions):
        xl = positions[left["nodes"]][None]
        xr = positions[right["nodes"]][None]
        a3l = _normals(left["dN"], xl)[0][0]
        a3r = _normals(right["dN"], xr)[0][0]
        xt = np.einsum("qk,kc->qc", left["dNt"], positions[left["nodes"]])
        that = xt / np.linalg.norm(xt, axis=1)[:, None]
        g1 = np.sum(a3l * a3r, axis=1) - np.sum(left["A3"] * right["A3"],
                                                axis=1)
        g2 = (np.sum(np.cross(a3l, a3r) * that, axis=1)
              - np.sum(np.cross(left["A3"], right["A3"]) * left["T"], axis=1))
        return g1, g2

    def element_residual(self, q, x):
        """Internal residual of one element; x has shape (B, nen, 3)."""
        tab = self.element_tables(q)
        alpha, beta = _strain_fields(tab, x)
        n, m = self._stress(tab, alpha, beta)
        a, x_ab, a3, norm = _surface(tab, x)
        wdA = tab["wdA"]
        dN, d2N = tab["dN"], tab["d2N"]
        r = np.einsum("q,bqad,bqcd,qka->bkc", wdA, n, a, dN, optimize=True)
        r -= np.einsum("q,bqad,bqc,qkad->bkc", wdA, m, a3, d2N, optimize=True)
        Wv = np.einsum("bqde,bqcde->bqc", m, x_ab, optimize=True)
        Wv = (Wv - a3 * np.einsum("bqc,bqc->bq", a3, Wv)[..., None]) \
            / norm[..., None]
        a2xv = np.cross(a[:, :, :, 1], Wv)
        vxa1 = np.cross(Wv, a[:, :, :, 0])
        r -= np.einsum("q,bqc,qk->bkc", wdA, a2xv, dN[:, :, 0])
        r -= np.einsum("q,bqc,qk->bkc", wdA, vxa1, dN[:, :, 1])
        return r

    def _clamp_residual(self, term, x):
        """Clamped-edge penalty residual; x has shape (B, nen, 3)."""
        a3, norm, a = _normals(term["dN"], x)
        z = a3 - term["A3"]
        z = (z - a3 * np.einsum("bqc,bqc->bq", a3, z)[..., None]) \
            / norm[..., None]
        a2xz = np.cross(a[:, :, :, 1], z)
        zxa1 = np.cross(z, a[:, :, :, 0])
        r = np.einsum("q,bqc,qk->bkc", term["w"], a2xz, term["dN"][:, :, 0])
        r += np.einsum("q,bqc,qk->bkc", term["w"], zxa1, term["dN"][:, :, 1])
        return r

    def _joint_residual(self, left, right, xl, xr):
        """Joint penalty residual on (left nodes, right nodes); batched."""
        a3l, norml, al = _normals(left["dN"], xl)
        a3r, normr, ar = _normals(right["dN"], xr)
        xt = np.einsum("qk,bkc->bqc", left["dNt"], xl)
        lt = np.linalg.norm(xt, axis=2)
        that = xt / lt[..., None]
        g1 = (np.einsum("bqc,bqc->bq", a3l, a3r)
              - np.sum(left["A3"] * right["A3"], axis=1))
        g2 = (np.einsum("bqc,bqc->bq", np.cross(a3l, a3r), that)
              - np.sum(np.cross(left["A3"], right["A3"]) * left["T"], axis=1))
        w = left["w"]

        def normal_rows(term, a3, norm, a, y):
            # r_I[c] from y . delta a3 of one side
            z = (y - a3 * np.einsum("bqc,bqc->bq", a3, y)[..., None]) \
                / norm[..., None]
            a2xz = np.cross(a[:, :, :, 1], z)
            zxa1 = np.cross(z, a[:, :, :, 0])
            r = np.einsum("q,bqc,qk->bkc", w, a2xz, term["dN"][:, :, 0])
            r += np.einsum("q,bqc,qk->bkc", w, zxa1, term["dN"][:, :, 1])
            return r

        yl = g1[..., None] * a3r + g2[..., None] * np.cross(a3r, that)
        yr = g1[..., None] * a3l + g2[..., None] * np.cross(that, a3l)
        rl = normal_rows(left, a3l, norml, al, yl)
        rr = normal_rows(right, a3r, normr, ar, yr)
        # variation of the edge tangent (edge trace shared by both sides,
        # expressed through the left element rows)
        zt = np.cross(a3l, a3r)
        zt = (zt - that * np.einsum("bqc,bqc->bq", that, zt)[..., None]) \
            / lt[..., None]
        rl += np.einsum("q,bq,bqc,qk->bkc", w, g2, zt, left["dNt"])
        return rl, rr

    def residual(self, u):
        """Global residual: internal + penalties - external."""
        positions = self.X + u.reshape(-1, 3)
        r = np.zeros((self.mesh.n_nodes, 3))
        for group in self.element_groups():
            nodes = np.array([self.element_tables(q)["nodes"]
                              for q in group])
            re = self.element_residual(group[0], positions[nodes])
            np.add.at(r, nodes.ravel(), re.reshape(-1, 3))
        for term in self.clamped:
            re = self._clamp_residual(term, positions[term["nodes"]][None])
            np.add.at(r, term["nodes"], re[0])
        for left, right in self.joints:
            rl, rr = self._joint_residual(
                left, right, positions[left["nodes"]][None],
                positions[right["nodes"]][None])
            np.add.at(r, left["nodes"], rl[0])
            np.add.at(r, right["nodes"], rr[0])
        return r.ravel() - self.f_ext

    # -- tangent stiffness --------------------------------------------------

    def _fd_block(self, fn, x):
        """Central finite differences of a batched residual function."""
        nen = x.shape[0]
        h = self._fd_step
        batch = np.repeat(x[None], 6 * nen, axis=0)
        idx = 0
        for k in range(nen):
            for c in range(3):
                batch[idx, k, c] += h
                batch[idx + 1, k, c] -= h
                idx += 2
        r = fn(batch)
        K = (r[0::2] - r[1::2]) / (2.0 * h)     # (3*nen, nen, 3)
        return K.reshape(3 * nen, 3 * nen).T

    def stiffness(self, u):
        positions = self.X + u.reshape(-1, 3)
        rows, cols, vals = [], [], []
        cache = {}

        def add(K, nodes):
            dof = (3 * np.asarray(nodes)[:, None]
                   + np.arange(3)[None, :]).ravel()
            rows.append(np.repeat(dof, len(dof)))
            cols.append(np.tile(dof, len(dof)))
            vals.append(K.ravel())

        for q in range(self.mesh.n_quads):
            tab = self.element_tables(q)
            x = positions[tab["nodes"]]
            key = self._geometry_key(q, x)
            K = cache.get(key)
            if K is None:
                K = self._fd_block(lambda b: self.element_residual(q, b), x)
                cache[key] = K
            add(K, tab["nodes"])
        for K, nodes in self._penalty_blocks(positions):
            add(K, nodes)
        K = scipy.sparse.coo_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.ndof, self.ndof)).tocsc()
        return 0.5 * (K + K.T)

    def _penalty_blocks(self, positions):
        for term in self.clamped:
            x = positions[term["nodes"]]
            K = self._fd_block(lambda b: self._clamp_residual(term, b), x)
            yield K, term["nodes"]
        for left, right in self.joints:
            nl = len(left["nodes"])
            xu = np.vstack([positions[left["nodes"]],
                            positions[right["nodes"]]])

            def joint_fn(b):
                rl, rr = self._joint_residual(left, right, b[:, :nl],
                                              b[:, nl:])
                return np.concatenate([rl, rr], axis=1)

            K = self._fd_block(joint_fn, xu)
            yield K, np.concatenate([left["nodes"], right["nodes"]])

    def _reference_block(self, q):
        """Analytic element tangent at the stress-free reference."""
        tab = self.element_tables(q)
        mat = self.material
        dN, d2N = tab["dN"], tab["d2N"]
        A, A3, X_ab = tab["A"], tab["A3"], tab["X_ab"]
        nen = dN.shape[1]
        # membrane strain variation
        Bm = 0.5 * (np.einsum("qca,qkb->qabkc", A, dN)
                    + np.einsum("qcb,qka->qabkc", A, dN))
        # normal variation, projected tangent to the surface
        E3 = np.eye(3)
        c1 = np.cross(E3[None], A[:, None, :, 1])
        c2 = np.cross(A[:, None, :, 0], E3[None])
        dA = tab["wdA"] / tab["w"]
        da3 = (np.einsum("qci,qk->qkci", c1, dN[:, :, 0])
               + np.einsum("qci,qk->qkci", c2, dN[:, :, 1])) \
            / dA[:, None, None, None]
        da3 -= A3[:, None, None, :] \
            * np.einsum("qi,qkci->qkc", A3, da3)[..., None]
        # bending strain variation
        Bb = -(np.einsum("qkab,qc->qabkc", d2N, A3)
               + np.einsum("qiab,qkci->qabkc", X_ab, da3))
        C = material_tensor(tab["Aab"], mat.E, mat.nu)
        t = mat.thickness
        K = np.einsum("q,qabkc,qabde,qdelf->kclf", tab["wdA"], Bm,
                      t * C, Bm, optimize=True)
        K += np.einsum("q,qabkc,qabde,qdelf->kclf", tab["wdA"], Bb,
                       (t ** 3 / 12.0) * C, Bb, optimize=True)
        return K.reshape(3 * nen, 3 * nen)

    def reference_stiffness(self):
        """Tangent stiffness at the reference configuration.

        Strains and penalty gaps vanish in the reference state, so the
        element tangent reduces to its material part, which is assembled
        analytically from the strain variations.  This is much faster than
        differencing the residual and is what `solve_linear` uses."""
        rows, cols, vals = [], [], []
        cache = {}

        def add(K, nodes):
            dof = (3 * np.asarray(nodes)[:, None]
                   + np.arange(3)[None, :]).ravel()
            rows.append(np.repeat(dof, len(dof)))
            cols.append(np.tile(dof, len(dof)))
            vals.append(K.ravel())

        for group in self.element_groups():
            K = self._reference_block(group[0])
            for q in group:
                add(K, self.element_tables(q)["nodes"])
        for K, nodes in self._penalty_blocks(self.X):
            add(K, nodes)
        K = scipy.sparse.coo_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.ndof, self.ndof)).tocsc()
        return 0.5 * (K + K.T)

    # -- solvers ------------------------------------------------------------

    def _free_dofs(self):
        mask = np.ones(self.ndof, dtype=bool)
        for dof in self.fixed:
            mask[dof] = False
        return np.flatnonzero(mask)

    def _apply_fixed(self, u):
        for dof, val in self.fixed.items():
            u[dof] = val
        return u

    def solve_linear(self):
        """One tangent solve about the reference configuration."""
        u = self._apply_fixed(np.zeros(self.ndof))
        free = self._free_dofs()
        K = self.reference_stiffness()
        # the reference state is strain-free, so with no prescribed motion
        # the residual is just the load vector
        r = self.residual(u) if np.any(u) else -self.f_ext
        du = scipy.sparse.linalg.spsolve(K[np.ix_(free, free)], -r[free])
        u[free] += du
        return u

    def solve_newton(self, rtol=1e-8, atol=1e-12, max_iter=30, verbose=False,
                     u0=None):
        u = self._apply_fixed(u0.copy() if u0 is not None
                              else np.zeros(self.ndof))
        free = self._free_dofs()
        ref = max(np.linalg.norm(self.f_ext[free]), 1.0)
        history = []
        for it in range(max_iter):
            r = self.residual(u)
            rn = np.linalg.norm(r[free])
            history.append(rn)
            if verbose:
                print("newton iter %2d  |r| = %.3e" % (it, rn))
            if rn <= atol + rtol * ref:
                return u, history
            K = self.stiffness(u)
            du = scipy.sparse.linalg.spsolve(K[np.ix_(free, free)], -r[free])
            u[free] += du
        raise RuntimeError("Newton failed to converge: |r| = %.3e after %d "
                           "iterations" % (history[-1], max_iter))


def _surface(tab, x):
    a = np.einsum("qka,bkc->bqca", tab["dN"], x)
    x_ab = np.einsum("qkde,bkc->bqcde", tab["d2N"], x, optimize=True)
    cross = np.cross(a[:, :, :, 0], a[:, :, :, 1], axis=2)
    norm = np.linalg.norm(cross, axis=2)
    if not np.all(norm > 0.0):
        raise ValueError("collapsed element configuration")
    a3 = cross / norm[..., None]
    return a, x_ab, a3, norm


def _strain_fields(tab, x):
    a, x_ab, a3, _ = _surface(tab, x)
    acov = np.einsum("bqca,bqcd->bqad", a, a)
    Acov = np.einsum("qca,qcb->qab", tab["A"], tab["A"])
    alpha = 0.5 * (acov - Acov[None])
    bend = -(np.einsum("bqcde,bqc->bqde", x_ab, a3, optimize=True) - tab["B_ref"][None])
    return alpha, bend


def _normals(dN, x):
    a = np.einsum("qka,bkc->bqca", dN, x)
    cross = np.cross(a[:, :, :, 0], a[:, :, :, 1], axis=2)
    norm = np.linalg.norm(cross, axis=2)
    return cross / norm[..., None], norm, a
