"""Benchmark geometries, error norms and the convergence-study harness.

Three experiment families: a propped-cantilever plate strip (with an
optional midspan hinge line), a square plate (all-sides simply supported
or two sides clamped) on structured and unstructured mesh families, and a
pinched square tube with creased longitudinal joints solved with Newton
continuation.
"""

import time

import numpy as np

from . import oracles
from .generators import grid_mesh
from .meshes import ControlMesh
from .shell import Material, ShellModel, gauss_rule


# -- mesh surgery -----------------------------------------------------------

def rotate_edge(mesh, u, v):
    """Quad edge rotation: remove edge (u, v), insert the rotated diagonal.

    Turns the two incident quads (u,v,a,b), (v,u,c,d) into (a,b,u,c) and
    (c,d,v,a); u and v lose one neighbour, a and c gain one."""
    u, v = int(u), int(v)
    quads = [list(map(int, qd)) for qd in mesh.quads]
    inc = [i for i, qd in enumerate(quads) if u in qd and v in qd]
    if len(inc) != 2:
        raise ValueError("edge (%d, %d) is not interior" % (u, v))
    q1 = q2 = None
    for i in inc:
        qd = quads[i]
        p = qd.index(u)
        if qd[(p + 1) % 4] == v:
            q1, p1 = i, p
        else:
            q2, p2 = i, qd.index(v)
    a, b = quads[q1][(p1 + 2) % 4], quads[q1][(p1 + 3) % 4]
    c, d = quads[q2][(p2 + 2) % 4], quads[q2][(p2 + 3) % 4]
    quads[q1] = [a, b, u, c]
    quads[q2] = [c, d, v, a]
    creases = [mesh.edge_verts[e] for e in mesh.crease_ids
               if set(mesh.edge_verts[e]) != {u, v}]
    return ControlMesh(mesh.vertices, quads, creases,
                       concave_tags=mesh.concave_tags)


def smooth_interior(mesh, iterations=20, relax=0.7):
    """Laplacian smoothing of vertices not on a boundary or crease edge."""
    fixed = set()
    for a, b in mesh.crease_edges:
        fixed.update((a, b))
    for v in range(mesh.n_vertices):
        if mesh.is_boundary_vertex(v):
            fixed.add(v)
    nbrs = {v: set() for v in range(mesh.n_vertices)}
    for a, b in mesh.edge_verts:
        nbrs[a].add(b)
        nbrs[b].add(a)
    pos = np.array(mesh.vertices, dtype=float)
    for _ in range(iterations):
        new = pos.copy()
        for v in range(mesh.n_vertices):
            if v in fixed:
                continue
            avg = np.mean(pos[sorted(nbrs[v])], axis=0)
            new[v] = (1.0 - relax) * pos[v] + relax * avg
        pos = new
    creases = [mesh.edge_verts[e] for e in mesh.crease_ids]
    return ControlMesh(pos, mesh.quads, creases,
                       concave_tags=mesh.concave_tags)


def refine_surface(mesh):
    """Catmull-Clark split with the child control points placed on the
    parent's manifold surface at the subdivided lattice parameters.

    Keeping the control net on the surface keeps the geometry close to the
    chart-natural configuration around extraordinary vertices, which the
    plain midpoint rules progressively distort.  Planar regions, straight
    crease lines and straight boundary segments are reproduced exactly, so
    the benchmark geometries are preserved."""
    from .basis import LATTICE, BasisSet, evaluate_surface
    bs = BasisSet(mesh)
    pos = mesh.node_positions()
    fine = mesh.refine()
    verts = np.array(fine.vertices)
    pts = np.array(LATTICE)
    nv, ne = mesh.n_vertices, mesh.n_edges
    for q in range(mesh.n_quads):
        x, _, _, _ = evaluate_surface(bs, pos, q, pts, order=0)
        quad = [int(c) for c in mesh.quads[q]]
        ids = [quad[0],
               nv + mesh.edge_ids[mesh._ekey(quad[0], quad[1])],
               quad[1],
               nv + mesh.edge_ids[mesh._ekey(quad[0], quad[3])],
               nv + ne + q,
               nv + mesh.edge_ids[mesh._ekey(quad[1], quad[2])],
               quad[3],
               nv + mesh.edge_ids[mesh._ekey(quad[3], quad[2])],
               quad[2]]
        verts[ids] = x
    return ControlMesh(verts, fine.quads, fine.crease_edges,
                       fine.concave_tags)


def refine_times(mesh, k, surface=False):
    for _ in range(k):
        mesh = refine_surface(mesh) if surface else mesh.refine()
    return mesh


# -- benchmark meshes -------------------------------------------------------

BEAM = dict(L=10.0, width=2.5, E=1.0e7, nu=0.0, t=0.1, q=1.0)
PLATE = dict(a=1.0, E=1.0e7, nu=0.3, t=0.01, q=1.0)
TUBE = dict(L=200.0, side=100.0, E=3.0e4, nu=0.3, t=1.0)


def beam_mesh(level, hinge=False):
    # the solution is cylindrical, so the strip keeps one element across
    # the width and refines along the length only
    nx = 16 * 2 ** level
    L, W = BEAM["L"], BEAM["width"]
    creases = [(nx // 2, nx // 2 + nx + 1)] if hinge else []
    return grid_mesh(nx, 1, lx=L, ly=W, creases=creases)


def plate_mesh(level, unstructured=False, bc="ssss", hinge=False):
    n = 6
    a = PLATE["a"]
    y0 = -a / 2.0 if bc == "scsc" else 0.0
    creases = []
    if hinge:
        creases = [(n // 2 + j * (n + 1), n // 2 + (j + 1) * (n + 1))
                   for j in range(n)]
    mesh = grid_mesh(n, n, lx=a, ly=a, y0=y0, creases=creases)
    if unstructured:
        def vid(i, j):
            return j * (n + 1) + i
        mesh = rotate_edge(mesh, vid(1, 2), vid(2, 2))
        mesh = rotate_edge(mesh, vid(3, 4), vid(4, 4))
        mesh = smooth_interior(mesh)
    return refine_times(mesh, level)


def tube_mesh(level=0, unstructured=False):
    """Square tube, axis along x, creased longitudinal corner lines."""
    L, s = TUBE["L"], TUBE["side"]
    m = 8 * 2 ** level          # elements per cross-section side
    n = 16 * 2 ** level         # elements along the length
    per = 4 * m
    h = s / m

    def ring(p):
        p = p % per
        k, r = divmod(p, m)
        if k == 0:
            return (-s / 2 + r * h, s / 2)
        if k == 1:
            return (s / 2, s / 2 - r * h)
        if k == 2:
            return (s / 2 - r * h, -s / 2)
        return (-s / 2, -s / 2 + r * h)

    verts = []
    for i in range(n + 1):
        x = L * i / n
        for p in range(per):
            y, z = ring(p)
            verts.append((x, y, z))

    def vid(i, p):
        return i * per + (p % per)

    quads = [(vid(i, p), vid(i + 1, p), vid(i + 1, p + 1), vid(i, p + 1))
             for i in range(n) for p in range(per)]
    creases = [(vid(i, c * m), vid(i + 1, c * m))
               for c in range(4) for i in range(n)]
    mesh = ControlMesh(verts, quads, creases)
    if unstructured:
        # rotate one edge inside the top and the bottom face, away from
        # the load line, then relax the face interiors
        mesh = rotate_edge(mesh, vid(3, 2), vid(3, 3))
        mesh = rotate_edge(mesh, vid(n - 3, 2 * m + 2), vid(n - 3, 2 * m + 3))
        mesh = smooth_interior(mesh)
    return mesh


# -- error norms ------------------------------------------------------------

def _physical_hessian(J, G, du, d2u):
    """Push eta-derivatives of a scalar through the planar geometry map."""
    Jinv = np.linalg.inv(J)
    gx = np.einsum("qa,qab->qb", du, Jinv)
    rhs = d2u - np.einsum("qc,qcab->qab", gx, G)
    hx = np.einsum("qca,qcd,qdb->qab", Jinv, rhs, Jinv)
    return gx, hx


def flat_error_norms(model, u, oracle, quadrature=(3, 4)):
    """Relative L2 and bending-energy norms of the transverse deflection
    error against an oracle (w, wxx, wyy, wxy) = oracle(x, y) for a flat
    reference in the z = 0 plane."""
    mesh = model.mesh
    pts, wts = gauss_rule(*quadrature)
    mat = model.material
    D = oracles.bending_stiffness(mat.E, mat.thickness, mat.nu)
    nu = mat.nu
    uz = u.reshape(-1, 3)[:, 2]
    num_l2 = den_l2 = num_en = den_en = 0.0
    cache = {}
    for q in range(mesh.n_quads):
        eb = model.basis.element(q)
        sig = model.basis_signature(q)
        if sig not in cache:
            cache[sig] = eb.evaluate(pts)
        N, dN, d2N = cache[sig]
        Xl = model.X[eb.node_ids]
        xy = N @ Xl[:, :2]
        J = np.einsum("qka,kc->qca", dN, Xl[:, :2])
        G = np.einsum("qkab,kc->qcab", d2N, Xl[:, :2])
        dA = np.abs(np.linalg.det(J))
        wq = wts * dA
        wh = N @ uz[eb.node_ids]
        dwh = np.einsum("qka,k->qa", dN, uz[eb.node_ids])
        d2wh = np.einsum("qkab,k->qab", d2N, uz[eb.node_ids])
        _, hess_h = _physical_hessian(J, G, dwh, d2wh)
        w, wxx, wyy, wxy = oracle(xy[:, 0], xy[:, 1])
        e = wh - w
        exx = hess_h[:, 0, 0] - wxx
        eyy = hess_h[:, 1, 1] - wyy
        exy = hess_h[:, 0, 1] - wxy

        def bend(axx, ayy, axy):
            return D * ((axx + ayy) ** 2
                        - 2.0 * (1.0 - nu) * (axx * ayy - axy * axy))

        num_l2 += np.dot(wq, e * e)
        den_l2 += np.dot(wq, w * w)
        num_en += np.dot(wq, bend(exx, eyy, exy))
        den_en += np.dot(wq, bend(wxx, wyy, wxy))
    return np.sqrt(num_l2 / den_l2), np.sqrt(num_en / den_en)


def compare_fields(model1, u1, model2, u2, quadrature=(3, 4)):
    """Relative L2 distance between two discrete transverse deflections.

    The models must share the element layout, but may differ in basis
    (e.g. with and without a crease); each field is evaluated with its own
    basis."""
    mesh = model1.mesh
    pts, wts = gauss_rule(*quadrature)
    z1 = u1.reshape(-1, 3)[:, 2]
    z2 = u2.reshape(-1, 3)[:, 2]
    num = den = 0.0
    cache = {}
    for q in range(mesh.n_quads):
        eb1 = model1.basis.element(q)
        eb2 = model2.basis.element(q)
        sig = (model1.basis_signature(q), model2.basis_signature(q))
        if sig not in cache:
            cache[sig] = (eb1.evaluate(pts, order=1)[0:2],
                          eb2.evaluate(pts, order=0)[0])
        (N1, dN), N2 = cache[sig]
        Xl = model1.X[eb1.node_ids]
        J = np.einsum("qka,kc->qca", dN, Xl[:, :2])
        wq = wts * np.abs(np.linalg.det(J))
        w1 = N1 @ z1[eb1.node_ids]
        w2 = N2 @ z2[eb2.node_ids]
        num += np.dot(wq, (w1 - w2) ** 2)
        den += np.dot(wq, w1 * w1)
    return np.sqrt(num / den)


# -- convergence report -----------------------------------------------------

class ConvergenceReport:
    def __init__(self, name):
        self.name = name
        self.levels = []

    def add(self, **kw):
        self.levels.append(kw)

    def rate(self, key="l2", last=3):
        rows = self.levels[-last:]
        h = np.log([r["h"] for r in rows])
        e = np.log([r[key] for r in rows])
        return float(np.polyfit(h, e, 1)[0])

    def to_csv(self, path):
        keys = ["level", "h", "dof", "l2", "energy", "seconds"]
        with open(path, "w") as fh:
            fh.write(",".join(keys) + "\n")
            for r in self.levels:
                fh.write(",".join("%g" % r.get(k, float("nan"))
                                  for k in keys) + "\n")


# -- beam ------------------------------------------------------------------

def beam_model(level, variant="continuous", quadrature=2, cells=4,
               penalty_scale=100.0, blending="polynomial"):
    """variant: continuous | hinged | jointed."""
    hinge = variant in ("hinged", "jointed")
    mesh = beam_mesh(level, hinge=hinge)
    p = BEAM
    model = ShellModel(mesh, Material(p["E"], p["nu"], p["t"]),
                       quadrature=quadrature, cells=cells,
                       penalty_scale=penalty_scale, blending=blending)
    L = p["L"]
    for node in range(mesh.n_nodes):
        model.fix_node(node, (0, 1))
    pos = mesh.node_positions()
    for node in range(mesh.n_nodes):
        if abs(pos[node, 0]) < 1e-9 or abs(pos[node, 0] - L) < 1e-9:
            model.fix_node(node, (2,))
    for a, b in mesh.boundary_edges:
        if (abs(mesh.vertices[a][0]) < 1e-9
                and abs(mesh.vertices[b][0]) < 1e-9):
            model.clamp_edge(a, b)
    if variant == "jointed":
        for a, b in mesh.crease_edges:
            if (a, b) not in mesh.boundary_edges:
                model.rigid_joint(a, b)
    model.add_pressure([0.0, 0.0, p["q"]])
    return model


def beam_oracle(variant):
    p = BEAM

    def fn(x, y):
        w, _, d2 = oracles.beam_deflection(
            x, p["L"], p["q"], p["E"], p["t"],
            hinged=(variant == "hinged"), order=2)
        return w, d2, np.zeros_like(w), np.zeros_like(w)

    return fn


def run_beam(variant="continuous", levels=4, **kw):
    report = ConvergenceReport("beam-" + variant)
    solutions = []
    for level in range(levels):
        t0 = time.time()
        model = beam_model(level, variant, **kw)
        u = model.solve_linear()
        l2, en = flat_error_norms(model, u, beam_oracle(variant))
        report.add(level=level, h=BEAM["L"] / (16 * 2 ** level),
                   dof=model.ndof, l2=l2, energy=en,
                   seconds=time.time() - t0)
        solutions.append((model, u))
    return report, solutions


# -- plate ------------------------------------------------------------------

def plate_model(level, bc="ssss", unstructured=False, hinge=False,
                quadrature=2, cells=4, penalty_scale=100.0,
                blending="polynomial"):
    mesh = plate_mesh(level, unstructured=unstructured, bc=bc, hinge=hinge)
    p = PLATE
    model = ShellModel(mesh, Material(p["E"], p["nu"], p["t"]),
                       quadrature=quadrature, cells=cells,
                       penalty_scale=penalty_scale, blending=blending)
    a = p["a"]
    for node in range(mesh.n_nodes):
        model.fix_node(node, (0, 1))
    pos = mesh.node_positions()
    ylo = -a / 2.0 if bc == "scsc" else 0.0
    on_bnd = (np.abs(pos[:, 0]) < 1e-9) | (np.abs(pos[:, 0] - a) < 1e-9) \
        | (np.abs(pos[:, 1] - ylo) < 1e-9) | (np.abs(pos[:, 1] - ylo - a)
                                              < 1e-9)
    for node in np.flatnonzero(on_bnd):
        model.fix_node(node, (2,))
    if bc == "scsc":
        for va, vb in mesh.boundary_edges:
            ya = mesh.vertices[va][1]
            yb = mesh.vertices[vb][1]
            if (abs(ya - ylo) < 1e-9 and abs(yb - ylo) < 1e-9) or \
                    (abs(ya - ylo - a) < 1e-9 and abs(yb - ylo - a) < 1e-9):
                model.clamp_edge(va, vb)
    if hinge:
        for a_, b_ in mesh.crease_edges:
            if (a_, b_) not in mesh.boundary_edges:
                model.rigid_joint(a_, b_)
    model.add_pressure([0.0, 0.0, p["q"]])
    return model


def plate_oracle(bc):
    p = PLATE
    D = oracles.bending_stiffness(p["E"], p["t"], p["nu"])
    a = p["a"]

    def fn(x, y):
        if bc == "ssss":
            return oracles.plate_ssss(x, y, a, a, p["q"], D, order=2)
        return oracles.plate_scsc(x, y, a, a, p["q"], D, order=2)

    return fn


def run_plate(bc="ssss", unstructured=False, levels=4, **kw):
    tag = "plate-%s-%s" % (bc, "unstructured" if unstructured
                           else "structured")
    report = ConvergenceReport(tag)
    solutions = []
    for level in range(levels):
        t0 = time.time()
        model = plate_model(level, bc=bc, unstructured=unstructured, **kw)
        u = model.solve_linear()
        l2, en = flat_error_norms(model, u, plate_oracle(bc))
        report.add(level=level, h=PLATE["a"] / (6 * 2 ** level),
                   dof=model.ndof, l2=l2, energy=en,
                   seconds=time.time() - t0)
        solutions.append((model, u))
    return report, solutions


# -- tube -------------------------------------------------------------------

def tube_model(level=0, unstructured=False, quadrature=3, cells=1,
               penalty_scale=100.0, blending="polynomial"):
    mesh = tube_mesh(level, unstructured=unstructured)
    p = TUBE
    model = ShellModel(mesh, Material(p["E"], p["nu"], p["t"]),
                       quadrature=quadrature, cells=cells,
                       penalty_scale=penalty_scale, blending=blending)
    pos = mesh.node_positions()
    tol = 1e-9 * p["L"]
    for node in range(mesh.n_nodes):
        if abs(pos[node, 0] - p["L"] / 2) < tol:
            model.fix_node(node, (0,))
        if abs(pos[node, 1]) < tol:
            model.fix_node(node, (1,))
        if abs(pos[node, 2]) < tol:
            model.fix_node(node, (2,))
    for a, b in mesh.crease_edges:
        if (a, b) not in mesh.boundary_edges:
            model.rigid_joint(a, b)
    return model


def tube_load_points(model):
    """Element/corner parameters of the top and bottom pinch points."""
    mesh = model.mesh
    p = TUBE
    targets = [np.array([p["L"] / 2, 0.0, p["side"] / 2]),
               np.array([p["L"] / 2, 0.0, -p["side"] / 2])]
    out = []
    for tgt in targets:
        v = int(np.argmin(np.linalg.norm(
            np.asarray(mesh.vertices) - tgt, axis=1)))
        q = mesh.one_neighbourhood(v)[0]
        c = [int(x) for x in mesh.quads[q]].index(v)
        eta = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)][c]
        out.append((v, q, eta))
    return out


def run_tube(loads=(10.0, 50.0, 100.0), unstructured=False, level=0,
             verbose=False, rtol=1e-7, **kw):
    """Pinched-tube load continuation; returns the load-deflection curve."""
    model = tube_model(level=level, unstructured=unstructured, **kw)
    (v_top, q_top, eta_top), (v_bot, q_bot, eta_bot) = tube_load_points(model)
    eb = model.basis.element(q_top)
    N, _, _ = eb.evaluate(np.atleast_2d(eta_top), order=0)
    curve = []
    u = np.zeros(model.ndof)
    prev = 0.0
    for F in loads:
        dF = F - prev
        model.add_point_force(q_top, eta_top, [0.0, 0.0, -dF])
        model.add_point_force(q_bot, eta_bot, [0.0, 0.0, dF])
        prev = F
        u, hist = model.solve_newton(u0=u, verbose=verbose, rtol=rtol)
        w = float(N[0] @ u.reshape(-1, 3)[eb.node_ids, 2])
        curve.append({"F": F, "deflection": -w, "iters": len(hist),
                      "residuals": hist})
    return model, u, curve


def joint_angle_deviation(model, u):
    """Maximum deviation of the joint dihedral angle from its reference."""
    positions = model.X + u.reshape(-1, 3)
    worst = 0.0
    for left, right in model.joints:
        g1, _ = model._joint_gaps(left, right, positions)
        ref = np.sum(left["A3"] * right["A3"], axis=1)
        ang = np.abs(np.arccos(np.clip(g1 + ref, -1.0, 1.0))
                     - np.arccos(np.clip(ref, -1.0, 1.0)))
        worst = max(worst, float(np.max(ang)))
    return worst
