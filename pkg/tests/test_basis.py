import numpy as np
import pytest

from mbshell.basis import BasisSet, evaluate_surface
from mbshell.generators import fan_mesh, grid_mesh
from mbshell.maps import psi

RNG = np.random.default_rng(19)


def fan_type2():
    return fan_mesh(np.arange(5) * 2 * np.pi / 5, creases=[0, 2])


def fan_type3():
    return fan_mesh([0.0, np.pi / 4, np.pi / 2, np.pi, 3 * np.pi / 2],
                    creases=[0, 1, 2], concave=2)


def test_chart_node_counts():
    bs = BasisSet(fan_mesh(np.arange(5) * 2 * np.pi / 5))
    assert len(bs.chart(0).node_ids) == 31
    grid = BasisSet(grid_mesh(2, 2))
    assert len(grid.chart(4).node_ids) == 25  # interior v = 4
    assert len(grid.chart(1).node_ids) == 15  # boundary, two quads
    assert len(grid.chart(0).node_ids) == 9   # convex corner


@pytest.mark.parametrize("mesh_fn,v", [
    (lambda: grid_mesh(2, 2), 4),
    (lambda: fan_mesh(np.arange(5) * 2 * np.pi / 5), 0),
    (lambda: fan_mesh(np.arange(6) * np.pi / 3, creases=[0, 2, 4]), 0),
    (fan_type2, 0),
    (fan_type3, 0),
    (lambda: grid_mesh(2, 2), 1),
    (lambda: grid_mesh(2, 2), 0),
])
def test_projection_reproduces_feasible_coefficients(mesh_fn, v):
    cb = BasisSet(mesh_fn()).chart(v)
    H = cb.space.coupling()
    if H.size:
        _, sv, Wt = np.linalg.svd(H)
        tol = max(H.shape) * np.finfo(float).eps * sv[0]
        Z = Wt[int(np.sum(sv > tol)):].T
        c = Z @ RNG.standard_normal(Z.shape[1])
    else:
        c = RNG.standard_normal(cb.space.n_raw)
    assert np.max(np.abs(cb.A @ (cb.V @ c) - c)) < 1e-8


@pytest.mark.parametrize("mesh_fn", [
    lambda: grid_mesh(3, 3),
    lambda: fan_mesh(np.arange(5) * 2 * np.pi / 5),
    lambda: fan_mesh(np.arange(6) * np.pi / 3, creases=[0, 2, 4]),
    fan_type2,
    fan_type3,
])
@pytest.mark.parametrize("blending", ["polynomial", "rational"])
def test_partition_of_unity(mesh_fn, blending):
    mesh = mesh_fn()
    bs = BasisSet(mesh, blending=blending)
    eta = RNG.random((20, 2))
    for q in range(mesh.n_quads):
        N, dN, d2N = bs.element(q).evaluate(eta)
        assert np.max(np.abs(N.sum(axis=1) - 1.0)) < 1e-11
        assert np.max(np.abs(dN.sum(axis=1))) < 1e-9
        assert np.max(np.abs(d2N.sum(axis=1))) < 1e-8


def test_quadratic_reproduction_on_structured_mesh():
    mesh = grid_mesh(3, 3, lx=3.0, ly=3.0)
    bs = BasisSet(mesh)
    pos = mesh.node_positions()

    def f(x, y):
        return 2.0 + x - 0.5 * y + 0.25 * x * y + 0.75 * x * x - 0.4 * y * y

    data = f(pos[:, 0], pos[:, 1])
    eta = RNG.random((15, 2))
    for q in range(mesh.n_quads):
        eb = bs.element(q)
        N, dN, d2N = eb.evaluate(eta)
        i, j = q % 3, q // 3
        x, y = i + eta[:, 0], j + eta[:, 1]
        vals = N @ data[eb.node_ids]
        assert np.max(np.abs(vals - f(x, y))) < 1e-10
        grad = np.einsum("nka,k->na", dN, data[eb.node_ids])
        assert np.max(np.abs(grad[:, 0] - (1.0 + 0.25 * y + 1.5 * x))) < 1e-9
        assert np.max(np.abs(grad[:, 1] - (-0.5 + 0.25 * x - 0.8 * y))) < 1e-9
        hess = np.einsum("nkab,k->nab", d2N, data[eb.node_ids])
        assert np.max(np.abs(hess[:, 0, 0] - 1.5)) < 1e-8
        assert np.max(np.abs(hess[:, 0, 1] - 0.25)) < 1e-8
        assert np.max(np.abs(hess[:, 1, 1] + 0.8)) < 1e-8


def _chart_derivatives(bs, cb, q, eta, data):
    """Value, gradient and hessian of the interpolant w.r.t. the chart
    coordinates of chart cb, evaluated at element points eta."""
    eb = bs.element(q)
    N, dN, d2N = eb.evaluate(eta)
    u = N @ data[eb.node_ids]
    du = np.einsum("nka,k->na", dN, data[eb.node_ids])
    d2u = np.einsum("nkab,k->nab", d2N, data[eb.node_ids])
    f = cb.fan_index_by_quad[q]
    s, m = cb.descriptor.slot_of(f)
    _, p = cb.descriptor.fan[f]
    xi, jac, hess = psi(cb.layout, p + 1, s, m, eta)
    jinv = np.linalg.inv(jac)
    g = np.einsum("na,nab->nb", du, jinv)
    rhs = d2u - np.einsum("ni,niab->nab", g, hess)
    h = np.einsum("nca,ncd,ndb->nab", jinv, rhs, jinv)
    return xi, u, g, h


@pytest.mark.parametrize("mesh_fn", [
    lambda: fan_mesh(np.arange(5) * 2 * np.pi / 5),
    lambda: fan_mesh(np.arange(6) * np.pi / 3, creases=[0, 2, 4]),
    fan_type2,
])
def test_smoothness_across_interior_spokes(mesh_fn):
    mesh = mesh_fn()
    bs = BasisSet(mesh)
    cb = bs.chart(0)
    data = RNG.standard_normal(mesh.n_nodes)
    desc = cb.descriptor
    t = np.linspace(0.1, 0.9, 5)
    creased = {desc.slot_of(f)[0] if True else None for f in []}
    for f in range(len(desc.fan)):
        g = (f + 1) % len(desc.fan)
        s0, m0 = desc.slot_of(f)
        s1, m1 = desc.slot_of(g)
        # shared spoke between consecutive fan elements
        q0, p0 = desc.fan[f]
        q1, p1 = desc.fan[g]
        # edge eta-parameterisations seen from each element corner
        e0 = np.stack([np.zeros_like(t), t], axis=-1)  # local (0, t)
        e1 = np.stack([t, np.zeros_like(t)], axis=-1)  # local (t, 0)
        from mbshell.maps import corner_local_inverse
        eta0 = corner_local_inverse(e0, p0 + 1)
        eta1 = corner_local_inverse(e1, p1 + 1)
        xi0, u0, g0, h0 = _chart_derivatives(bs, cb, q0, eta0, data)
        xi1, u1, g1, h1 = _chart_derivatives(bs, cb, q1, eta1, data)
        assert np.max(np.abs(xi0 - xi1)) < 1e-12
        assert np.max(np.abs(u0 - u1)) < 1e-11
        crease_spoke = s0 != s1
        if not crease_spoke:
            assert np.max(np.abs(g0 - g1)) < 1e-9
            assert np.max(np.abs(h0 - h1)) < 1e-7


def test_crease_spoke_is_c0_but_generally_not_c1():
    mesh = fan_type2()
    bs = BasisSet(mesh)
    cb = bs.chart(0)
    desc = cb.descriptor
    data = RNG.standard_normal(mesh.n_nodes)
    t = np.linspace(0.1, 0.9, 5)
    # find a fan pair across a sector boundary
    for f in range(len(desc.fan)):
        g = (f + 1) % len(desc.fan)
        if desc.slot_of(f)[0] != desc.slot_of(g)[0]:
            break
    from mbshell.maps import corner_local_inverse
    q0, p0 = desc.fan[f]
    q1, p1 = desc.fan[g]
    eta0 = corner_local_inverse(np.stack([np.zeros_like(t), t], -1), p0 + 1)
    eta1 = corner_local_inverse(np.stack([t, np.zeros_like(t)], -1), p1 + 1)
    _, u0, g0, _ = _chart_derivatives(bs, cb, q0, eta0, data)
    _, u1, g1, _ = _chart_derivatives(bs, cb, q1, eta1, data)
    assert np.max(np.abs(u0 - u1)) < 1e-11
    assert np.max(np.abs(g0 - g1)) > 1e-4  # kink across the crease


def test_boundary_trace_pinned_to_boundary_vertices():
    mesh = grid_mesh(2, 2)
    bs = BasisSet(mesh)
    t = np.linspace(0.0, 1.0, 9)
    eta = np.stack([t, np.zeros_like(t)], axis=-1)
    eb = bs.element(0)
    N, _, _ = eb.evaluate(eta, order=0)
    bnodes = [mesh.vertex_node(v) for v in range(mesh.n_vertices)
              if mesh.is_boundary_vertex(v)]
    bnodes += [mesh.edge_node(a, b) for a, b in mesh.boundary_edges]

    # zero boundary data forces an exactly zero boundary trace
    data = RNG.standard_normal(mesh.n_nodes)
    data[bnodes] = 0.0
    assert np.max(np.abs(N @ data[eb.node_ids])) < 1e-11

    # boundary vertices are interpolated
    data = RNG.standard_normal(mesh.n_nodes)
    vals = N @ data[eb.node_ids]
    assert abs(vals[0] - data[mesh.vertex_node(0)]) < 1e-11
    assert abs(vals[-1] - data[mesh.vertex_node(1)]) < 1e-11

    # the trace only sees boundary-vertex data
    other = data.copy()
    interior = [n for n in range(mesh.n_nodes) if n not in bnodes]
    other[interior] += RNG.standard_normal(len(interior))
    other[bnodes] = data[bnodes]
    vals2 = N @ other[eb.node_ids]
    assert np.max(np.abs(vals2 - vals)) < 1e-11


def test_local_basis_matches_element_evaluation():
    for mesh_fn in (fan_type2, fan_type3,
                    lambda: fan_mesh(np.arange(5) * 2 * np.pi / 5)):
        mesh = mesh_fn()
        cb = BasisSet(mesh).chart(0)
        desc = cb.descriptor
        for f in [0, len(desc.fan) - 1]:
            s, m = desc.slot_of(f)
            xy = np.array([[0.4, 0.3]])
            xi, _, _ = cb.layout.wedge_at(s, m, xy, order=0)
            val, _, _ = cb.local_basis(xi[0], order=0)
            ref, _, _ = cb.space.eval(s, m, xy, order=0)
            assert np.max(np.abs(val - ref)) < 1e-11


def test_local_basis_chart_derivatives():
    mesh = fan_type2()
    cb = BasisSet(mesh).chart(0)
    xy = np.array([[0.5, 0.35]])
    xi0, _, _ = cb.layout.wedge_at(0, 0, xy, order=0)
    xi0 = xi0[0]
    h = 1e-6
    val, d, dd = cb.local_basis(xi0)
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        vp, dp, _ = cb.local_basis(xi0 + e)
        vm, dm, _ = cb.local_basis(xi0 - e)
        assert np.max(np.abs((vp - vm) / (2 * h) - d[:, :, a])) < 1e-6
        assert np.max(np.abs((dp - dm) / (2 * h) - dd[:, :, :, a])) < 1e-5


def test_psi_inverse_round_trip():
    mesh = fan_type2()
    cb = BasisSet(mesh).chart(0)
    desc = cb.descriptor
    for f in range(len(desc.fan)):
        s, m = desc.slot_of(f)
        q, p = desc.fan[f]
        xy = np.array([[0.3, 0.6]])
        xi, _, _ = cb.layout.wedge_at(s, m, xy, order=0)
        (q2, p2), eta = cb.psi_inverse(xi[0])
        assert (q2, p2) == (q, p)
        from mbshell.maps import corner_local
        assert np.max(np.abs(corner_local(eta, p + 1) - xy[0])) < 1e-12


def test_evaluate_surface_flat_geometry():
    mesh = grid_mesh(2, 2)
    bs = BasisSet(mesh)
    pos = mesh.node_positions()
    eta = RNG.random((8, 2))
    x, a, a3, da3 = evaluate_surface(bs, pos, 0, eta)
    assert np.max(np.abs(x[:, 2])) < 1e-12
    assert np.max(np.abs(a3 - [0.0, 0.0, 1.0])) < 1e-12
    assert np.max(np.abs(da3)) < 1e-10


def test_evaluate_surface_rejects_collapsed_element():
    mesh = grid_mesh(2, 2)
    bs = BasisSet(mesh)
    pos = np.zeros((mesh.n_nodes, 3))
    with pytest.raises(ValueError, match="collapsed"):
        evaluate_surface(bs, pos, 0, np.array([[0.5, 0.5]]))


def test_basis_bounded_and_local():
    mesh = fan_type3()
    bs = BasisSet(mesh)
    eta = RNG.random((50, 2))
    for q in range(mesh.n_quads):
        eb = bs.element(q)
        N, _, _ = eb.evaluate(eta, order=0)
        assert np.max(np.abs(N)) < 10.0
        assert len(eb.node_ids) <= mesh.n_nodes
