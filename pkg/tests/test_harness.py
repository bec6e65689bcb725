"""Harness-level checks: benchmark mesh generators, error norms and the
convergence bookkeeping (the full convergence studies run in the
acceptance suite)."""

import numpy as np
import pytest

from mbshell import benchmarks as bench
from mbshell import oracles
from mbshell.generators import grid_mesh


def test_rotate_edge_valences():
    mesh = grid_mesh(4, 4)

    def vid(i, j):
        return j * 5 + i

    out = bench.rotate_edge(mesh, vid(2, 2), vid(2, 3))
    assert out.n_quads == mesh.n_quads
    val = {v: len(out.fan_spokes(v)) for v in range(out.n_vertices)
           if not out.is_boundary_vertex(v)}
    # rotated edge endpoints lose a neighbour, the opposite pair gains one
    assert sorted(val.values()).count(3) == 2
    assert sorted(val.values()).count(5) == 2
    assert sum(val.values()) == 4 * len(val)  # total valence preserved


def test_rotate_edge_rejects_boundary():
    mesh = grid_mesh(2, 2)
    with pytest.raises(ValueError):
        bench.rotate_edge(mesh, 0, 1)


def test_smooth_interior_keeps_boundary_and_creases():
    mesh = grid_mesh(4, 4, creases=[(12, 17)])
    ref = np.array(mesh.vertices)
    noisy = ref.copy()
    noisy[6, :2] += 0.07
    noisy[18, :2] -= 0.05
    out = bench.smooth_interior(
        bench.ControlMesh(noisy, mesh.quads, [(12, 17)]))
    moved = np.linalg.norm(np.array(out.vertices) - noisy, axis=1)
    for v in range(mesh.n_vertices):
        if out.is_boundary_vertex(v) or v in (12, 17):
            assert moved[v] < 1e-14
    assert moved[6] > 1e-3  # perturbed interior vertex was relaxed


def test_unstructured_plate_mesh():
    mesh = bench.plate_mesh(0, unstructured=True)
    vals = [len(mesh.fan_spokes(v)) for v in range(mesh.n_vertices)
            if not mesh.is_boundary_vertex(v)]
    assert vals.count(5) == 4 and vals.count(3) == 4
    # all corner angles stay well away from degeneracy
    V = np.array(mesh.vertices)[:, :2]
    for quad in mesh.quads:
        P = V[list(quad)]
        for c in range(4):
            e1 = np.append(P[(c + 1) % 4] - P[c], 0.0)
            e2 = np.append(P[(c + 3) % 4] - P[c], 0.0)
            s = np.cross(e1, e2)[2] / (np.linalg.norm(e1)
                                       * np.linalg.norm(e2))
            assert s > 0.3


def test_tube_mesh_geometry():
    mesh = bench.tube_mesh(0)
    p = bench.TUBE
    V = np.array(mesh.vertices)
    # every vertex sits on the square cross-section surface
    on = (np.abs(np.abs(V[:, 1]) - p["side"] / 2) < 1e-9) \
        | (np.abs(np.abs(V[:, 2]) - p["side"] / 2) < 1e-9)
    assert np.all(on)
    interior = [e for e in mesh.crease_edges if e not in mesh.boundary_edges]
    assert len(interior) == 4 * 16  # four creased corner lines
    for a, b in interior:
        assert abs(abs(V[a, 1]) - p["side"] / 2) < 1e-9
        assert abs(abs(V[a, 2]) - p["side"] / 2) < 1e-9


def test_flat_error_norms_zero_for_exact_nodal_field():
    # solving the beam and measuring against its own oracle must give a
    # small, strictly positive error; measuring a field against itself
    # through two identical models gives zero distance
    model = bench.beam_model(0)
    u = model.solve_linear()
    l2, en = bench.flat_error_norms(model, u, bench.beam_oracle("continuous"))
    assert 0.0 < l2 < 1.0
    assert 0.0 < en < 1.0
    assert bench.compare_fields(model, u, model, u) < 1e-14


def test_beam_solution_accuracy():
    model = bench.beam_model(1)
    u = model.solve_linear()
    p = bench.BEAM
    mesh = model.mesh
    mid = [v for v in range(mesh.n_vertices)
           if abs(mesh.vertices[v][0] - p["L"] / 2) < 1e-9]
    eb = model.basis.element([q for q in range(mesh.n_quads)][0])
    # midspan deflection against the closed form, coarse-level accuracy
    w_ref = oracles.beam_midspan(p["L"], p["q"], p["E"], p["t"])
    q_mid = None
    for q, quad in enumerate(mesh.quads):
        if mid[0] in quad:
            q_mid = q
            c = list(quad).index(mid[0])
            eta = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)][c]
            break
    ebm = model.basis.element(q_mid)
    N, _, _ = ebm.evaluate(np.atleast_2d(eta), order=0)
    w = float(N[0] @ u.reshape(-1, 3)[ebm.node_ids, 2])
    assert abs(w - w_ref) < 0.2 * w_ref


def test_convergence_report(tmp_path):
    rep = bench.ConvergenceReport("demo")
    for k in range(4):
        h = 0.5 ** k
        rep.add(level=k, h=h, dof=10 * 4 ** k, l2=h ** 2, energy=h,
                seconds=0.0)
    assert rep.rate("l2") == pytest.approx(2.0, abs=1e-12)
    assert rep.rate("energy") == pytest.approx(1.0, abs=1e-12)
    path = str(tmp_path / "conv.csv")
    rep.to_csv(path)
    lines = open(path).read().strip().splitlines()
    assert lines[0] == "level,h,dof,l2,energy,seconds"
    assert len(lines) == 5


def test_tube_load_points():
    model = bench.tube_model(0)
    (v_top, q_top, eta_top), (v_bot, q_bot, eta_bot) = \
        bench.tube_load_points(model)
    p = bench.TUBE
    vt = np.array(model.mesh.vertices[v_top])
    vb = np.array(model.mesh.vertices[v_bot])
    assert np.allclose(vt, [p["L"] / 2, 0.0, p["side"] / 2])
    assert np.allclose(vb, [p["L"] / 2, 0.0, -p["side"] / 2])
    assert eta_top in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
