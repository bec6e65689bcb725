import numpy as np
import pytest

from mbshell.blending import bspline3
from mbshell.generators import fan_mesh, grid_mesh
from mbshell.meshes import ControlMesh, MeshError

RNG = np.random.default_rng(3)


def test_single_quad_counts():
    mesh = grid_mesh(1, 1)
    assert mesh.n_vertices == 4
    assert mesh.n_edges == 4
    assert mesh.n_nodes == 9
    assert len(mesh.boundary_edges) == 4
    assert mesh.crease_edges == mesh.boundary_edges


def test_2x2_grid_counts():
    mesh = grid_mesh(2, 2)
    assert mesh.n_vertices == 9
    assert mesh.n_edges == 12
    assert mesh.n_quads == 4
    assert mesh.n_nodes == 25
    assert len(mesh.boundary_edges) == 8


def test_crease_on_non_edge_rejected():
    with pytest.raises(MeshError, match="non-edge"):
        grid_mesh(2, 2, creases=[(0, 8)])


def test_non_manifold_edge_rejected():
    verts = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (1, 1, 1), (0, 1, 1),
             (1, 1, -1), (0, 1, -1)]
    quads = [(0, 1, 2, 3), (3, 2, 4, 5), (3, 2, 6, 7)]
    with pytest.raises(MeshError, match="orientation|manifold"):
        ControlMesh(verts, quads)


def test_inconsistent_orientation_rejected():
    verts = [(0, 0, 0), (1, 0, 0), (2, 0, 0), (0, 1, 0), (1, 1, 0), (2, 1, 0)]
    quads = [(0, 1, 4, 3), (1, 2, 5, 4)]
    ControlMesh(verts, quads)  # consistent: fine
    quads_bad = [(0, 1, 4, 3), (1, 4, 5, 2)]
    with pytest.raises(MeshError, match="orientation"):
        ControlMesh(verts, quads_bad)


def test_one_neighbourhood_interior_and_corner():
    mesh = grid_mesh(2, 2)
    center = 4  # (1,1) of the 3x3 vertex grid
    fan = mesh.one_neighbourhood(center)
    assert len(fan) == 4
    assert sorted(fan) == [0, 1, 2, 3]
    # cyclic order: consecutive fan quads share an edge through the vertex
    for a, b in zip(fan, fan[1:] + fan[:1]):
        shared = set(map(int, mesh.quads[a])) & set(map(int, mesh.quads[b]))
        assert center in shared and len(shared) >= 2
    corner_fan = mesh.one_neighbourhood(0)
    assert len(corner_fan) == 1


def test_classification_basic():
    mesh = grid_mesh(4, 4)
    center = 12  # interior vertex of the 5x5 grid
    desc = mesh.classify_chart(center)
    assert desc.chart_class == "smooth"
    assert desc.valence == 4
    corner = mesh.classify_chart(0)
    assert corner.chart_class == "corner"
    side = mesh.classify_chart(2)
    assert side.chart_class == "boundary"
    assert side.sector_counts == [2]


def test_classification_type1_v6k3():
    angles = np.arange(6) * np.pi / 3
    mesh = fan_mesh(angles, creases=[0, 2, 4])
    desc = mesh.classify_chart(0)
    assert desc.chart_class == "type1"
    assert desc.valence == 6
    assert desc.sector_counts == [2, 2, 2]


def test_classification_type2_v5k2():
    angles = np.arange(5) * 2 * np.pi / 5
    mesh = fan_mesh(angles, creases=[0, 2])
    desc = mesh.classify_chart(0)
    assert desc.chart_class == "type2"
    assert sorted(desc.sector_counts) == [2, 3]


def test_classification_type3_and_renumbering():
    angles = [0.0, np.pi / 4, np.pi / 2, np.pi, 3 * np.pi / 2]
    mesh = fan_mesh(angles, creases=[0, 1, 2], concave=2)
    desc = mesh.classify_chart(0)
    assert desc.chart_class == "type3"
    assert desc.sector_counts[-1] == 3  # concave sector renumbered last
    assert desc.sector_counts == [1, 1, 3]


def test_single_crease_endpoint_rejected():
    angles = np.arange(4) * np.pi / 2
    mesh = fan_mesh(angles, creases=[1])
    with pytest.raises(MeshError, match="crease"):
        mesh.classify_chart(0)


def test_classification_independent_of_quad_order():
    angles = np.arange(5) * 2 * np.pi / 5
    base = fan_mesh(angles, creases=[0, 2])
    perm = [3, 1, 4, 0, 2]
    shuffled = ControlMesh(base.vertices, base.quads[perm],
                           [base.edge_verts[e] for e in base.crease_ids])
    d0 = base.classify_chart(0)
    d1 = shuffled.classify_chart(0)
    assert d0.chart_class == d1.chart_class
    assert d0.sector_counts == d1.sector_counts
    # same canonical fan up to quad renumbering
    assert [perm[q] for q, _ in d1.fan] == [q for q, _ in d0.fan]


def test_refine_counts_and_creases():
    mesh = grid_mesh(2, 2, creases=[(1, 4), (4, 7)])
    fine = mesh.refine()
    assert fine.n_quads == 16
    assert fine.n_vertices == mesh.n_nodes
    # interior crease path of length 2 becomes length 4
    interior = [e for e in fine.crease_edges if e not in fine.boundary_edges]
    assert len(interior) == 4
    # planar stays planar
    assert np.max(np.abs(fine.vertices[:, 2])) == 0.0


def test_refine_preserves_extraordinary_vertices():
    angles = np.arange(5) * 2 * np.pi / 5
    mesh = fan_mesh(angles, creases=[0, 2])
    fine = mesh.refine()
    desc = fine.classify_chart(0)
    assert desc.valence == 5
    assert desc.chart_class == "type2"
    assert sorted(desc.sector_counts) == [2, 3]
    interior = [v for v in range(fine.n_vertices)
                if not fine.is_boundary_vertex(v)]
    extraordinary = [v for v in interior if fine.classify_chart(v).valence != 4]
    assert extraordinary == [0]


def test_refine_rederives_concave_tag():
    angles = [0.0, np.pi / 4, np.pi / 2, np.pi, 3 * np.pi / 2]
    mesh = fan_mesh(angles, creases=[0, 1, 2], concave=2)
    fine = mesh.refine()
    desc = fine.classify_chart(0)
    assert desc.chart_class == "type3"
    assert desc.sector_counts == [1, 1, 3]


def test_limit_masks_affine_invariance():
    angles = np.arange(5) * 2 * np.pi / 5
    mesh = fan_mesh(angles)
    # similarity transform: preserves the (metric) corner classification
    th = 0.7
    A = 1.7 * np.array([[np.cos(th), -np.sin(th), 0.0],
                        [np.sin(th), np.cos(th), 0.0],
                        [0.0, 0.0, 1.0]])
    b = RNG.random(3)
    mapped = ControlMesh(mesh.vertices @ A.T + b, mesh.quads,
                         [mesh.edge_verts[e] for e in mesh.crease_ids])
    lim = mesh.limit_project()
    lim_mapped = mapped.limit_project()
    assert np.max(np.abs(lim @ A.T + b - lim_mapped)) < 1e-13


def test_limit_mask_v4_matches_bicubic_bspline():
    mesh = grid_mesh(4, 4)
    mesh = ControlMesh(mesh.vertices + 0.1 * RNG.random(mesh.vertices.shape),
                       mesh.quads)
    center = 12
    lim = mesh.limit_project()[center]
    # direct uniform bicubic B-spline limit over the 3x3 neighbourhood
    b = bspline3(np.array([-1.0, 0.0, 1.0]))[0]
    ref = np.zeros(3)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            ref += b[di + 1] * b[dj + 1] * mesh.vertices[center + 5 * dj + di]
    assert np.max(np.abs(lim - ref)) < 1e-12


def test_limit_mask_crease_stencil():
    mesh = grid_mesh(4, 4, creases=[(7, 12), (12, 17)])
    lim = mesh.limit_project()
    v = mesh.vertices
    expect = (v[7] + 4.0 * v[12] + v[17]) / 6.0
    assert np.max(np.abs(lim[12] - expect)) < 1e-14


def test_node_positions_midpoint_and_centroid():
    mesh = grid_mesh(1, 1)
    pos = mesh.node_positions()
    assert pos[mesh.edge_node(0, 1)] == pytest.approx([0.5, 0.0, 0.0])
    assert pos[mesh.face_node(0)] == pytest.approx([0.5, 0.5, 0.0])
