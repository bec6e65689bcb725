"""Deterministic mesh generators: structured grids, single-vertex fans and
the benchmark geometries (beam strip, plate, pinched tube, genus-2 demo)."""

import numpy as np

from .meshes import ControlMesh


def grid_mesh(nx, ny, lx=1.0, ly=1.0, x0=0.0, y0=0.0, creases=()):
    """Structured nx-by-ny quad grid on [x0, x0+lx] x [y0, y0+ly], z = 0."""
    xs = np.linspace(x0, x0 + lx, nx + 1)
    ys = np.linspace(y0, y0 + ly, ny + 1)
    verts = [(x, y, 0.0) for y in ys for x in xs]

    def vid(i, j):
        return j * (nx + 1) + i

    quads = [(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
             for j in range(ny) for i in range(nx)]
    return ControlMesh(verts, quads, creases)


def grid_vertex_id(nx, i, j):
    return j * (nx + 1) + i


def fan_mesh(angles, closed=True, creases=(), concave=None, radius=1.0):
    """Single-vertex fan: quads between consecutive spokes at the given
    angles around the origin.

    angles: spoke angles in radians, counter-clockwise.  For a closed fan
    the last quad wraps around to the first spoke.  creases: indices of
    creased spokes.  concave: canonical sector index to tag concave.
    """
    angles = list(angles)
    v = len(angles) if closed else len(angles) - 1
    verts = [(0.0, 0.0, 0.0)]
    spoke_ids = []
    for a in angles:
        spoke_ids.append(len(verts))
        verts.append((radius * np.cos(a), radius * np.sin(a), 0.0))
    diag_ids = []
    for i in range(v):
        a0 = angles[i]
        a1 = angles[(i + 1) % len(angles)]
        if closed and i == v - 1:
            a1 += 2 * np.pi
        mid = 0.5 * (a0 + a1)
        half = 0.5 * (a1 - a0)
        rdiag = radius / max(np.cos(half), 0.2)
        diag_ids.append(len(verts))
        verts.append((rdiag * np.cos(mid), rdiag * np.sin(mid), 0.0))
    quads = []
    for i in range(v):
        quads.append((0, spoke_ids[i], diag_ids[i],
                      spoke_ids[(i + 1) % len(angles)]))
    crease_pairs = [(0, spoke_ids[i]) for i in creases]
    tags = {0: concave} if concave is not None else None
    return ControlMesh(verts, quads, crease_pairs, tags)


def voxel_surface(cells, scale=1.0, origin=(0.0, 0.0, 0.0)):
    """Boundary quad mesh of a union of unit voxels.

    All edges where adjacent boundary faces are not coplanar become
    creases; concave sectors (angle > pi between creases) are tagged.
    """
    cells = set(tuple(int(c) for c in cell) for cell in cells)
    verts = {}
    quads = []

    def vid(p):
        if p not in verts:
            verts[p] = len(verts)
        return verts[p]

    # face corner offsets per axis, counter-clockwise seen from outside
    for (i, j, k) in sorted(cells):
        for axis in range(3):
            for sign in (1, -1):
                step = [0, 0, 0]
                step[axis] = sign
                nb = (i + step[0], j + step[1], k + step[2])
                if nb in cells:
                    continue
                b, c = (axis + 1) % 3, (axis + 2) % 3
                base = [i, j, k]
                if sign > 0:
                    base[axis] += 1
                corners = []
                for db, dc in ((0, 0), (1, 0), (1, 1), (0, 1)):
                    p = list(base)
                    p[b] += db
                    p[c] += dc
                    corners.append(tuple(p))
                if sign < 0:
                    corners.reverse()
                quads.append([vid(p) for p in corners])

    points = np.empty((len(verts), 3))
    for p, idx in verts.items():
        points[idx] = np.asarray(origin) + scale * np.asarray(p, dtype=float)

    # creases: edges whose two faces have different normals
    normals = []
    for quad in quads:
        P = points[quad]
        n = np.cross(P[1] - P[0], P[3] - P[0])
        normals.append(n / np.linalg.norm(n))
    owners = {}
    for f, quad in enumerate(quads):
        for e in range(4):
            a, b = quad[e], quad[(e + 1) % 4]
            owners.setdefault((min(a, b), max(a, b)), []).append(f)
    creases = [edge for edge, fs in owners.items()
               if np.dot(normals[fs[0]], normals[fs[1]]) < 1.0 - 1e-9]

    mesh = ControlMesh(points, quads, creases)
    tags = detect_concave_sectors(mesh)
    if tags:
        mesh = ControlMesh(points, quads, creases, concave_tags=tags)
    return mesh


def detect_concave_sectors(mesh, tol=1e-6):
    """Tag the sector of each creased interior vertex whose opening angle
    exceeds pi (at most one such sector can exist per vertex)."""
    tags = {}
    for v in range(mesh.n_vertices):
        if mesh.is_boundary_vertex(v):
            continue
        fan, counts = mesh._canonical_sectors(v)
        if len(counts) < 2:
            continue
        off = 0
        for s, cnt in enumerate(counts):
            angle = sum(mesh._corner_angle(q, p)
                        for q, p in fan[off:off + cnt])
            off += cnt
            if angle > np.pi + tol:
                tags[v] = s
    return tags


def genus2_mesh(scale=1.0):
    """Genus-2 demo surface: a 5x3x1 voxel slab with two cells removed,
    creating two through-holes.  Every sharp voxel edge is creased and the
    reflex corners of the holes carry concave-sector tags."""
    cells = [(i, j, 0) for i in range(5) for j in range(3)
             if (i, j) not in ((1, 1), (3, 1))]
    return voxel_surface(cells, scale=scale)
