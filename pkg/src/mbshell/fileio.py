"""Mesh file I/O and surface tessellation.

Native format is JSON: vertices, quads, crease edges and concave-sector
tags.  Wavefront OBJ is supported for exchange, with sharp-feature tags in
a `.tags` JSON sidecar since OBJ itself cannot carry them.  Tessellation
samples the limit surface per element and welds the shared boundary
samples topologically (by mesh entity, not by coordinate proximity).
"""

import json
import os

import numpy as np

from .basis import BasisSet
from .meshes import ControlMesh


def save_mesh_json(mesh, path):
    data = {
        "vertices": np.asarray(mesh.vertices, dtype=float).tolist(),
        "quads": np.asarray(mesh.quads, dtype=int).tolist(),
        "creases": sorted([int(a), int(b)] for a, b in mesh.crease_edges
                          if (a, b) not in mesh.boundary_edges),
        "concave": [{"vertex": int(v), "sector": int(s)}
                    for v, s in sorted(mesh.concave_tags.items())],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)


def load_mesh_json(path):
    with open(path) as fh:
        data = json.load(fh)
    tags = {int(e["vertex"]): int(e["sector"])
            for e in data.get("concave", [])}
    return ControlMesh(data["vertices"], data["quads"],
                       [tuple(e) for e in data.get("creases", [])],
                       concave_tags=tags)


def load_mesh_obj(path):
    """Quad-only OBJ with an optional `<path>.tags` JSON sidecar carrying
    crease edges and concave tags."""
    vertices, quads = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vertices.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                ids = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                if len(ids) != 4:
                    raise ValueError("non-quad face in %s" % path)
                quads.append(ids)
    creases, tags = [], {}
    sidecar = path + ".tags"
    if os.path.exists(sidecar):
        with open(sidecar) as fh:
            data = json.load(fh)
        creases = [tuple(e) for e in data.get("creases", [])]
        tags = {int(e["vertex"]): int(e["sector"])
                for e in data.get("concave", [])}
    return ControlMesh(vertices, quads, creases, concave_tags=tags)


def load_mesh(path):
    if path.endswith(".obj"):
        return load_mesh_obj(path)
    return load_mesh_json(path)


def write_obj(path, points, faces):
    with open(path, "w") as fh:
        for p in points:
            fh.write("v %.10g %.10g %.10g\n" % tuple(p))
        for f in faces:
            fh.write("f %s\n" % " ".join(str(i + 1) for i in f))


def write_vtk(path, points, faces, point_data=None):
    """Legacy-format VTK unstructured quad grid with optional point data."""
    points = np.asarray(points, dtype=float)
    faces = np.asarray(faces, dtype=int)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\nsurface\nASCII\n")
        fh.write("DATASET UNSTRUCTURED_GRID\n")
        fh.write("POINTS %d double\n" % len(points))
        for p in points:
            fh.write("%.10g %.10g %.10g\n" % tuple(p))
        fh.write("CELLS %d %d\n" % (len(faces), 5 * len(faces)))
        for f in faces:
            fh.write("4 %d %d %d %d\n" % tuple(f))
        fh.write("CELL_TYPES %d\n" % len(faces))
        fh.write("9\n" * len(faces))
        if point_data:
            fh.write("POINT_DATA %d\n" % len(points))
            for name, arr in point_data.items():
                arr = np.asarray(arr, dtype=float)
                if arr.ndim == 1:
                    fh.write("SCALARS %s double 1\nLOOKUP_TABLE default\n"
                             % name)
                    for v in arr:
                        fh.write("%.10g\n" % v)
                else:
                    fh.write("VECTORS %s double\n" % name)
                    for v in arr:
                        fh.write("%.10g %.10g %.10g\n" % tuple(v))


def tessellate(mesh, positions=None, resolution=8, basis=None):
    """Sample the surface on an (r+1)^2 grid per element.

    Returns (points, faces).  Samples on shared element boundaries are
    welded by mesh entity so the triangulation is watertight.
    """
    if basis is None:
        basis = BasisSet(mesh)
    if positions is None:
        positions = mesh.node_positions()
    positions = np.asarray(positions, dtype=float)
    r = int(resolution)
    t = np.arange(r + 1) / r
    grid = np.array([(a, b) for b in t for a in t])
    points = []
    index = {}

    def key_of(q, i, j):
        quad = [int(v) for v in mesh.quads[q]]
        corner = {(0, 0): 0, (r, 0): 1, (r, r): 2, (0, r): 3}
        if (i, j) in corner:
            return ("v", quad[corner[(i, j)]])
        sides = [(j == 0, quad[0], quad[1], i), (i == r, quad[1], quad[2], j),
                 (j == r, quad[3], quad[2], i), (i == 0, quad[0], quad[3], j)]
        for on, a, b, s in sides:
            if on:
                return (("e", a, b, s) if a < b else ("e", b, a, r - s))
        return ("f", q, i, j)

    faces = []
    for q in range(mesh.n_quads):
        eb = basis.element(q)
        N, _, _ = eb.evaluate(grid, order=0)
        xyz = N @ positions[eb.node_ids]
        ids = np.empty((r + 1, r + 1), dtype=int)
        for j in range(r + 1):
            for i in range(r + 1):
                key = key_of(q, i, j)
                if key not in index:
                    index[key] = len(points)
                    points.append(xyz[j * (r + 1) + i])
                ids[j, i] = index[key]
        for j in range(r):
            for i in range(r):
                faces.append([ids[j, i], ids[j, i + 1],
                              ids[j + 1, i + 1], ids[j + 1, i]])
    return np.array(points), np.array(faces, dtype=int)
