"""Quadrilateral control mesh with crease tags and chart classification.

The mesh is immutable after construction.  Derived data: canonical edge
table, per-vertex ordered element fans, the node table (corner vertices,
one mid-edge node per edge, one mid-face node per quad), chart descriptors,
Catmull-Clark topological refinement with linear geometry rules, and
subdivision limit masks for export.
"""

import numpy as np

from .maps import SectorLayout


class MeshError(ValueError):
    pass


class ChartDescriptor:
    """Per-vertex chart structure: ordered element fan, sector split and
    chart class (smooth / type1 / type2 / type3 / boundary / corner)."""

    def __init__(self, vertex, fan, spokes, sector_counts, chart_class,
                 is_boundary, is_corner, concave=False):
        self.vertex = vertex
        self.fan = fan                  # list of (quad id, corner position)
        self.spokes = spokes            # spoke edge ids, len v (closed) or v+1
        self.sector_counts = sector_counts
        self.chart_class = chart_class
        self.is_boundary = is_boundary
        self.is_corner = is_corner
        self.concave = concave          # concave sector is last when True
        self.valence = len(fan)
        self.crease_count = len(sector_counts) if not is_boundary else None

    def slot_of(self, fan_index):
        """Sector index and element index within the sector for a fan slot."""
        s = 0
        m = fan_index
        for count in self.sector_counts:
            if m < count:
                return s, m
            m -= count
            s += 1
        raise IndexError(fan_index)

    def layout(self, beta=1.0):
        counts = self.sector_counts
        if self.chart_class == "smooth":
            return SectorLayout.smooth(self.valence, beta)
        if self.chart_class == "type3":
            return SectorLayout.concave_chart(counts, beta)
        if self.chart_class in ("boundary", "corner"):
            return SectorLayout.boundary(counts, corner=self.is_corner,
                                         beta=beta)
        return SectorLayout.creased(counts, beta)

    def layout_key(self):
        return (self.chart_class, tuple(self.sector_counts), self.is_corner)


class ControlMesh:
    def __init__(self, vertices, quads, crease_edges=(), concave_tags=None):
        self.vertices = np.asarray(vertices, dtype=float).reshape(-1, 3)
        self.quads = np.asarray(quads, dtype=int).reshape(-1, 4)
        self.concave_tags = dict(concave_tags or {})
        self._build_edges()
        self._validate_topology()
        creases = set()
        for a, b in crease_edges:
            key = (min(a, b), max(a, b))
            if key not in self.edge_ids:
                raise MeshError("crease references non-edge (%d, %d)" % (a, b))
            creases.add(key)
        # every boundary edge is implicitly a crease
        creases.update(self.boundary_edges)
        self.crease_edges = frozenset(creases)
        self.crease_ids = frozenset(self.edge_ids[e] for e in creases)
        self._build_fans()
        self._charts = {}

    # -- topology -----------------------------------------------------------

    def _build_edges(self):
        nv = len(self.vertices)
        nq = len(self.quads)
        keys = set()
        for q in range(nq):
            quad = self.quads[q]
            if len(set(int(i) for i in quad)) != 4:
                raise MeshError("quad %d has repeated vertices" % q)
            if quad.min() < 0 or quad.max() >= nv:
                raise MeshError("quad %d references missing vertex" % q)
            for side in range(4):
                a, b = int(quad[side]), int(quad[(side + 1) % 4])
                keys.add((min(a, b), max(a, b)))
        # canonical edge ids: lexicographic in the vertex pair, so numbering
        # is independent of quad ordering
        edge_ids = {key: i for i, key in enumerate(sorted(keys))}
        edge_quads = [[] for _ in keys]
        edge_dirs = [[] for _ in keys]
        for q in range(nq):
            quad = self.quads[q]
            for side in range(4):
                a, b = int(quad[side]), int(quad[(side + 1) % 4])
                eid = edge_ids[(min(a, b), max(a, b))]
                edge_quads[eid].append((q, side))
                edge_dirs[eid].append(a < b)
        self.edge_ids = edge_ids
        self.edge_verts = [None] * len(edge_ids)
        for key, eid in edge_ids.items():
            self.edge_verts[eid] = key
        self.edge_quads = edge_quads
        self._edge_dirs = edge_dirs
        self.boundary_edges = frozenset(
            key for key, eid in edge_ids.items() if len(edge_quads[eid]) == 1)
        self.n_vertices = nv
        self.n_edges = len(edge_ids)
        self.n_quads = nq
        self.n_nodes = nv + self.n_edges + nq

    def _validate_topology(self):
        for eid, incident in enumerate(self.edge_quads):
            if len(incident) > 2:
                raise MeshError("non-manifold edge %s" % (self.edge_verts[eid],))
            if len(incident) == 2 and self._edge_dirs[eid][0] == self._edge_dirs[eid][1]:
                raise MeshError("inconsistent orientation across edge %s"
                                % (self.edge_verts[eid],))

    def _build_fans(self):
        nv = self.n_vertices
        incident = [[] for _ in range(nv)]
        for q in range(self.n_quads):
            for p in range(4):
                incident[int(self.quads[q][p])].append((q, p))
        self._fans = [None] * nv
        self._boundary_vertex = np.zeros(nv, dtype=bool)
        for v in range(nv):
            if not incident[v]:
                raise MeshError("isolated vertex %d" % v)
            self._fans[v] = self._order_fan(v, incident[v])

    def _spoke_edge(self, v, other):
        return self.edge_ids[(min(v, other), max(v, other))]

    def _order_fan(self, v, slots):
        # at corner p of quad q the outgoing spokes are v->quad[p+1]
        # (leading, "x-axis") and v->quad[p+3] (trailing, "y-axis"); the next
        # counter-clockwise quad is the one across the trailing spoke.
        by_lead = {}
        for q, p in slots:
            lead = int(self.quads[q][(p + 1) % 4])
            by_lead[lead] = (q, p)
        trail_of = {}
        for q, p in slots:
            trail_of[(q, p)] = int(self.quads[q][(p + 3) % 4])
        # find open-fan start: a quad whose leading spoke is a boundary edge
        start = None
        leads = set(by_lead)
        trails = set(trail_of.values())
        open_fan = False
        for lead in sorted(leads - trails):
            start = by_lead[lead]
            open_fan = True
            break
        if start is None:
            start = slots[0]
        fan = [start]
        while True:
            nxt = trail_of[fan[-1]]
            if nxt not in by_lead or by_lead[nxt] == fan[0]:
                break
            fan.append(by_lead[nxt])
            if len(fan) > len(slots):
                raise MeshError("non-manifold fan at vertex %d" % v)
        if len(fan) != len(slots):
            raise MeshError("fan at vertex %d is not a single disk" % v)
        self._boundary_vertex[v] = open_fan
        return fan

    # -- queries ------------------------------------------------------------

    def is_boundary_vertex(self, v):
        return bool(self._boundary_vertex[v])

    def one_neighbourhood(self, v):
        """Quads incident to v in counter-clockwise fan order."""
        return [q for q, _ in self._fans[v]]

    def fan_spokes(self, v):
        """Spoke edge ids in fan order; open fans have one extra trailing
        spoke (both end spokes of an open fan are boundary edges)."""
        fan = self._fans[v]
        spokes = [self._spoke_edge(v, int(self.quads[q][(p + 1) % 4]))
                  for q, p in fan]
        if self._boundary_vertex[v]:
            q, p = fan[-1]
            spokes.append(self._spoke_edge(v, int(self.quads[q][(p + 3) % 4])))
        return spokes

    def _corner_angle(self, q, p):
        quad = self.quads[q]
        x = self.vertices[int(quad[p])]
        u = self.vertices[int(quad[(p + 1) % 4])] - x
        w = self.vertices[int(quad[(p + 3) % 4])] - x
        c = np.dot(u, w) / (np.linalg.norm(u) * np.linalg.norm(w))
        return float(np.arccos(np.clip(c, -1.0, 1.0)))

    def _canonical_sectors(self, v):
        """Fan rotated to the canonical start spoke plus sector element
        counts split at creased spokes.  Used both by classification and by
        concave-tag rederivation under refinement."""
        fan = list(self._fans[v])
        spokes = self.fan_spokes(v)
        if self._boundary_vertex[v]:
            creased = [i for i, e in enumerate(spokes[1:-1], start=1)
                       if e in self.crease_ids]
            cuts = [0] + creased + [len(fan)]
            counts = [cuts[i + 1] - cuts[i] for i in range(len(cuts) - 1)]
            return fan, counts
        creased = [i for i, e in enumerate(spokes) if e in self.crease_ids]
        if len(creased) == 1:
            raise MeshError(
                "vertex %d has a single crease edge ending at it "
                "(crease endpoints are not supported)" % v)
        if not creased:
            start = int(np.argmin([spokes[i] for i in range(len(fan))]))
            fan = fan[start:] + fan[:start]
            return fan, [len(fan)]
        start = min(creased, key=lambda i: spokes[i])
        fan = fan[start:] + fan[:start]
        creased = sorted((i - start) % len(spokes) for i in creased)
        counts = [creased[i + 1] - creased[i] for i in range(len(creased) - 1)]
        counts.append(len(fan) - creased[-1])
        return fan, counts

    def classify_chart(self, v):
        if v in self._charts:
            return self._charts[v]
        fan, counts = self._canonical_sectors(v)
        concave = False
        if self._boundary_vertex[v]:
            if v in self.concave_tags:
                raise MeshError("concave tag on boundary vertex %d" % v)
            angle = sum(self._corner_angle(q, p) for q, p in fan)
            corner = angle < 3 * np.pi / 4
            cls = "corner" if corner else "boundary"
            desc = ChartDescriptor(v, fan, None, counts, cls,
                                   True, corner)
        elif v in self.concave_tags:
            tag = int(self.concave_tags[v])
            if len(counts) < 2:
                raise MeshError("concave tag on vertex %d with fewer than 2 "
                                "creases" % v)
            if not 0 <= tag < len(counts):
                raise MeshError("concave tag names nonexistent sector %d at "
                                "vertex %d" % (tag, v))
            # renumber so the concave sector is last
            shift = sum(counts[:tag + 1])
            fan = fan[shift:] + fan[:shift]
            counts = counts[tag + 1:] + counts[:tag + 1]
            concave = True
            desc = ChartDescriptor(v, fan, None, counts, "type3",
                                   False, False, concave=True)
        elif len(counts) == 1 and counts[0] == len(fan):
            desc = ChartDescriptor(v, fan, None, counts, "smooth",
                                   False, False)
        else:
            cls = "type1" if len(set(counts)) == 1 else "type2"
            desc = ChartDescriptor(v, fan, None, counts, cls, False, False)
        desc.spokes = self.fan_spokes(v)
        self._charts[v] = desc
        return desc

    # -- node table ---------------------------------------------------------

    def vertex_node(self, v):
        return int(v)

    def edge_node(self, a, b):
        return self.n_vertices + self.edge_ids[(min(a, b), max(a, b))]

    def face_node(self, q):
        return self.n_vertices + self.n_edges + int(q)

    def node_positions(self, vertex_positions=None):
        """Positions of all nodes: vertices, edge midpoints, face centroids."""
        verts = self.vertices if vertex_positions is None \
            else np.asarray(vertex_positions, dtype=float)
        pos = np.empty((self.n_nodes, verts.shape[1]))
        pos[:self.n_vertices] = verts
        for (a, b), eid in self.edge_ids.items():
            pos[self.n_vertices + eid] = 0.5 * (verts[a] + verts[b])
        pos[self.n_vertices + self.n_edges:] = verts[self.quads].mean(axis=1)
        return pos

    def element_size(self):
        """Representative element size: mean edge length."""
        lengths = [np.linalg.norm(self.vertices[a] - self.vertices[b])
                   for a, b in self.edge_ids]
        return float(np.mean(lengths))

    # -- refinement ---------------------------------------------------------

    def refine(self, smooth=False):
        """Catmull-Clark topological split; creases propagate to child edges.

        With ``smooth=True`` the new positions follow the Catmull-Clark
        smoothing rules (crease and boundary edges use the univariate spline
        rules, crease corners stay fixed), so repeated refinement grades the
        control net towards the subdivision limit surface.  The default uses
        plain midpoint/centroid positions, which keeps the control polygon
        geometry unchanged."""
        nv, ne, nq = self.n_vertices, self.n_edges, self.n_quads
        verts = np.empty((nv + ne + nq, 3))
        verts[:nv] = self.vertices
        for (a, b), eid in self.edge_ids.items():
            verts[nv + eid] = 0.5 * (self.vertices[a] + self.vertices[b])
        verts[nv + ne:] = self.vertices[self.quads].mean(axis=1)
        if smooth:
            self._smooth_positions(verts)

        quads = []
        for q in range(nq):
            quad = self.quads[q]
            mids = [nv + self.edge_ids[self._ekey(quad[i], quad[(i + 1) % 4])]
                    for i in range(4)]
            center = nv + ne + q
            for p in range(4):
                quads.append((int(quad[p]), mids[p], center, mids[(p + 3) % 4]))

        creases = []
        for a, b in self.crease_edges:
            mid = nv + self.edge_ids[(a, b)]
            creases.append((a, mid))
            creases.append((mid, b))

        fine = ControlMesh(verts, quads, creases)
        # re-derive concave tags: locate the child sector containing the
        # child quad at the tagged corner of the parent sector's first quad
        tags = {}
        for v, tag in self.concave_tags.items():
            fan, counts = self._canonical_sectors(v)
            first = sum(counts[:int(tag)])
            pq, pp = fan[first]
            child_quad = 4 * pq + pp
            cfan, ccounts = fine._canonical_sectors(v)
            idx = [q for q, _ in cfan].index(child_quad)
            s = 0
            seen = ccounts[0]
            while idx >= seen:
                s += 1
                seen += ccounts[s]
            tags[v] = s
        if tags:
            fine = ControlMesh(verts, quads, creases, tags)
        return fine

    def _ekey(self, a, b):
        a, b = int(a), int(b)
        return (min(a, b), max(a, b))

    def _other_end(self, eid, v):
        a, b = self.edge_verts[eid]
        return b if a == v else a

    def _smooth_positions(self, verts):
        """Overwrite the linear child positions in-place with the
        Catmull-Clark smoothing masks.  Boundary edges count as creases;
        vertices with three or more sharp spokes and convex boundary
        corners interpolate."""
        nv, ne = self.n_vertices, self.n_edges
        old = self.vertices
        faces = verts[nv + ne:]
        for eid, (a, b) in enumerate(self.edge_verts):
            incident = self.edge_quads[eid]
            if len(incident) == 2 and eid not in self.crease_ids:
                verts[nv + eid] = 0.25 * (old[a] + old[b]
                                          + faces[incident[0][0]]
                                          + faces[incident[1][0]])
        for v in range(nv):
            spokes = self.fan_spokes(v)
            sharp = [e for e in spokes if e in self.crease_ids
                     or len(self.edge_quads[e]) == 1]
            if len(sharp) < 2 and not self._boundary_vertex[v]:
                n = len(spokes)
                centroid = faces[self.one_neighbourhood(v)].mean(axis=0)
                nb = old[[self._other_end(e, v) for e in spokes]].mean(axis=0)
                mids = 0.5 * (old[v] + nb)
                verts[v] = (centroid + 2.0 * mids + (n - 3.0) * old[v]) / n
            elif len(sharp) == 2 and not (self._boundary_vertex[v]
                                          and self.classify_chart(v).is_corner):
                n1, n2 = (self._other_end(e, v) for e in sharp)
                verts[v] = (old[n1] + 6.0 * old[v] + old[n2]) / 8.0

    # -- limit projection ---------------------------------------------------

    def limit_project(self):
        """Catmull-Clark limit positions of the corner vertices (export only)."""
        out = self.vertices.copy()
        for v in range(self.n_vertices):
            spokes = self.fan_spokes(v)
            creased = [e for e in spokes if e in self.crease_ids]
            if not self._boundary_vertex[v] and not creased:
                n = len(self._fans[v])
                edge_sum = np.zeros(3)
                diag_sum = np.zeros(3)
                for q, p in self._fans[v]:
                    edge_sum += self.vertices[int(self.quads[q][(p + 1) % 4])]
                    diag_sum += self.vertices[int(self.quads[q][(p + 2) % 4])]
                out[v] = (n * n * self.vertices[v] + 4.0 * edge_sum + diag_sum) \
                    / (n * (n + 5.0))
            elif len(creased) == 2 and not (self._boundary_vertex[v]
                                            and self.classify_chart(v).is_corner):
                nb = []
                for e in creased:
                    a, b = self.edge_verts[e]
                    nb.append(b if a == v else a)
                out[v] = (self.vertices[nb[0]] + 4.0 * self.vertices[v]
                          + self.vertices[nb[1]]) / 6.0
            # >= 3 creases, crease corners: interpolate (identity mask)
        return out
