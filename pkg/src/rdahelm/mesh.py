"""Structured triangular meshes of the unit square with face topology.

Meshes are built once and treated as immutable afterwards.  Each n x n grid
square is split along the same diagonal, which keeps red refinement nested
(every child triangle lies inside its parent) and makes face ordering and
the +/- side convention fully deterministic.
"""

from dataclasses import dataclass, field

import numpy as np


class MeshTopologyError(Exception):
    """Raised when the element list does not describe a conforming mesh."""


@dataclass(frozen=True)
class FaceRecord:
    """One mesh edge with orientation data for jumps and averages.

    The normal points from the "+" side into the "-" side; on interior faces
    the "+" side is the adjacent element with the lower index, on boundary
    faces it is the only adjacent element and the normal points outward.
    """

    vertices: tuple        # (i, j) with i < j
    h_e: float
    normal: np.ndarray     # unit, from plus into minus
    elem_plus: int
    elem_minus: int        # -1 on boundary faces
    boundary: bool


@dataclass(frozen=True)
class TriMesh:
    vertices: np.ndarray          # (nv, 2)
    elements: np.ndarray          # (ne, 3) int, counterclockwise
    faces: list = field(default_factory=list)
    h_K: np.ndarray = None        # element diameters
    area: np.ndarray = None
    barycenter: np.ndarray = None # (ne, 2)
    level: int = 0
    parent_map: np.ndarray = None # fine element -> parent index, None at level 0

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def h(self):
        return float(self.h_K.max())

    def interior_faces(self):
        return [f for f in self.faces if not f.boundary]

    def boundary_faces(self):
        return [f for f in self.faces if f.boundary]

    def face_neighbors(self, k):
        """Indices of elements sharing a face with element k."""
        return self._neighbors[k]


def _element_geometry(vertices, elements):
    p0 = vertices[elements[:, 0]]
    p1 = vertices[elements[:, 1]]
    p2 = vertices[elements[:, 2]]
    cross = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - \
            (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
    area = 0.5 * cross
    d01 = np.linalg.norm(p1 - p0, axis=1)
    d12 = np.linalg.norm(p2 - p1, axis=1)
    d20 = np.linalg.norm(p0 - p2, axis=1)
    h_K = np.maximum(np.maximum(d01, d12), d20)
    bary = (p0 + p1 + p2) / 3.0
    return h_K, area, bary


def build_face_topology(vertices, elements):
    """Build the FaceRecord list for an element array.

    Faces are ordered by their sorted endpoint index pair; on interior faces
    the lower adjacent element index is the "+" side.  Raises
    MeshTopologyError if an edge is shared by more than two elements.
    """
    edge_elems = {}
    for k, tri in enumerate(elements):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            edge_elems.setdefault(key, []).append(k)

    faces = []
    for key in sorted(edge_elems):
        adj = sorted(edge_elems[key])
        if len(adj) > 2:
            raise MeshTopologyError(
                f"edge {key} shared by {len(adj)} elements")
        i, j = key
        tangent = vertices[j] - vertices[i]
        h_e = float(np.linalg.norm(tangent))
        normal = np.array([tangent[1], -tangent[0]]) / h_e
        plus = adj[0]
        # orient the normal away from the "+" element barycenter
        bary = vertices[elements[plus]].mean(axis=0)
        mid = 0.5 * (vertices[i] + vertices[j])
        if np.dot(normal, mid - bary) < 0.0:
            normal = -normal
        if len(adj) == 2:
            faces.append(FaceRecord(key, h_e, normal, plus, adj[1], False))
        else:
            faces.append(FaceRecord(key, h_e, normal, plus, -1, True))
    return faces


def _finalize(vertices, elements, level, parent_map):
    h_K, area, bary = _element_geometry(vertices, elements)
    if np.any(area <= 0.0):
        raise MeshTopologyError("non-positive element area (orientation?)")
    faces = build_face_topology(vertices, elements)
    mesh = TriMesh(vertices=vertices, elements=elements, faces=faces,
                   h_K=h_K, area=area, barycenter=bary,
                   level=level, parent_map=parent_map)
    neighbors = [[] for _ in range(len(elements))]
    for f in faces:
        if not f.boundary:
            neighbors[f.elem_plus].append(f.elem_minus)
            neighbors[f.elem_minus].append(f.elem_plus)
    object.__setattr__(mesh, "_neighbors", [sorted(v) for v in neighbors])
    return mesh


def uniform_square_mesh(n):
    """n x n grid of squares on (0,1)^2, each split by the same diagonal.

    Yields 2n^2 elements, (n+1)^2 vertices and 3n^2+2n faces.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    vx, vy = np.meshgrid(xs, xs, indexing="ij")
    vertices = np.column_stack([vx.ravel(), vy.ravel()])

    def vid(i, j):
        return i * (n + 1) + j

    elements = []
    for i in range(n):
        for j in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            elements.append((v00, v10, v11))   # below the diagonal
            elements.append((v00, v11, v01))   # above the diagonal
    elements = np.array(elements, dtype=np.int64)
    return _finalize(vertices, elements, level=0, parent_map=None)


def perturbed_square_mesh(n, amplitude=0.25, seed=0):
    """Diagonal-split grid with interior vertices jittered deterministically.

    Each interior vertex moves by a uniform offset of at most amplitude/n in
    each coordinate; boundary vertices stay put.  The random stream is seeded
    from (n, seed), so repeated calls give bit-identical meshes.  Useful for
    studies where the perfect symmetry of the structured grid would trigger
    superconvergence effects that an unstructured mesh does not show.
    """
    base = uniform_square_mesh(n)
    rng = np.random.default_rng(np.random.SeedSequence([n, seed]))
    shift = rng.uniform(-amplitude / n, amplitude / n,
                        size=base.vertices.shape)
    interior = np.all((base.vertices > 1e-12) &
                      (base.vertices < 1.0 - 1e-12), axis=1)
    vertices = base.vertices + shift * interior[:, None]
    return _finalize(vertices, base.elements.copy(), level=0,
                     parent_map=None)


def refine_red(mesh):
    """Split every triangle into 4 congruent children via edge midpoints."""
    vertices = list(map(tuple, mesh.vertices))
    midpoint_id = {}

    def mid(a, b):
        key = (min(a, b), max(a, b))
        if key not in midpoint_id:
            p = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
            midpoint_id[key] = len(vertices)
            vertices.append(tuple(p))
        return midpoint_id[key]

    elements = []
    parent = []
    for k, (v0, v1, v2) in enumerate(mesh.elements):
        m01, m12, m02 = mid(v0, v1), mid(v1, v2), mid(v0, v2)
        for child in ((v0, m01, m02), (m01, v1, m12),
                      (m02, m12, v2), (m01, m12, m02)):
            elements.append(child)
            parent.append(k)
    new_vertices = np.array(vertices, dtype=float)
    new_elements = np.array(elements, dtype=np.int64)
    return _finalize(new_vertices, new_elements, level=mesh.level + 1,
                     parent_map=np.array(parent, dtype=np.int64))


def point_in_triangle(p, a, b, c, tol=1e-12):
    """Barycentric containment test (closed triangle)."""
    v0, v1, v2 = b - a, c - a, p - a
    den = v0[0] * v1[1] - v0[1] * v1[0]
    s = (v2[0] * v1[1] - v2[1] * v1[0]) / den
    t = (v0[0] * v2[1] - v0[1] * v2[0]) / den
    return s >= -tol and t >= -tol and s + t <= 1.0 + tol


def dump_mesh(mesh, path):
    """Plain-text mesh dump: `ndim 2`, then `v x y` and `t i j k` lines."""
    with open(path, "w") as fh:
        fh.write("ndim 2\n")
        for x, y in mesh.vertices:
            fh.write(f"v {float(x)!r} {float(y)!r}\n")
        for i, j, k in mesh.elements:
            fh.write(f"t {i} {j} {k}\n")
