"""
Structured background triangulation of the box D = [-1, 1]^2 and its
barycentric (Alfeld) refinement.
"""
from dataclasses import dataclass, field

import numpy as np

BOX = (-1.0, 1.0)
_BTOL = 1e-12


@dataclass(frozen=True)
class EdgeTable:
    """Unique undirected edges of a triangulation.

    Attributes
    ----------
    vertices : ndarray (E, 2)
        Vertex index pairs, sorted within each pair.
    midpoints : ndarray (E, 2)
    triangles : ndarray (E, 2)
        Incident triangles; the second entry is -1 on boundary edges.
    tri_edges : ndarray (F, 3)
        Edge index of local edge (0,1), (1,2), (2,0) of every triangle.
    """

    vertices: np.ndarray
    midpoints: np.ndarray
    triangles: np.ndarray
    tri_edges: np.ndarray

    def __len__(self):
        return len(self.vertices)

    @property
    def is_boundary(self):
        return self.triangles[:, 1] < 0


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation with counter-clockwise triangles.

    ``h`` is the diameter of the pre-split elements; ``parent`` maps each
    triangle to the triangle it was split from (identity before a split).
    """

    points: np.ndarray
    triangles: np.ndarray
    h: float
    parent: np.ndarray
    n: int = 0
    split: bool = False
    _edges: list = field(default_factory=list, repr=False)

    @property
    def num_vertices(self):
        return len(self.points)

    @property
    def num_triangles(self):
        return len(self.triangles)

    @property
    def boundary_vertices(self):
        return on_box_boundary(self.points)

    def edges(self):
        """Cached :func:`edge_table` of this mesh."""
        if not self._edges:
            self._edges.append(edge_table(self))
        return self._edges[0]

    def areas(self):
        p = self.points[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def diameters(self):
        p = self.points[self.triangles]
        lengths = [np.linalg.norm(p[:, i] - p[:, (i + 1) % 3], axis=1) for i in range(3)]
        return np.max(lengths, axis=0)

    def min_angles(self):
        """Smallest interior angle of each triangle, in degrees."""
        p = self.points[self.triangles]
        angles = []
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            c = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))
        return np.min(angles, axis=0)

    def dump(self, stream):
        """Write vertices ("x y") then triangles ("i j k", zero based)."""
        for x, y in self.points:
            stream.write(f"{x!r} {y!r}\n")
        for i, j, k in self.triangles:
            stream.write(f"{i} {j} {k}\n")


def on_box_boundary(points, tol=_BTOL):
    x, y = points[..., 0], points[..., 1]
    return (np.abs(np.abs(x) - 1.0) <= tol) | (np.abs(np.abs(y) - 1.0) <= tol)


def build_uniform(n):
    """Uniform n x n triangulation of D.

    Every square cell is split along its lower-left to upper-right diagonal.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.linspace(BOX[0], BOX[1], n + 1)
    X, Y = np.meshgrid(t, t, indexing="xy")
    points = np.column_stack([X.ravel(), Y.ravel()])
    j, i = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a = (j * (n + 1) + i).ravel()
    b = a + 1
    c = a + n + 2
    d = a + n + 1
    tris = np.empty((2 * n * n, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([a, b, c])
    tris[1::2] = np.column_stack([a, c, d])
    h = 2.0 * np.sqrt(2.0) / n
    return Mesh(points, tris, h, np.arange(len(tris)), n=n)


def alfeld_split(mesh):
    """Split every triangle into three through its barycenter."""
    nv = mesh.num_vertices
    nt = mesh.num_triangles
    bary = mesh.points[mesh.triangles].mean(axis=1)
    points = np.vstack([mesh.points, bary])
    g = nv + np.arange(nt)
    a, b, c = mesh.triangles.T
    tris = np.empty((3 * nt, 3), dtype=np.int64)
    tris[0::3] = np.column_stack([a, b, g])
    tris[1::3] = np.column_stack([b, c, g])
    tris[2::3] = np.column_stack([c, a, g])
    parent = np.repeat(np.arange(nt), 3)
    return Mesh(points, tris, mesh.h, parent, n=mesh.n, split=True)


def edge_table(mesh):
    """Build the unique edge list with incident triangles."""
    tris = mesh.triangles
    nt = len(tris)
    local = np.array([[0, 1], [1, 2], [2, 0]])
    all_edges = tris[:, local].reshape(-1, 2)
    all_edges = np.sort(all_edges, axis=1)
    uniq, inverse = np.unique(all_edges, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    owner = np.repeat(np.arange(nt), 3)
    adj = -np.ones((len(uniq), 2), dtype=np.int64)
    order = np.argsort(inverse, kind="stable")
    inv_sorted = inverse[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = inv_sorted[1:] != inv_sorted[:-1]
    adj[inv_sorted[first], 0] = owner[order[first]]
    adj[inv_sorted[~first], 1] = owner[order[~first]]
    counts = np.bincount(inverse, minlength=len(uniq))
    if np.any(counts > 2):
        raise ValueError("non-manifold mesh: edge shared by more than two triangles")
    mid = mesh.points[uniq].mean(axis=1)
    return EdgeTable(uniq, mid, adj, inverse.reshape(nt, 3))
