"""
Scott-Vogelius pair on an Alfeld-split mesh.

Velocity: continuous piecewise quadratics (two components) vanishing on the
boundary of D. Pressure: discontinuous piecewise linears.

Scalar P2 nodes are numbered vertices first, then edge midpoints. Velocity
component ``c`` of scalar node ``s`` has global index ``c * num_nodes + s``.
Pressure dof ``i`` of triangle ``t`` has index ``3 * t + i`` and basis
function equal to the barycentric coordinate of local vertex ``i``.
"""
from dataclasses import dataclass, field

import numpy as np

from .mesh import on_box_boundary


# local edge k joins local vertices EDGE_VERTS[k]
EDGE_VERTS = np.array([[0, 1], [1, 2], [2, 0]])


def p2_values(lam):
    """P2 Lagrange basis at barycentric points, shape (q, 6)."""
    lam = np.asarray(lam, dtype=float)
    l0, l1, l2 = lam[..., 0], lam[..., 1], lam[..., 2]
    return np.stack([
        l0 * (2 * l0 - 1),
        l1 * (2 * l1 - 1),
        l2 * (2 * l2 - 1),
        4 * l0 * l1,
        4 * l1 * l2,
        4 * l2 * l0,
    ], axis=-1)


def p2_dlam(lam):
    """Derivatives of the P2 basis with respect to (l0, l1, l2), shape (q, 6, 3)."""
    lam = np.asarray(lam, dtype=float)
    l0, l1, l2 = lam[..., 0], lam[..., 1], lam[..., 2]
    z = np.zeros_like(l0)
    rows = [
        (4 * l0 - 1, z, z),
        (z, 4 * l1 - 1, z),
        (z, z, 4 * l2 - 1),
        (4 * l1, 4 * l0, z),
        (z, 4 * l2, 4 * l1),
        (4 * l2, z, 4 * l0),
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def p1_values(lam):
    return np.asarray(lam, dtype=float).copy()


def barycentric_gradients(mesh, elem=None):
    """Constant gradients of the barycentric coordinates, shape (k, 3, 2)."""
    tris = mesh.triangles if elem is None else mesh.triangles[elem]
    v = mesh.points[tris]
    d1 = v[:, 1] - v[:, 0]
    d2 = v[:, 2] - v[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.any(np.abs(det) <= 1e-300):
        raise ValueError("degenerate element")
    g1 = np.column_stack([d2[:, 1], -d2[:, 0]]) / det[:, None]
    g2 = np.column_stack([-d1[:, 1], d1[:, 0]]) / det[:, None]
    return np.stack([-g1 - g2, g1, g2], axis=1)


def eval_velocity_basis(vertices, lam):
    """Values and physical gradients of the six P2 functions on one element.

    Parameters
    ----------
    vertices : array (3, 2)
    lam : array (3,) or (q, 3)
        Barycentric points; must be nonnegative and sum to one.

    Returns
    -------
    values : ndarray (..., 6)
    grads : ndarray (..., 6, 2)
    """
    vertices = np.asarray(vertices, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < -1e-14) or np.any(np.abs(lam.sum(axis=-1) - 1.0) > 1e-12):
        raise ValueError("point is not a valid barycentric point of the element")
    d1 = vertices[1] - vertices[0]
    d2 = vertices[2] - vertices[0]
    det = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(det) <= 1e-14 * max(np.abs(vertices).max(), 1.0) ** 2:
        raise ValueError("degenerate element")
    g1 = np.array([d2[1], -d2[0]]) / det
    g2 = np.array([-d1[1], d1[0]]) / det
    G = np.stack([-g1 - g2, g1, g2])
    return p2_values(lam), p2_dlam(lam) @ G


@dataclass(frozen=True, eq=False)
class VelocitySpace:
    mesh: object
    cell_nodes: np.ndarray  # (F, 6) scalar node indices
    node_coords: np.ndarray  # (num_nodes, 2)
    boundary_nodes: np.ndarray  # bool (num_nodes,)
    _tables: dict = field(default_factory=dict, repr=False)

    @property
    def num_nodes(self):
        return len(self.node_coords)

    @property
    def ndofs(self):
        return 2 * self.num_nodes

    @property
    def boundary_mask(self):
        """Boolean mask over all velocity dofs constrained to zero."""
        return np.concatenate([self.boundary_nodes, self.boundary_nodes])

    def cell_dofs(self):
        """Velocity dof indices per element, shape (F, 12): x components then y."""
        return np.hstack([self.cell_nodes, self.cell_nodes + self.num_nodes])

    def split(self, u):
        """View a coefficient vector as (2, num_nodes)."""
        return np.asarray(u).reshape(2, self.num_nodes)

    def tables(self, points):
        """Basis values, physical gradients and node indices at ``points``.

        Cached per point set; the set must not be mutated afterwards.
        """
        key = id(points)
        cache = self._tables
        hit = cache.get(key)
        if hit is not None and hit[0] is points:
            return hit[1]
        G = barycentric_gradients(self.mesh)[points.elem]
        dphi = np.einsum("qak,qkd->qad", p2_dlam(points.lam), G, optimize=True)
        table = (p2_values(points.lam), dphi, self.cell_nodes[points.elem])
        cache[key] = (points, table)
        return table

    def evaluate(self, u, points):
        """Values (q, 2) and gradients (q, 2, 2) of ``u`` at a PointSet.

        ``grad[:, c, d]`` is the derivative of component ``c`` along ``d``.
        """
        U = self.split(u)
        phi, dphi, nodes = self.tables(points)
        vals = np.empty((len(phi), 2))
        grads = np.empty((len(phi), 2, 2))
        for c in range(2):
            coef = U[c, nodes]
            vals[:, c] = np.sum(coef * phi, axis=1)
            grads[:, c, 0] = np.sum(coef * dphi[:, :, 0], axis=1)
            grads[:, c, 1] = np.sum(coef * dphi[:, :, 1], axis=1)
        return vals, grads


@dataclass(frozen=True, eq=False)
class PressureSpace:
    mesh: object

    @property
    def ndofs(self):
        return 3 * self.mesh.num_triangles

    def cell_dofs(self):
        return np.arange(self.ndofs).reshape(-1, 3)

    def evaluate(self, p, points):
        coef = np.asarray(p).reshape(-1, 3)[points.elem]
        return np.sum(coef * points.lam, axis=1)


def build_spaces(mesh):
    """Velocity and pressure spaces on an Alfeld-split mesh."""
    if not mesh.split:
        raise ValueError("the Scott-Vogelius pair requires an Alfeld-split mesh")
    edges = mesh.edges()
    nv = mesh.num_vertices
    cell_nodes = np.hstack([mesh.triangles, nv + edges.tri_edges])
    coords = np.vstack([mesh.points, edges.midpoints])
    boundary = on_box_boundary(coords)
    return VelocitySpace(mesh, cell_nodes, coords, boundary), PressureSpace(mesh)


def interpolate(space, fn, t=None):
    """Nodal interpolant of a vector field ``field(points) -> (k, 2)``.

    When ``t`` is given the field is called as ``field(t, points)``. Boundary
    dofs keep the field's own values there.
    """
    pts = space.node_coords
    vals = np.asarray(fn(pts) if t is None else fn(t, pts), dtype=float)
    vals = np.broadcast_to(vals, (len(pts), 2))
    return np.concatenate([vals[:, 0], vals[:, 1]])


def apply_boundary(space, u):
    """Copy of ``u`` with the boundary dofs set to zero."""
    u = np.array(u, dtype=float)
    u[space.boundary_mask] = 0.0
    return u
