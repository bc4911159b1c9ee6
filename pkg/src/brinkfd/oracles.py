"""
Slow reference implementations used to cross-check the vectorized code.

Basis functions are rebuilt per element from monomials by solving the 6x6
nodal Vandermonde system, and integrals use a dense Gauss-Legendre rule on
the collapsed square. Nothing here shares code with the assembly path
beyond the mesh, dof maps and (for side-restricted forms) the geometric
sub-triangulation itself.
"""
import numpy as np

from .geometry import ElementClass, Side

_LOCAL_NODES = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1],
                         [0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]])


def dense_rule(vertices, m=8):
    """Points (q, 2) and weights of a degree 2m-2 rule on a physical triangle."""
    x, w = np.polynomial.legendre.leggauss(m)
    s = 0.5 * (x + 1)
    ws = 0.5 * w
    a, b = np.meshgrid(s, s, indexing="ij")
    wa, wb = np.meshgrid(ws, ws, indexing="ij")
    # Duffy: (a, b) in the unit square -> (a, (1 - a) b) in the unit triangle
    r = a.ravel()
    t = ((1 - a) * b).ravel()
    jac = (1 - a).ravel() * (wa * wb).ravel()
    v0, v1, v2 = np.asarray(vertices, dtype=float)
    pts = v0 + np.outer(r, v1 - v0) + np.outer(t, v2 - v0)
    det = abs((v1 - v0)[0] * (v2 - v0)[1] - (v1 - v0)[1] * (v2 - v0)[0])
    return pts, jac * det


def _monomials(p):
    x, y = p[:, 0], p[:, 1]
    one = np.ones_like(x)
    vals = np.column_stack([one, x, y, x * x, x * y, y * y])
    dx = np.column_stack([0 * x, one, 0 * x, 2 * x, y, 0 * x])
    dy = np.column_stack([0 * x, 0 * x, one, 0 * x, x, 2 * y])
    return vals, dx, dy


class MonomialP2:
    """Nodal P2 basis of one triangle expressed in monomials."""

    def __init__(self, vertices):
        vertices = np.asarray(vertices, dtype=float)
        nodes = _LOCAL_NODES @ vertices
        vand, _, _ = _monomials(nodes)
        self.coef = np.linalg.inv(vand)  # column j holds basis j

    def __call__(self, pts):
        vals, dx, dy = _monomials(np.atleast_2d(pts))
        return vals @ self.coef, np.stack([dx @ self.coef, dy @ self.coef], axis=-1)


def _p1(vertices, pts):
    v = np.asarray(vertices, dtype=float)
    T = np.column_stack([v[1] - v[0], v[2] - v[0]])
    l12 = np.linalg.solve(T, (pts - v[0]).T).T
    return np.column_stack([1 - l12.sum(axis=1), l12])


def _side_pieces(geometry, elem, side):
    cls = geometry.classes[elem]
    verts = geometry.mesh.points[geometry.mesh.triangles[elem]]
    full = ElementClass.INSIDE if side == Side.OMEGA else ElementClass.OUTSIDE
    if cls == full:
        return [verts]
    if cls != ElementClass.CUT:
        return []
    pieces, owner = geometry._cut_pieces[side]
    return list(pieces[owner == elem])


def _pieces(mesh, geometry, elem, side):
    if side is None:
        return [mesh.points[mesh.triangles[elem]]]
    return _side_pieces(geometry, elem, Side(side))


def dense_scalar_matrix(space, kind, w=None, geometry=None, side=None, m=8):
    """Dense scalar P2 matrix: ``mass``, ``stiffness`` or ``convection``."""
    mesh = space.mesh
    n = space.num_nodes
    out = np.zeros((n, n))
    W = None if w is None else space.split(w)
    for e in range(mesh.num_triangles):
        verts = mesh.points[mesh.triangles[e]]
        basis = MonomialP2(verts)
        nodes = space.cell_nodes[e]
        for piece in _pieces(mesh, geometry, e, side):
            pts, wts = dense_rule(piece, m)
            phi, dphi = basis(pts)
            if kind == "mass":
                loc = np.einsum("q,qa,qb->ab", wts, phi, phi)
            elif kind == "stiffness":
                loc = np.einsum("q,qad,qbd->ab", wts, dphi, dphi)
            elif kind == "convection":
                wq = np.stack([phi @ W[0, nodes], phi @ W[1, nodes]], axis=1)
                adv = np.einsum("qd,qbd->qb", wq, dphi)
                loc = np.einsum("q,qa,qb->ab", wts, phi, adv)
            else:
                raise ValueError(kind)
            out[np.ix_(nodes, nodes)] += loc
    return out


def dense_divergence(vspace, pspace, m=8):
    mesh = vspace.mesh
    n = vspace.num_nodes
    out = np.zeros((pspace.ndofs, 2 * n))
    for e in range(mesh.num_triangles):
        verts = mesh.points[mesh.triangles[e]]
        basis = MonomialP2(verts)
        pts, wts = dense_rule(verts, m)
        _, dphi = basis(pts)
        psi = _p1(verts, pts)
        rows = 3 * e + np.arange(3)
        nodes = vspace.cell_nodes[e]
        for c in range(2):
            loc = -np.einsum("q,qi,qa->ia", wts, psi, dphi[:, :, c])
            out[np.ix_(rows, nodes + c * n)] += loc
    return out


def dense_rhs(space, geometry, f, t, m=8):
    mesh = space.mesh
    n = space.num_nodes
    out = np.zeros(2 * n)
    for e in range(mesh.num_triangles):
        basis = MonomialP2(mesh.points[mesh.triangles[e]])
        nodes = space.cell_nodes[e]
        for piece in _side_pieces(geometry, e, Side.OMEGA):
            pts, wts = dense_rule(piece, m)
            phi, _ = basis(pts)
            fq = f(t, pts)
            for c in range(2):
                out[nodes + c * n] += np.einsum("q,qa,q->a", wts, phi, fq[:, c])
    return out


def vector_block(S):
    n = S.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = S
    out[n:, n:] = S
    return out


def dense_velocity_integral(space, u, fn, m=8, geometry=None, side=None):
    """Integrate ``fn(values (q,2), grads (q,2,2)) -> (q,)`` of a discrete field."""
    mesh = space.mesh
    U = space.split(u)
    total = 0.0
    for e in range(mesh.num_triangles):
        basis = MonomialP2(mesh.points[mesh.triangles[e]])
        nodes = space.cell_nodes[e]
        for piece in _pieces(mesh, geometry, e, side):
            pts, wts = dense_rule(piece, m)
            phi, dphi = basis(pts)
            vals = np.stack([phi @ U[0, nodes], phi @ U[1, nodes]], axis=1)
            grads = np.stack([dphi.transpose(0, 2, 1) @ U[c, nodes] for c in range(2)], axis=1)
            total += float(np.sum(wts * fn(vals, grads)))
    return total
