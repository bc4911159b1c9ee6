"""
Assembly of the discrete forms

    a(u, v)    = mu int_D grad u : grad v
    b(p, v)    = -int_D p div v
    c(w; u, v) = int_D (w . grad u) . v
    s(w; u, v) = kappa(w) int_{D1} u . v,   kappa(w) = 1 / (eps (|w|_{L2(D1)}^beta + delta_reg))

and of the load vector int_Omega f . v. Element loops are vectorized over
quadrature points and reduced per element before scattering to CSR storage.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fespace import barycentric_gradients, p2_dlam, p2_values
from .geometry import Side
from .quadrature import standard_points

DELTA_REG = 1e-9
# exactness degree per form
MASS_DEGREE = 4
STIFF_DEGREE = 4
DIV_DEGREE = 4
CONV_DEGREE = 5
RHS_DEGREE = 6

_CHUNK = 200_000


def _element_sums(points, fn):
    """Sum ``fn(chunk) -> (q, ...)`` over the points of each element.

    Returns the touched elements and their local arrays.
    """
    elems, starts = points.segments()
    if len(elems) == 0:
        return elems, None
    ends = np.r_[starts[1:], len(points)]
    out = []
    i = 0
    while i < len(elems):
        j = np.searchsorted(ends, starts[i] + _CHUNK, side="right")
        j = max(j, i + 1)
        lo, hi = starts[i], ends[j - 1]
        contrib = fn(slice(lo, hi))
        out.append(np.add.reduceat(contrib, starts[i:j] - lo, axis=0))
        i = j
    return elems, np.concatenate(out)


def _scatter(local, rows, cols, shape):
    r = np.broadcast_to(rows[:, :, None], local.shape).ravel()
    c = np.broadcast_to(cols[:, None, :], local.shape).ravel()
    m = sp.coo_matrix((local.ravel(), (r, c)), shape=shape).tocsr()
    m.sum_duplicates()
    m.sort_indices()
    return m


def _symmetric(m):
    """Average with the transpose so the stored matrix is exactly symmetric."""
    out = (0.5 * (m + m.T)).tocsr()
    out.sort_indices()
    return out


def _vector(scalar):
    return sp.block_diag((scalar, scalar), format="csr")


def _basis_at(space, points, sl):
    lam = points.lam[sl]
    G = barycentric_gradients(space.mesh, points.elem[sl])
    return p2_values(lam), np.einsum("qak,qkd->qad", p2_dlam(lam), G)


def scalar_mass(space, points=None):
    """Scalar P2 mass matrix over ``points`` (the whole mesh by default)."""
    if points is None:
        points = standard_points(space.mesh, MASS_DEGREE)
    n = space.num_nodes

    def fn(sl):
        phi = p2_values(points.lam[sl])
        return np.einsum("q,qa,qb->qab", points.weights[sl], phi, phi)

    elems, local = _element_sums(points, fn)
    if local is None:
        return sp.csr_matrix((n, n))
    nodes = space.cell_nodes[elems]
    return _symmetric(_scatter(local, nodes, nodes, (n, n)))


def scalar_stiffness(space):
    points = standard_points(space.mesh, STIFF_DEGREE)
    n = space.num_nodes

    def fn(sl):
        _, dphi = _basis_at(space, points, sl)
        return np.einsum("q,qad,qbd->qab", points.weights[sl], dphi, dphi)

    elems, local = _element_sums(points, fn)
    nodes = space.cell_nodes[elems]
    return _symmetric(_scatter(local, nodes, nodes, (n, n)))


def apply_dirichlet(A, mask):
    """Zero the masked rows and columns and put 1 on their diagonal."""
    keep = sp.diags((~mask).astype(float))
    out = (keep @ A @ keep + sp.diags(mask.astype(float))).tocsr()
    out.sort_indices()
    return out


def assemble_mass(space, bc=False):
    M = _vector(scalar_mass(space))
    return apply_dirichlet(M, space.boundary_mask) if bc else M


def assemble_viscous(space, mu, bc=True):
    """Matrix of mu * int grad u : grad v (both components)."""
    if mu <= 0:
        raise ValueError("viscosity must be positive")
    A = _vector(mu * scalar_stiffness(space))
    return apply_dirichlet(A, space.boundary_mask) if bc else A


def assemble_divergence(vspace, pspace, bc=True):
    """Matrix of b(q, v) = -int q div v; rows are pressure dofs."""
    points = standard_points(vspace.mesh, DIV_DEGREE)

    def fn(sl):
        _, dphi = _basis_at(vspace, points, sl)
        lam = points.lam[sl]
        w = points.weights[sl]
        # (q, 3, 12): x-components use d/dx, y-components d/dy
        dx = np.einsum("q,qi,qa->qia", w, lam, dphi[:, :, 0])
        dy = np.einsum("q,qi,qa->qia", w, lam, dphi[:, :, 1])
        return -np.concatenate([dx, dy], axis=2)

    elems, local = _element_sums(points, fn)
    rows = pspace.cell_dofs()[elems]
    cols = vspace.cell_dofs()[elems]
    B = _scatter(local, rows, cols, (pspace.ndofs, vspace.ndofs))
    if bc:
        B = (B @ sp.diags((~vspace.boundary_mask).astype(float))).tocsr()
        B.sort_indices()
    return B


def assemble_convection(space, w, bc=False):
    """Matrix of int (w . grad u) . v for the frozen advecting field ``w``."""
    points = standard_points(space.mesh, CONV_DEGREE)
    n = space.num_nodes
    W = space.split(w)

    def fn(sl):
        phi, dphi = _basis_at(space, points, sl)
        nodes = space.cell_nodes[points.elem[sl]]
        wq = np.einsum("cqa,qa->qc", W[:, nodes], phi)
        adv = np.einsum("qd,qbd->qb", wq, dphi)
        return np.einsum("q,qa,qb->qab", points.weights[sl], phi, adv)

    elems, local = _element_sums(points, fn)
    nodes = space.cell_nodes[elems]
    C = _vector(_scatter(local, nodes, nodes, (n, n)))
    return apply_dirichlet(C, space.boundary_mask) if bc else C


def assemble_penalty_mass(space, geometry, bc=False):
    """Matrix of int_{D1} u . v using the D1-side cut rules."""
    M1 = _vector(scalar_mass(space, geometry.rule(Side.D1, MASS_DEGREE)))
    return apply_dirichlet(M1, space.boundary_mask) if bc else M1


def l2_norm_d1(space, geometry, u, M1=None):
    """|u|_{L2(D1)}; uses the assembled penalty mass when given."""
    if M1 is not None:
        return float(np.sqrt(max(u @ (M1 @ u), 0.0)))
    r = geometry.rule(Side.D1, MASS_DEGREE)
    vals, _ = space.evaluate(u, r)
    return float(np.sqrt(np.sum(r.weights * np.sum(vals**2, axis=1))))


def penalty_coefficient(norm_d1, epsilon, beta, delta_reg=DELTA_REG):
    """1 / (eps (norm^beta + delta_reg)) with 0^0 taken as 1."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 <= beta < 1:
        raise ValueError("beta must satisfy 0 <= beta < 1")
    if delta_reg <= 0:
        raise ValueError("delta_reg must be positive")
    return 1.0 / (epsilon * (float(norm_d1) ** beta + delta_reg))


def assemble_rhs(space, geometry, f, t, degree=RHS_DEGREE):
    """Load vector of int_Omega f(t) . v; the forcing is zero on D1.

    ``f`` is called as ``f(t, points) -> (q, 2)``; ``None`` means f = 0.
    """
    n = space.num_nodes
    if f is None:
        return np.zeros(2 * n)
    r = geometry.rule(Side.OMEGA, degree)
    fq = np.asarray(f(t, r.physical(space.mesh)), dtype=float)
    phi = p2_values(r.lam)
    nodes = space.cell_nodes[r.elem]
    wf = r.weights[:, None] * fq
    out = np.zeros(2 * n)
    for c in range(2):
        np.add.at(out, nodes.ravel() + c * n, (phi * wf[:, c:c + 1]).ravel())
    return out


def pressure_mean_vector(pspace):
    """Coefficients m with m . p = int_D p_h."""
    areas = pspace.mesh.areas()
    return np.repeat(areas / 3.0, 3)


@dataclass
class SparseSystem:
    """Bordered saddle-point system for one time step.

    Unknowns are ordered (velocity, pressure, multiplier):

        [ A   B^T  0 ] [u]   [f]
        [ B   0    m ] [p] = [0]
        [ 0   m^T  0 ] [l]   [0]
    """

    A: sp.csr_matrix
    B: sp.csr_matrix
    mean: np.ndarray
    rhs_u: np.ndarray

    @property
    def n_u(self):
        return self.A.shape[0]

    @property
    def n_p(self):
        return self.B.shape[0]

    def matrix(self):
        m = sp.csr_matrix(self.mean[:, None])
        K = sp.bmat([[self.A, self.B.T, None], [self.B, None, m], [None, m.T, None]], format="csc")
        return K

    def rhs(self):
        return np.concatenate([self.rhs_u, np.zeros(self.n_p + 1)])

    def split(self, x):
        return x[:self.n_u], x[self.n_u:self.n_u + self.n_p], x[-1]
