"""
Quadrature on triangles.

Rules are collapsed (conical product) Gauss rules: Gauss-Jacobi in the
collapsed direction and Gauss-Legendre in the other. An ``m``-point rule per
direction integrates polynomials of total degree ``2m - 1`` exactly.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=None)
def _collapsed_rule(m):
    xj, wj = roots_jacobi(m, 1.0, 0.0)
    xl, wl = roots_legendre(m)
    u = 0.5 * (1.0 + xj)
    v = 0.5 * (1.0 + xl)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wj / 4.0, wl / 2.0)
    l1 = U.ravel()
    l2 = ((1.0 - U) * V).ravel()
    lam = np.column_stack([1.0 - l1 - l2, l1, l2])
    # weights sum to 1/2, the area of the reference triangle
    return lam, W.ravel()


def triangle_rule(degree):
    """Barycentric points and reference weights exact to ``degree``.

    Parameters
    ----------
    degree : int
        Polynomial degree integrated exactly.

    Returns
    -------
    lam : ndarray, shape (q, 3)
        Barycentric coordinates of the points.
    weights : ndarray, shape (q,)
        Weights normalized to sum to 1, so that the physical weight on a
        triangle is ``weights * area``.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    m = max(1, (degree + 2) // 2)
    lam, w = _collapsed_rule(m)
    return lam.copy(), 2.0 * w


@dataclass(frozen=True)
class PointSet:
    """Quadrature points scattered over the elements of a mesh.

    Points are grouped by element (``elem`` is non-decreasing), ``lam`` holds
    barycentric coordinates in the owning element and ``weights`` physical
    weights (area units).
    """

    elem: np.ndarray
    lam: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.elem)

    def segments(self):
        """Distinct elements and the start offset of each one's points."""
        if len(self.elem) == 0:
            return self.elem[:0], self.elem[:0]
        starts = np.flatnonzero(np.r_[True, self.elem[1:] != self.elem[:-1]])
        return self.elem[starts], starts

    def physical(self, mesh):
        """Physical coordinates of the points, shape (q, 2)."""
        verts = mesh.points[mesh.triangles[self.elem]]
        return np.einsum("qk,qkd->qd", self.lam, verts)

    def total(self):
        return float(np.sum(self.weights))


def standard_points(mesh, degree, elements=None):
    """The ``degree``-exact rule on every (or the listed) element."""
    lam, w = triangle_rule(degree)
    if elements is None:
        elements = np.arange(mesh.num_triangles)
    elements = np.asarray(elements, dtype=np.int64)
    areas = mesh.areas()[elements]
    q = len(w)
    return PointSet(
        np.repeat(elements, q),
        np.tile(lam, (len(elements), 1)),
        (areas[:, None] * w[None, :]).ravel(),
    )


def merge(*sets):
    """Concatenate point sets and regroup by element (stable)."""
    elem = np.concatenate([s.elem for s in sets])
    order = np.argsort(elem, kind="stable")
    return PointSet(
        elem[order],
        np.concatenate([s.lam for s in sets])[order],
        np.concatenate([s.weights for s in sets])[order],
    )
