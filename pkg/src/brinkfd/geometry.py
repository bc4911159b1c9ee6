"""
Level-set geometry of the physical domain and cut-cell quadrature.

The physical domain is the disk {phi <= 0} with phi = x^2 + y^2 - 1/2 inside
the box D = [-1, 1]^2; the fictitious part is D1 = {phi > 0}. Points with
phi == 0 are assigned to the disk.

Quadrature on elements crossed by the circle uses recursive quadrisection:
sub-triangles lying entirely on one side are kept whole, and sub-triangles
that are still cut at the deepest level are clipped by the linear
interpolant of phi on their vertices.
"""
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

import numpy as np

from .quadrature import PointSet, merge, standard_points, triangle_rule

MAX_DEPTH = 12
DEFAULT_DEPTH = 5
DEFAULT_BASE_ORDER = 4
DEFAULT_SAMPLES = 16


class ElementClass(IntEnum):
    INSIDE = 0
    OUTSIDE = 1
    CUT = 2


class Side(IntEnum):
    OMEGA = 0
    D1 = 1


@dataclass(frozen=True)
class LevelSet:
    """phi(x, y) = x^2 + y^2 - radius^2 on the box [-1, 1]^2."""

    radius_sq: float = 0.5

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        return points[..., 0] ** 2 + points[..., 1] ** 2 - self.radius_sq

    def gradient(self, points):
        return 2.0 * np.asarray(points, dtype=float)


CIRCLE = LevelSet()


def phi(point):
    return CIRCLE(point)


def xi(point, levelset=CIRCLE):
    """Indicator of the fictitious region: 0 on the closed disk, 1 outside."""
    val = levelset(point)
    return (val > 0).astype(int) if np.ndim(val) else int(val > 0)


@dataclass(frozen=True)
class CutQuadrature:
    points: np.ndarray
    weights: np.ndarray
    depth: int

    def total(self):
        return float(np.sum(self.weights))


def _lattice(samples):
    s = max(int(samples), 1)
    lam = [(i / s, j / s, (s - i - j) / s) for i in range(s + 1) for j in range(s + 1 - i)]
    return np.array(lam)


def classify_many(vertices, levelset=CIRCLE, samples=DEFAULT_SAMPLES):
    """Classify an array of triangles, ``vertices`` of shape (k, 3, 2)."""
    vertices = np.asarray(vertices, dtype=float)
    lam = _lattice(max(int(samples), 2))
    pts = np.einsum("sk,tkd->tsd", lam, vertices)
    vals = levelset(pts)
    out = np.full(len(vertices), ElementClass.CUT, dtype=np.int64)
    out[np.all(vals < 0, axis=1)] = ElementClass.INSIDE
    out[np.all(vals > 0, axis=1)] = ElementClass.OUTSIDE
    return out


def classify(triangle, levelset=CIRCLE, samples=DEFAULT_SAMPLES):
    """Tag a single triangle as INSIDE, OUTSIDE or CUT."""
    return ElementClass(classify_many(np.asarray(triangle, dtype=float)[None], levelset, samples)[0])


def _clip(p, f):
    """Split a triangle by the zero line of the linear interpolant of ``f``.

    Returns the two convex polygons (f <= 0 part, f > 0 part).
    """
    neg, pos = [], []
    for i in range(3):
        j = (i + 1) % 3
        fi, fj = f[i], f[j]
        (neg if fi <= 0 else pos).append(p[i])
        if (fi <= 0) != (fj <= 0):
            t = fi / (fi - fj)
            x = p[i] + t * (p[j] - p[i])
            neg.append(x)
            pos.append(x)
    return neg, pos


def _fan(poly):
    return [(poly[0], poly[i], poly[i + 1]) for i in range(1, len(poly) - 1)]


def _subdivide(tris, owners, levelset, depth):
    """Sub-triangulate ``tris`` (k, 3, 2) and sort the pieces by side.

    Returns ``(pieces, owner)`` pairs for the disk side and the D1 side.
    """
    out = {Side.OMEGA: ([], []), Side.D1: ([], [])}
    mids = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
    for level in range(depth + 1):
        if len(tris) == 0:
            break
        fv = levelset(tris)
        last = level == depth
        if last:
            samples = fv
        else:
            fm = levelset(np.einsum("mk,tkd->tmd", mids, tris))
            samples = np.hstack([fv, fm])
        neg = np.all(samples <= 0, axis=1)
        pos = np.all(samples > 0, axis=1)
        out[Side.OMEGA][0].append(tris[neg])
        out[Side.OMEGA][1].append(owners[neg])
        out[Side.D1][0].append(tris[pos])
        out[Side.D1][1].append(owners[pos])
        cut = ~(neg | pos)
        tris, owners = tris[cut], owners[cut]
        if last:
            break
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
        tris = np.concatenate([
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ])
        owners = np.tile(owners, 4)
    # leaves still cut at the deepest level
    clipped = {Side.OMEGA: ([], []), Side.D1: ([], [])}
    fv = levelset(tris) if len(tris) else np.zeros((0, 3))
    for p, f, o in zip(tris, fv, owners):
        neg, pos = _clip(p, f)
        for side, poly in ((Side.OMEGA, neg), (Side.D1, pos)):
            for tri in _fan(poly):
                clipped[side][0].append(tri)
                clipped[side][1].append(o)
    result = {}
    for side in Side:
        pieces = [t for t in out[side][0]]
        own = [o for o in out[side][1]]
        if clipped[side][0]:
            pieces.append(np.array(clipped[side][0], dtype=float))
            own.append(np.array(clipped[side][1], dtype=np.int64))
        if pieces:
            result[side] = (np.concatenate(pieces).reshape(-1, 3, 2), np.concatenate(own))
        else:
            result[side] = (np.zeros((0, 3, 2)), np.zeros(0, dtype=np.int64))
    return result


def _signed_area(tris):
    d1 = tris[:, 1] - tris[:, 0]
    d2 = tris[:, 2] - tris[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def _apply_rule(pieces, base_order):
    lam, w = triangle_rule(base_order)
    pts = np.einsum("qk,tkd->tqd", lam, pieces)
    # clipping preserves orientation; abs guards against round-off on slivers
    wts = np.abs(_signed_area(pieces))[:, None] * w[None, :]
    return pts, wts


def cut_rule(triangle, levelset=CIRCLE, side=Side.OMEGA, depth=DEFAULT_DEPTH,
             base_order=DEFAULT_BASE_ORDER):
    """Quadrature for ``triangle`` restricted to one side of the level set."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth > MAX_DEPTH:
        raise ValueError(f"depth {depth} exceeds the cost guard {MAX_DEPTH}")
    if base_order < 4:
        raise ValueError("base_order must be >= 4")
    tri = np.asarray(triangle, dtype=float)[None]
    pieces, _ = _subdivide(tri, np.zeros(1, dtype=np.int64), levelset, depth)[Side(side)]
    pts, wts = _apply_rule(pieces, base_order)
    return CutQuadrature(pts.reshape(-1, 2), wts.ravel(), depth)


def barycentric(mesh, elem, points):
    """Barycentric coordinates of ``points`` in triangles ``elem``."""
    v = mesh.points[mesh.triangles[elem]]
    d1 = v[:, 1] - v[:, 0]
    d2 = v[:, 2] - v[:, 0]
    r = points - v[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    l1 = (r[:, 0] * d2[:, 1] - r[:, 1] * d2[:, 0]) / det
    l2 = (d1[:, 0] * r[:, 1] - d1[:, 1] * r[:, 0]) / det
    return np.column_stack([1.0 - l1 - l2, l1, l2])


class Geometry:
    """Element classification and side-restricted quadrature on a mesh.

    Parameters
    ----------
    mesh : Mesh
    levelset : LevelSet
    depth : int
        Subdivision depth of the cut rules.
    samples : int
        Lattice density of the classification test.
    """

    def __init__(self, mesh, levelset=CIRCLE, depth=DEFAULT_DEPTH, samples=DEFAULT_SAMPLES):
        if not 0 <= depth <= MAX_DEPTH:
            raise ValueError(f"depth must lie in [0, {MAX_DEPTH}]")
        self.mesh = mesh
        self.levelset = levelset
        self.depth = depth
        self.samples = samples
        self._rules = {}

    @cached_property
    def classes(self):
        return classify_many(self.mesh.points[self.mesh.triangles], self.levelset, self.samples)

    @cached_property
    def _cut_pieces(self):
        cut = np.flatnonzero(self.classes == ElementClass.CUT)
        tris = self.mesh.points[self.mesh.triangles[cut]]
        return _subdivide(tris, cut, self.levelset, self.depth)

    def rule(self, side, base_order=DEFAULT_BASE_ORDER):
        """Point set integrating over the ``side`` part of the whole mesh."""
        side = Side(side)
        key = (side, base_order)
        if key not in self._rules:
            full = ElementClass.INSIDE if side == Side.OMEGA else ElementClass.OUTSIDE
            whole = standard_points(self.mesh, base_order, np.flatnonzero(self.classes == full))
            pieces, owner = self._cut_pieces[side]
            pts, wts = _apply_rule(pieces, base_order)
            q = pts.shape[1]
            elem = np.repeat(owner, q)
            lam = barycentric(self.mesh, elem, pts.reshape(-1, 2))
            cut = PointSet(elem, lam, wts.ravel())
            self._rules[key] = merge(whole, cut)
        return self._rules[key]

    def area(self, side):
        return self.rule(side).total()

    def element_areas(self, side):
        """Per-element area of the ``side`` part, shape (num_triangles,)."""
        r = self.rule(side)
        return np.bincount(r.elem, weights=r.weights, minlength=self.mesh.num_triangles)
