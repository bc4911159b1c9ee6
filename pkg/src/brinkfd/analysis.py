"""
Error norms on the physical domain, divergence and energy diagnostics, the
theoretical penalty rate exponent and empirical rate fitting.
"""
from dataclasses import dataclass

import numpy as np

from . import manufactured
from .geometry import Side
from .quadrature import standard_points

ERROR_DEGREE = 6
DEFAULT_FLOOR_FACTOR = 3.0


@dataclass
class ErrorReport:
    err_l2_final: float
    err_l2h1: float
    max_div: float
    max_energy: float


@dataclass
class RateFit:
    points: list
    slope: float
    window: tuple
    conclusive: bool

    def describe(self):
        if not self.conclusive:
            return "inconclusive"
        lo, hi = self.window
        return f"slope {self.slope:.4f} over eps in [{lo:.3g}, {hi:.3g}]"


def _error_fields(space, u, t, points, exact=True):
    vals, grads = space.evaluate(u, points)
    if exact:
        xy = points.physical(space.mesh)
        vals = vals - manufactured.exact_velocity(t, xy)
        grads = grads - manufactured.exact_velocity_gradient(t, xy)
    return vals, grads


def error_l2_omega(space, geometry, u, t):
    """L2(Omega) norm of u_h - u(t)."""
    r = geometry.rule(Side.OMEGA, ERROR_DEGREE)
    e, _ = _error_fields(space, u, t, r)
    return float(np.sqrt(np.sum(r.weights * np.sum(e * e, axis=1))))


def error_h1_omega(space, geometry, u, t):
    """Full H1(Omega) norm of u_h - u(t)."""
    r = geometry.rule(Side.OMEGA, ERROR_DEGREE)
    e, de = _error_fields(space, u, t, r)
    integrand = np.sum(e * e, axis=1) + np.sum(de * de, axis=(1, 2))
    return float(np.sqrt(np.sum(r.weights * integrand)))


def l2_norm(space, u, points=None):
    if points is None:
        points = standard_points(space.mesh, ERROR_DEGREE)
    vals, _ = space.evaluate(u, points)
    return float(np.sqrt(np.sum(points.weights * np.sum(vals * vals, axis=1))))


def div_norm(space, u, points=None):
    """L2(D) norm of div u_h."""
    if points is None:
        points = standard_points(space.mesh, 4)
    _, grads = space.evaluate(u, points)
    div = grads[:, 0, 0] + grads[:, 1, 1]
    return float(np.sqrt(np.sum(points.weights * div * div)))


def energy_functional(space, geometry, u, epsilon, beta, mu, points=None):
    """mu |grad u|^2_{L2(D)} + |u|^{2 - beta}_{L2(D1)} / eps."""
    if points is None:
        points = standard_points(space.mesh, 4)
    _, grads = space.evaluate(u, points)
    grad_sq = float(np.sum(points.weights * np.sum(grads * grads, axis=(1, 2))))
    r = geometry.rule(Side.D1, 4)
    vals, _ = space.evaluate(u, r)
    norm_d1 = float(np.sqrt(np.sum(r.weights * np.sum(vals * vals, axis=1))))
    return mu * grad_sq + norm_d1 ** (2.0 - beta) / epsilon


def rate_exponent(k, beta):
    """Exponent A(k, beta) of eps bounding the squared error.

    The corresponding rate of the error norm itself is A / 2.
    """
    if not 0 <= beta < 1:
        raise ValueError("beta must satisfy 0 <= beta < 1")
    if not 0 <= k < 8.0 / 3.0:
        raise ValueError("k must satisfy 0 <= k < 8/3")
    return (16.0 - 6.0 * k) / (16.0 + 12.0 * k - 16.0 * beta - 3.0 * beta * k)


def damping_monotone(a, b, beta):
    """(a - b)(a^(1 - beta) - b^(1 - beta)), nonnegative for a, b >= 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    e = 1.0 - np.asarray(beta, dtype=float)
    return (a - b) * (a**e - b**e)


def fit_rate(points, floor_factor=DEFAULT_FLOOR_FACTOR):
    """Least-squares slope of log(error) against log(eps).

    Only points whose error exceeds ``floor_factor`` times the smallest
    error, on the large-eps side of that minimum, take part; with fewer than
    two such points the fit is flagged inconclusive.
    """
    pts = sorted((float(e), float(err)) for e, err in points)
    if len(pts) < 3:
        raise ValueError("need at least three points")
    if len({e for e, _ in pts}) != len(pts):
        raise ValueError("eps values must be distinct")
    errs = np.array([err for _, err in pts])
    eps = np.array([e for e, _ in pts])
    floor = floor_factor * np.min(errs)
    keep = (errs > floor * (1 + 1e-12)) & (eps > eps[np.argmin(errs)])
    if np.count_nonzero(keep) < 2:
        return RateFit(pts, float("nan"), (float("nan"), float("nan")), False)
    x = np.log(eps[keep])
    y = np.log(errs[keep])
    slope = np.polyfit(x, y, 1)[0]
    return RateFit(pts, float(slope), (float(eps[keep].min()), float(eps[keep].max())), True)
