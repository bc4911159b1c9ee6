"""
Rotating manufactured flow on the disk r^2 <= 1/2.

    u = g(t, r^2) (y, -x),   g = 2 pi sin(pi t) cos(pi r^2)
    p = sin(pi r^2) - 2/pi

The forcing f = u_t + (u . grad) u - mu lap u + grad p is written out by hand
using, for G(rho) a function of rho = r^2,

    (u . grad) u = -G^2 (x, y)
    lap (G y)    =  y (8 G' + 4 rho G'')
"""
import numpy as np

PI = np.pi


def _xy(points):
    points = np.asarray(points, dtype=float)
    return points[..., 0], points[..., 1]


def exact_velocity(t, points):
    x, y = _xy(points)
    g = 2 * PI * np.sin(PI * t) * np.cos(PI * (x * x + y * y))
    return np.stack([g * y, -g * x], axis=-1)


def exact_velocity_gradient(t, points):
    """``grad[..., c, d]`` = d u_c / d x_d."""
    x, y = _xy(points)
    rho = x * x + y * y
    s = np.sin(PI * t)
    G = 2 * PI * s * np.cos(PI * rho)
    dG = -2 * PI**2 * s * np.sin(PI * rho)
    row1 = np.stack([2 * dG * x * y, 2 * dG * y * y + G], axis=-1)
    row2 = np.stack([-2 * dG * x * x - G, -2 * dG * x * y], axis=-1)
    return np.stack([row1, row2], axis=-2)


def exact_pressure(points):
    x, y = _xy(points)
    return np.sin(PI * (x * x + y * y)) - 2 / PI


def forcing(t, points, mu=1.0):
    x, y = _xy(points)
    rho = x * x + y * y
    s, c = np.sin(PI * t), np.cos(PI * t)
    cr, sr = np.cos(PI * rho), np.sin(PI * rho)
    G = 2 * PI * s * cr
    dG = -2 * PI**2 * s * sr
    ddG = -2 * PI**3 * s * cr
    Gt = 2 * PI**2 * c * cr
    lap = 8 * dG + 4 * rho * ddG
    dp = 2 * PI * cr
    fx = Gt * y - G * G * x - mu * lap * y + dp * x
    fy = -Gt * x - G * G * y + mu * lap * x + dp * y
    return np.stack([fx, fy], axis=-1)


def forcing_fd(t, points, mu=1.0, step=1e-5, lap_step=1e-3):
    """Navier-Stokes residual of the exact pair by central differences.

    Independent of :func:`forcing`; used to validate it. First derivatives
    use ``step``; the Laplacian uses a fourth-order five-point stencil with
    the coarser ``lap_step`` (second differences at 1e-5 drown in roundoff).
    """
    points = np.asarray(points, dtype=float)
    h = step
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])

    def u(tt, pp):
        return exact_velocity(tt, pp)

    def p(pp):
        return exact_pressure(pp)

    ut = (u(t + h, points) - u(t - h, points)) / (2 * h)
    ux = (u(t, points + ex) - u(t, points - ex)) / (2 * h)
    uy = (u(t, points + ey) - u(t, points - ey)) / (2 * h)
    u0 = u(t, points)
    k = lap_step

    def second(e):
        return (-u(t, points + 2 * e) + 16 * u(t, points + e) - 30 * u0
                + 16 * u(t, points - e) - u(t, points - 2 * e)) / (12 * k * k)

    uxx = second(np.array([k, 0.0]))
    uyy = second(np.array([0.0, k]))
    px = (p(points + ex) - p(points - ex)) / (2 * h)
    py = (p(points + ey) - p(points - ey)) / (2 * h)
    conv = u0[..., :1] * ux + u0[..., 1:] * uy
    grad_p = np.stack([px, py], axis=-1)
    return ut + conv - mu * (uxx + uyy) + grad_p


def velocity_l2_omega_sq(t, radius_sq=0.5):
    """Closed form of the squared L2 norm of u(t) over the disk.

    ||u||^2 = 8 pi^3 sin^2(pi t) int_0^R r^3 cos^2(pi r^2) dr
            = 4 pi^3 sin^2(pi t) int_0^{R^2} rho cos^2(pi rho) d rho
    """
    a = radius_sq
    # int_0^a rho cos^2(pi rho) = a^2/4 + a sin(2 pi a)/(4 pi) + (cos(2 pi a) - 1)/(8 pi^2)
    inner = a * a / 4 + a * np.sin(2 * PI * a) / (4 * PI) + (np.cos(2 * PI * a) - 1) / (8 * PI**2)
    return 4 * PI**3 * np.sin(PI * t) ** 2 * inner
