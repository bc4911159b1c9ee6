"""
Self-check suite run by ``brinkfd check``.

Every check returns ``(passed, detail)``; :func:`run_checks` times them and
collects the results.
"""
import time
from dataclasses import dataclass

import numpy as np

from . import analysis, assembly, manufactured, oracles
from .fespace import build_spaces, eval_velocity_basis
from .geometry import Geometry, Side
from .mesh import alfeld_split, build_uniform


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check_partition(perturb=False):
    mesh = alfeld_split(build_uniform(6))
    geo = Geometry(mesh)
    omega = geo.element_areas(Side.OMEGA)
    if perturb:
        # fault injection: corrupt one cut-cell weight
        r = geo.rule(Side.OMEGA)
        r.weights[np.flatnonzero(geo.classes[r.elem] == 2)[0]] *= 1.01
        omega = geo.element_areas(Side.OMEGA)
    d1 = geo.element_areas(Side.D1)
    area = mesh.areas()
    err = float(np.max(np.abs(omega + d1 - area) / area))
    return err <= 1e-12, f"max relative partition defect {err:.2e}"


def check_area():
    geo = Geometry(alfeld_split(build_uniform(20)), depth=5)
    e1 = abs(geo.area(Side.OMEGA) - np.pi / 2)
    e2 = abs(geo.area(Side.D1) - (4 - np.pi / 2))
    return max(e1, e2) <= 1e-4, f"area errors {e1:.2e} (Omega), {e2:.2e} (D1)"


def check_basis():
    rng = np.random.default_rng(7)
    verts = np.array([[0.1, -0.2], [0.9, 0.1], [0.3, 0.7]])
    vals, _ = eval_velocity_basis(verts, np.eye(3))
    nodal = np.allclose(vals[:, :3], np.eye(3), atol=1e-14) and np.allclose(vals[:, 3:], 0, atol=1e-14)
    lam = 0.1 + 0.7 * rng.dirichlet(np.ones(3), size=20)
    v, g = eval_velocity_basis(verts, lam)
    pou = float(np.max(np.abs(v.sum(axis=1) - 1)))
    T = np.column_stack([verts[1] - verts[0], verts[2] - verts[0]])
    h = 1e-6
    fd_err = 0.0
    for d in range(2):
        e = np.zeros(2)
        e[d] = h
        dl = np.linalg.solve(T, e)
        step = np.array([-dl.sum(), dl[0], dl[1]])
        vp, _ = eval_velocity_basis(verts, lam + step)
        vm, _ = eval_velocity_basis(verts, lam - step)
        fd_err = max(fd_err, float(np.max(np.abs((vp - vm) / (2 * h) - g[:, :, d]))))
    ok = nodal and pou <= 1e-12 and fd_err <= 1e-6
    return ok, f"nodal={nodal} partition-of-unity {pou:.1e} gradient-vs-FD {fd_err:.1e}"


def _poly_forcing(t, pts):
    x, y = pts[..., 0], pts[..., 1]
    return np.stack([1 + t * x * y, x * x - y], axis=-1)


def check_assembly():
    mesh = alfeld_split(build_uniform(2))
    V, Q = build_spaces(mesh)
    geo = Geometry(mesh, depth=3)
    rng = np.random.default_rng(3)
    w = rng.standard_normal(V.ndofs)

    def rel(a, b):
        a = a.toarray() if hasattr(a, "toarray") else a
        return float(np.linalg.norm(a - b) / np.linalg.norm(b))

    errs = {
        "viscous": rel(assembly.assemble_viscous(V, 1.0, bc=False),
                       oracles.vector_block(oracles.dense_scalar_matrix(V, "stiffness"))),
        "divergence": rel(assembly.assemble_divergence(V, Q, bc=False), oracles.dense_divergence(V, Q)),
        "convection": rel(assembly.assemble_convection(V, w),
                          oracles.vector_block(oracles.dense_scalar_matrix(V, "convection", w=w))),
        "penalty": rel(assembly.assemble_penalty_mass(V, geo),
                       oracles.vector_block(oracles.dense_scalar_matrix(V, "mass", geometry=geo, side=Side.D1))),
        "rhs": rel(assembly.assemble_rhs(V, geo, _poly_forcing, 0.3),
                   oracles.dense_rhs(V, geo, _poly_forcing, 0.3)),
    }
    worst = max(errs.values())
    return worst <= 1e-10, ", ".join(f"{k} {v:.1e}" for k, v in errs.items())


def check_manufactured():
    rng = np.random.default_rng(11)
    pts = rng.uniform(-1, 1, (1000, 2))
    ts = rng.uniform(0, 1, 1000)
    h = 1e-6
    div = 0.0
    for t in np.unique(np.round(ts, 2)):
        ux = (manufactured.exact_velocity(t, pts + [h, 0]) - manufactured.exact_velocity(t, pts - [h, 0])) / (2 * h)
        uy = (manufactured.exact_velocity(t, pts + [0, h]) - manufactured.exact_velocity(t, pts - [0, h])) / (2 * h)
        div = max(div, float(np.max(np.abs(ux[:, 0] + uy[:, 1]))))
    theta = rng.uniform(0, 2 * np.pi, 100)
    circle = np.sqrt(0.5) * np.column_stack([np.cos(theta), np.sin(theta)])
    trace = max(float(np.max(np.abs(manufactured.exact_velocity(t, circle)))) for t in rng.uniform(0, 1, 10))
    sp, st = rng.uniform(-1, 1, (100, 2)), rng.uniform(0, 1, 100)
    fd = max(float(np.max(np.abs(manufactured.forcing(t, p) - manufactured.forcing_fd(t, p))))
             for t, p in zip(st, sp))
    ok = div <= 1e-6 and trace <= 1e-12 and fd <= 1e-5
    return ok, f"div {div:.1e} trace {trace:.1e} forcing-vs-FD {fd:.1e}"


def check_damping():
    rng = np.random.default_rng(5)
    a = rng.exponential(1.0, 100_000)
    b = rng.exponential(1.0, 100_000)
    beta = rng.uniform(0, 1, 100_000)
    worst = float(np.min(analysis.damping_monotone(a, b, beta)))
    return worst >= -1e-15, f"min value {worst:.2e}"


def check_rate_exponent():
    vals = [analysis.rate_exponent(0, 0), analysis.rate_exponent(0, 0.5)]
    ok = abs(vals[0] - 1) <= 1e-12 and abs(vals[1] - 2) <= 1e-12
    betas = np.round(np.arange(1, 10) / 10, 1)
    limit = max(abs(analysis.rate_exponent(0, b) - 1 / (1 - b)) for b in betas)
    ok = ok and limit <= 1e-12
    return ok, f"A(0,0)={vals[0]:.6g} A(0,0.5)={vals[1]:.6g} max|A(0,b)-1/(1-b)|={limit:.1e}"


CHECKS = [
    ("geometry partition", check_partition),
    ("geometry area", check_area),
    ("P2 basis", check_basis),
    ("assembly oracles", check_assembly),
    ("manufactured solution", check_manufactured),
    ("damping monotonicity", check_damping),
    ("rate exponent", check_rate_exponent),
]


def run_checks(inject_fault=False):
    results = []
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            if fn is check_partition:
                ok, detail = fn(perturb=inject_fault)
            else:
                ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - start))
    return results
