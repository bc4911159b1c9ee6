"""
BDF2 semi-implicit time stepping of the penalized Navier-Stokes system.

Each step solves the linear problem

    (3 u^n - 4 u^{n-1} + u^{n-2}) / (2 dt) + a(u^n) + c(w; u^n) + b(p^n)
        + kappa(w) s(u^n) = f(t_n),   b(q, u^n) = 0,

with w = 2 u^{n-1} - u^{n-2}. The first step is backward Euler with w = u^0.
"""
import logging
import math
import time
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache

import numpy as np

from . import analysis, assembly, manufactured
from .fespace import apply_boundary, build_spaces, interpolate
from .geometry import DEFAULT_DEPTH, Geometry
from .linsolve import DEFAULT_TOL, SolverFailure, condition_estimate, solve_sparse
from .mesh import alfeld_split, build_uniform
from .quadrature import standard_points

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    n: int = 20
    dt: float = 0.05
    T: float = 1.0
    epsilon: float = 1e-3
    beta: float = 0.0
    mu: float = 1.0
    delta_reg: float = assembly.DELTA_REG
    cut_depth: int = DEFAULT_DEPTH
    solver_tol: float = DEFAULT_TOL
    zero_forcing: bool = False
    estimate_condition: bool = False

    def __post_init__(self):
        self.validate()

    @property
    def steps(self):
        return int(round(self.T / self.dt))

    def validate(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if abs(self.T / self.dt - round(self.T / self.dt)) > 1e-12 * max(1.0, self.T / self.dt):
            raise ValueError("T / dt must be an integer")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must satisfy 0 <= beta < 1")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.delta_reg > 0:
            raise ValueError("delta_reg must be positive")
        if not 0 <= self.cut_depth <= 12:
            raise ValueError("cut_depth must lie in [0, 12]")
        if not 0 < self.solver_tol <= 1e-6:
            raise ValueError("solver_tol must lie in (0, 1e-6]")


REFERENCE_PRESET = {"n": 160, "dt": 0.025}


class Discretization:
    """Mesh, spaces, geometry and the time-invariant matrices for one mesh."""

    def __init__(self, n, depth=DEFAULT_DEPTH):
        self.mesh = alfeld_split(build_uniform(n))
        self.V, self.Q = build_spaces(self.mesh)
        self.geometry = Geometry(self.mesh, depth=depth)
        self.M = assembly.assemble_mass(self.V)
        self.K = assembly.assemble_viscous(self.V, 1.0, bc=False)
        self.B = assembly.assemble_divergence(self.V, self.Q)
        self.M1 = assembly.assemble_penalty_mass(self.V, self.geometry)
        self.mean = assembly.pressure_mean_vector(self.Q)
        self.mask = self.V.boundary_mask
        self.full_points = standard_points(self.mesh, 4)

    @property
    def h(self):
        return self.mesh.h


@lru_cache(maxsize=4)
def discretization(n, depth=DEFAULT_DEPTH):
    return Discretization(n, depth)


@dataclass
class FieldState:
    u: np.ndarray
    u_prev: np.ndarray = None
    u_prev2: np.ndarray = None
    p: np.ndarray = None
    t: float = 0.0
    step: int = 0
    kappa: float = None
    report: object = None


@dataclass
class SweepRecord:
    beta: float
    epsilon: float
    h: float
    dt: float
    mu: float
    err_l2_final: float
    err_l2h1: float
    max_div: float
    max_energy: float
    cond_estimate: float
    wall_seconds: float
    status: str

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]


@dataclass
class Trajectory:
    t: list = field(default_factory=list)
    err_h1: list = field(default_factory=list)
    div: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    norm_l2: list = field(default_factory=list)
    kappa: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    cond: list = field(default_factory=list)
    steps: int = 0
    bdf1_steps: int = 0


def _forcing(config):
    if config.zero_forcing:
        return None
    mu = config.mu

    def f(t, pts):
        return manufactured.forcing(t, pts, mu)

    return f


def initialize(config, disc=None):
    """State at t = 0 holding the interpolated exact velocity."""
    disc = disc or discretization(config.n, config.cut_depth)
    u0 = apply_boundary(disc.V, interpolate(disc.V, manufactured.exact_velocity, 0.0))
    return FieldState(u=u0, t=0.0, step=0)


def _system(config, disc, mass_coef, w, history_rhs, t):
    norm = assembly.l2_norm_d1(disc.V, disc.geometry, w, disc.M1)
    kappa = assembly.penalty_coefficient(norm, config.epsilon, config.beta, config.delta_reg)
    C = assembly.assemble_convection(disc.V, w)
    A = (mass_coef / config.dt) * disc.M + config.mu * disc.K + C + kappa * disc.M1
    A = assembly.apply_dirichlet(A, disc.mask)
    rhs = assembly.assemble_rhs(disc.V, disc.geometry, _forcing(config), t)
    rhs = rhs + disc.M @ history_rhs / config.dt
    rhs[disc.mask] = 0.0
    return assembly.SparseSystem(A, disc.B, disc.mean, rhs), kappa


def _advance(state, config, disc, system, kappa):
    K = system.matrix()
    step = state.step + 1
    estimate = config.estimate_condition and step in (1, 2, config.steps)
    try:
        x, report = solve_sparse(K, system.rhs(), config.solver_tol, keep_factor=estimate)
    except SolverFailure as exc:
        if config.estimate_condition and exc.report is not None:
            exc.report.condition = condition_estimate(K)
        raise
    if estimate:
        report.condition = condition_estimate(K, report.factor)
        report.factor = None
    u, p, _ = system.split(x)
    return FieldState(
        u=u, u_prev=state.u, u_prev2=state.u_prev if state.step > 0 else state.u,
        p=p, t=(state.step + 1) * config.dt, step=state.step + 1, kappa=kappa, report=report,
    )


def step_bdf1(state, config, disc=None):
    """Backward-Euler startup step from t = 0; seeds u^{-1} := u^0."""
    if state.step != 0:
        raise ValueError("the startup step must be taken from step 0")
    disc = disc or discretization(config.n, config.cut_depth)
    t1 = config.dt
    system, kappa = _system(config, disc, 1.0, state.u, state.u, t1)
    return _advance(state, config, disc, system, kappa)


def step_bdf2(state, config, disc=None):
    """One BDF2 step using the two stored history levels."""
    if state.step < 1 or state.u_prev is None:
        raise ValueError("BDF2 needs two history levels")
    disc = disc or discretization(config.n, config.cut_depth)
    w = 2.0 * state.u - state.u_prev
    hist = 2.0 * state.u - 0.5 * state.u_prev
    t = (state.step + 1) * config.dt
    system, kappa = _system(config, disc, 1.5, w, hist, t)
    return _advance(state, config, disc, system, kappa)


def _observe(traj, state, config, disc):
    V, g = disc.V, disc.geometry
    traj.t.append(state.t)
    traj.err_h1.append(analysis.error_h1_omega(V, g, state.u, state.t))
    traj.div.append(analysis.div_norm(V, state.u, disc.full_points))
    traj.energy.append(analysis.energy_functional(
        V, g, state.u, config.epsilon, config.beta, config.mu, disc.full_points))
    traj.norm_l2.append(analysis.l2_norm(V, state.u, disc.full_points))
    traj.kappa.append(state.kappa)
    traj.residual.append(state.report.residual)
    if state.report.condition is not None:
        traj.cond.append(state.report.condition)


def run(config, disc=None, callback=None):
    """Integrate to ``T`` and collect error and diagnostic statistics.

    Returns ``(trajectory, record)``. A solver failure ends the run early
    and yields a record with status ``solver_failed``.
    """
    start = time.perf_counter()
    disc = disc or discretization(config.n, config.cut_depth)
    traj = Trajectory()
    state = initialize(config, disc)
    status = "ok"
    try:
        for k in range(config.steps):
            if k == 0:
                state = step_bdf1(state, config, disc)
                traj.bdf1_steps += 1
            else:
                state = step_bdf2(state, config, disc)
            traj.steps += 1
            _observe(traj, state, config, disc)
            if callback is not None:
                callback(state, traj)
            log.debug("step %d t=%.4f kappa=%.3e res=%.2e", state.step, state.t, state.kappa,
                      state.report.residual)
    except SolverFailure as exc:
        log.warning("solver failure at step %d: %s", state.step + 1, exc)
        status = "solver_failed"
        if exc.report is not None and exc.report.condition is not None:
            traj.cond.append(exc.report.condition)

    cond = max(traj.cond) if traj.cond else float("nan")
    if status == "ok":
        err_final = analysis.error_l2_omega(disc.V, disc.geometry, state.u, state.t)
        err_l2h1 = math.sqrt(sum(config.dt * e * e for e in traj.err_h1))
        record = SweepRecord(
            config.beta, config.epsilon, float(disc.h), config.dt, config.mu, err_final, err_l2h1,
            max(traj.div), max(traj.energy), cond, time.perf_counter() - start, status,
        )
    else:
        nan = float("nan")
        record = SweepRecord(
            config.beta, config.epsilon, float(disc.h), config.dt, config.mu, nan, nan, nan, nan,
            cond, time.perf_counter() - start, status,
        )
    traj.final_state = state
    return traj, record


def with_overrides(config, **kw):
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
