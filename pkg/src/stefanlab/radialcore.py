"""Radial finite-difference core shared by the fixed- and moving-domain solvers.

Uniform grids on [0, R], the N-dimensional radial Laplacian with the
symmetry regularization at r = 0, semi-implicit (implicit diffusion,
explicit reaction) time stepping with a tridiagonal solve, and the
period-map iteration that locates T-periodic attractors of the logistic
reaction-diffusion problem on a ball.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (DomainNotLargeEnough, NoConvergence, SolverSingular,
                     StepSizeTooLarge)

VANISH_SUP = 1e-8          # sup-norm threshold separating the zero branch
PIVOT_EPS = 1e-14


@dataclass(frozen=True)
class RadialGrid:
    n: int          # interior intervals; nodes j = 0..n
    R: float
    N: int          # spatial dimension >= 2

    @property
    def dr(self):
        return self.R / self.n

    @property
    def r(self):
        return np.linspace(0.0, self.R, self.n + 1)


def solve_tridiag(lower, diag, upper, rhs):
    """Solve a tridiagonal system by forward elimination / back substitution.

    ``lower[i]`` multiplies x[i-1] in row i (lower[0] unused), ``upper[i]``
    multiplies x[i+1] (upper[-1] unused).  LAPACK's gtsv does the
    elimination; a singular pivot is reported as SolverSingular.
    """
    m = diag.size
    ab = np.zeros((3, m))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    if np.min(np.abs(diag)) < PIVOT_EPS:
        raise SolverSingular("tridiagonal pivot below %g" % PIVOT_EPS)
    try:
        return scipy.linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise SolverSingular(str(exc)) from exc


def thomas_reference(lower, diag, upper, rhs):
    """Plain Thomas recurrence; independent reference for solve_tridiag."""
    m = diag.size
    c = np.array(upper, dtype=float)
    d = np.array(diag, dtype=float)
    b = np.array(rhs, dtype=float)
    for i in range(1, m):
        if abs(d[i - 1]) < PIVOT_EPS:
            raise SolverSingular("pivot %d below %g" % (i - 1, PIVOT_EPS))
        w = lower[i] / d[i - 1]
        d[i] -= w * c[i - 1]
        b[i] -= w * b[i - 1]
    x = np.empty(m)
    if abs(d[-1]) < PIVOT_EPS:
        raise SolverSingular("last pivot below %g" % PIVOT_EPS)
    x[-1] = b[-1] / d[-1]
    for i in range(m - 2, -1, -1):
        x[i] = (b[i] - c[i] * x[i + 1]) / d[i]
    return x


def radial_laplacian(grid, u):
    """Apply u_rr + (N-1)/r u_r on the grid nodes.

    At r = 0 the symmetry limit N*u_rr(0) is discretized with a reflected
    ghost node as 2N(u_1 - u_0)/dr^2.  The outer node uses a one-sided
    copy of the interior stencil value at n-1 (its value is irrelevant
    under Dirichlet conditions and excluded from Neumann solves).
    """
    dr = grid.dr
    out = np.zeros_like(u, dtype=float)
    out[0] = 2.0 * grid.N * (u[1] - u[0]) / dr ** 2
    j = np.arange(1, grid.n)
    out[1:-1] = ((u[2:] - 2 * u[1:-1] + u[:-2]) / dr ** 2
                 + (grid.N - 1) / (j * dr) * (u[2:] - u[:-2]) / (2 * dr))
    out[-1] = out[-2]
    return out


class DiffusionSolver:
    """Implicit-Euler diffusion step (I - dt*d*L) u+ = rhs on a RadialGrid.

    boundary "dirichlet": u(R) = 0, unknowns are nodes 0..n-1.
    boundary "neumann": reflected ghost at r = R, unknowns 0..n.
    The banded matrix is assembled once per (grid, d, dt).
    """

    def __init__(self, grid, d, dt, boundary="dirichlet"):
        self.grid = grid
        self.d = d
        self.dt = dt
        self.boundary = boundary
        n, dr, N = grid.n, grid.dr, grid.N
        s = dt * d / dr ** 2
        m = n if boundary == "dirichlet" else n + 1
        lower = np.zeros(m)
        diag = np.zeros(m)
        upper = np.zeros(m)
        diag[0] = 1.0 + 2.0 * N * s
        upper[0] = -2.0 * N * s
        j = np.arange(1, n)
        w = (N - 1) / (2.0 * j)
        diag[1:n] = 1.0 + 2.0 * s
        lower[1:n] = -s * (1.0 - w)
        upper[1:n] = -s * (1.0 + w)
        if boundary == "neumann":
            # reflection at r = R keeps only u_rr (u_r = 0 kills the 1/r term)
            diag[n] = 1.0 + 2.0 * s
            lower[n] = -2.0 * s
        self._bands = (lower, diag, upper)
        self._m = m

    def solve(self, rhs):
        lower, diag, upper = self._bands
        out = np.zeros(self.grid.n + 1)
        out[:self._m] = solve_tridiag(lower, diag, upper, rhs[:self._m])
        return out


def step_reaction_diffusion(grid, u, field, d, dt, t, boundary="dirichlet",
                            solver=None):
    """One semi-implicit step of the logistic reaction-diffusion problem.

    Reaction u*(alpha - gamma - beta*u) is explicit at time t; diffusion is
    implicit.  Dirichlet zero at r = R (or reflecting Neumann for the flat
    test harness), reflection at r = 0.
    """
    if dt * field.alpha2_max() >= 1.0:
        raise StepSizeTooLarge("dt*max(alpha2) = %.3g >= 1"
                               % (dt * field.alpha2_max()))
    r = grid.r
    growth = np.asarray(field.growth(t, r), dtype=float)
    crowd = np.asarray(field.beta(t, r), dtype=float)
    rhs = u + dt * u * (growth - crowd * u)
    if solver is None:
        solver = DiffusionSolver(grid, d, dt, boundary)
    out = solver.solve(rhs)
    if boundary == "dirichlet":
        out[-1] = 0.0
    return out


@dataclass(frozen=True)
class PeriodicOrbit:
    """T-periodic attractor sampled at evenly spaced phases of one period."""
    grid: RadialGrid
    phases: np.ndarray      # times in [0, T)
    values: np.ndarray      # shape (len(phases), n+1)
    residual: float         # sup distance between successive period maps
    periods: int

    def at_phase(self, k=0):
        return self.values[k]

    def interp(self, r, k=0):
        return np.interp(r, self.grid.r, self.values[k])


def _substeps_for(T, dt, phases):
    per_phase = max(1, int(np.ceil(T / (phases * dt))))
    return per_phase * phases, per_phase


def periodic_attractor(grid, field, d, T, tol=1e-6, max_periods=2000,
                       u_init=None, dt=2e-3, phases=32, boundary="dirichlet"):
    """Iterate the period map of the fixed-ball logistic problem.

    Returns the positive periodic orbit once the period map is
    tol-contracted, or None when the solution decays below the vanishing
    threshold (the zero branch).
    """
    if u_init is None:
        u_init = 0.5 * (1.0 - (grid.r / grid.R) ** 2)
    u = np.array(u_init, dtype=float)
    if np.max(u) <= 0:
        raise ValueError("u_init must be nonnegative and not identically zero")
    substeps, per_phase = _substeps_for(T, dt, phases)
    dt = T / substeps
    solver = DiffusionSolver(grid, d, dt, boundary)
    prev = u.copy()
    for period in range(1, max_periods + 1):
        snapshots = [u.copy()]
        for k in range(substeps):
            t = (k * dt)
            u = step_reaction_diffusion(grid, u, field, d, dt, t,
                                        boundary=boundary, solver=solver)
            if (k + 1) % per_phase == 0 and (k + 1) < substeps:
                snapshots.append(u.copy())
        sup = float(np.max(np.abs(u)))
        if sup < VANISH_SUP:
            return None
        residual = float(np.max(np.abs(u - prev)))
        # relative to sup: a decaying (zero-branch) solution keeps a fixed
        # relative change per period and never passes this test
        if residual < tol * sup:
            phase_times = np.arange(phases) * (T / phases)
            return PeriodicOrbit(grid, phase_times, np.array(snapshots),
                                 residual, period)
        prev = u.copy()
    raise NoConvergence(max_periods, residual)


def entire_space_periodic(field, d, T, R_list=(10.0, 20.0, 40.0, 80.0),
                          tol=1e-2, dt=2e-3, N=2, nodes_per_unit=12,
                          max_periods=2000):
    """Approximate the positive periodic solution on the whole space by
    escalating Dirichlet balls until the core region stops changing.

    The core region is [0, R_list[0]].  Raises DomainNotLargeEnough when
    the successive difference is still above tol at the final radius.
    """
    core = R_list[0]
    prev_orbit = None
    diff = np.inf
    for R in R_list:
        n = max(128, int(np.ceil(nodes_per_unit * R)))
        grid = RadialGrid(n=n, R=float(R), N=N)
        if prev_orbit is None:
            u_init = None
        else:
            u_init = prev_orbit.interp(grid.r)
            u_init[-1] = 0.0
        orbit = periodic_attractor(grid, field, d, T, tol=min(1e-6, tol * 1e-2),
                                   max_periods=max_periods, u_init=u_init, dt=dt)
        if orbit is None:
            return None
        if prev_orbit is not None:
            rc = np.linspace(0.0, core, 256)
            diff = max(float(np.max(np.abs(orbit.interp(rc, k) - prev_orbit.interp(rc, k))))
                       for k in range(len(orbit.phases)))
            if diff < tol:
                return orbit
        prev_orbit = orbit
    raise DomainNotLargeEnough(
        "core difference %.3e still above tol %.3e at R = %g" % (diff, tol, R_list[-1]))
