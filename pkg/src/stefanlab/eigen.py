"""Principal eigenvalue of the time-periodic linearized problem on a ball.

The eigenvalue is obtained from the Floquet multiplier of the one-period
solution operator of psi_t - d*Lap(psi) = (alpha-gamma)*psi with Dirichlet
conditions: positive power iteration with sup-norm (Collatz-Wielandt)
multiplier estimates, and lambda1 = -ln(rho)/T.  The per-step potential
factor is applied exactly as exp(dt*k), which makes the shift identity
lambda1(k + c) = lambda1(k) - c hold to rounding, and the step-size bias
of the implicit diffusion sweep is removed by one Richardson
extrapolation in dt.

Also provides the habitat-radius threshold where lambda1 crosses zero and
the slow/fast diffusion thresholds.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketInvalid, NoConvergence, NonPositiveIterate, NoSignChange
from .radialcore import DiffusionSolver, RadialGrid

H_STAR_INFINITE = math.inf


@dataclass(frozen=True)
class EigenResult:
    lambda1: float
    rho: float              # multiplier consistent with lambda1 = -ln(rho)/T
    phi: np.ndarray         # (phases, n+1) positive eigenfunction, global max 1
    phases: np.ndarray
    grid: RadialGrid
    iterations: int
    residual: float


def period_map(psi, grid, field, d, T, substeps, solver=None, record=None):
    """Evolve the linear problem over one period and return psi(T).

    Each substep multiplies by exp(dt*(alpha-gamma)) at the interval
    midpoint and then applies the implicit diffusion sweep.  If ``record``
    is an integer P, snapshots at P evenly spaced phases are appended to
    the returned list.
    """
    dt = T / substeps
    if solver is None:
        solver = DiffusionSolver(grid, d, dt, boundary="dirichlet")
    r = grid.r
    u = np.array(psi, dtype=float)
    shots = [u.copy()] if record else None
    per_phase = substeps // record if record else 0
    for k in range(substeps):
        t_mid = (k + 0.5) * dt
        pot = np.asarray(field.growth(t_mid, r), dtype=float)
        u = solver.solve(u * np.exp(dt * pot))
        u[-1] = 0.0
        if record and (k + 1) % per_phase == 0 and (k + 1) < substeps:
            shots.append(u.copy())
    if record:
        return u, shots
    return u


def _power_iteration(grid, field, d, T, substeps, tol, max_iters, psi0):
    dt = T / substeps
    solver = DiffusionSolver(grid, d, dt, boundary="dirichlet")
    psi = psi0 / np.max(psi0)
    rho_prev = None
    drift = np.inf
    for it in range(1, max_iters + 1):
        mapped = period_map(psi, grid, field, d, T, substeps, solver=solver)
        rho = float(np.max(mapped))
        if rho <= 0 or np.any(mapped[:-1] < -1e-13 * max(rho, 1.0)):
            raise NonPositiveIterate(
                "period map lost positivity at iteration %d" % it)
        new = np.clip(mapped, 0.0, None) / rho
        drift = float(np.max(np.abs(new - psi)))
        psi = new
        if rho_prev is not None and abs(rho - rho_prev) <= tol * rho and drift <= tol:
            return rho, psi, it, drift
        rho_prev = rho
    raise NoConvergence(max_iters, drift)


def default_substeps(d, field, R, T):
    """Heuristic substep count: resolve the principal decay rate well."""
    j01 = 2.4048255576957724
    kappa = d * (j01 / R) ** 2 + abs(field.alpha2_max()) + 1.0
    return max(256, int(np.ceil(8.0 * T * kappa)))


def principal_eigenvalue(d, field, R, T, N=2, tol=1e-7, n=512, substeps=None,
                         phases=32, max_iters=20000, psi0=None):
    """Principal eigenvalue and positive eigenfunction on the ball of radius R.

    Power iteration runs at ``substeps`` and ``2*substeps`` per period; the
    two multiplier estimates are Richardson-extrapolated in the step size
    and the reported rho is exp(-lambda1*T).
    """
    if R <= 0 or d <= 0:
        raise ValueError("R and d must be positive")
    grid = RadialGrid(n=n, R=float(R), N=int(N))
    if substeps is None:
        substeps = default_substeps(d, field, R, T)
    substeps = int(np.ceil(substeps / phases)) * phases
    if psi0 is None:
        psi0 = 1.0 - (grid.r / R) ** 2
    psi0 = np.asarray(psi0, dtype=float)

    rho_c, psi_c, it_c, _ = _power_iteration(grid, field, d, T, substeps,
                                             tol, max_iters, psi0)
    rho_f, psi_f, it_f, drift = _power_iteration(grid, field, d, T, 2 * substeps,
                                                 tol, max_iters, psi_c)
    lam_c = -math.log(rho_c) / T
    lam_f = -math.log(rho_f) / T
    lam = 2.0 * lam_f - lam_c
    # residual of the converged fine-step eigenpair
    solver = DiffusionSolver(grid, d, T / (2 * substeps), boundary="dirichlet")
    mapped = period_map(psi_f, grid, field, d, T, 2 * substeps, solver=solver)
    residual = float(np.max(np.abs(mapped - rho_f * psi_f)))
    # eigenfunction phase samples from one extra period of the fine run
    _, shots = period_map(psi_f, grid, field, d, T, 2 * substeps, solver=solver,
                          record=phases)
    phi = np.array([s / max(float(np.max(np.abs(s))), 1e-300) for s in shots])
    phi /= np.max(np.abs(phi))
    phi = np.abs(phi) * np.sign(np.max(phi))
    phase_times = np.arange(phases) * (T / phases)
    return EigenResult(lambda1=float(lam), rho=float(math.exp(-lam * T)),
                       phi=phi, phases=phase_times, grid=grid,
                       iterations=it_c + it_f, residual=residual)


def h_star(d, field, T, r_lo, r_hi, tol=1e-3, N=2, n=512, substeps=None,
           eig_tol=1e-7):
    """Habitat-radius threshold: the root of lambda1(R) = 0 by bisection.

    lambda1 is strictly decreasing in R.  If lambda1 is still positive at
    r_hi after one 4x bracket expansion the threshold is reported as
    infinite (math.inf).  Raises BracketInvalid when lambda1(r_lo) <= 0.
    """
    if not (0 < r_lo < r_hi):
        raise ValueError("need 0 < r_lo < r_hi")

    psi_warm = [None]

    def lam(R):
        try:
            res = principal_eigenvalue(d, field, R, T, N=N, tol=eig_tol, n=n,
                                       substeps=substeps, psi0=psi_warm[0])
        except NonPositiveIterate:
            # period map underflowed to zero: decay far too strong to
            # represent, so lambda1 is certainly positive at this radius
            return math.inf
        psi_warm[0] = res.phi[0]
        return res.lambda1

    lo, hi = float(r_lo), float(r_hi)
    if lam(lo) <= 0:
        raise BracketInvalid("lambda1(r_lo=%g) <= 0; threshold below bracket" % lo)
    if lam(hi) > 0:
        hi *= 4.0
        if lam(hi) > 0:
            return H_STAR_INFINITE
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if lam(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class DThresholds:
    d_star: float
    d_upper: float
    scan_d: np.ndarray
    scan_lambda: np.ndarray
    crossings: int


def d_thresholds(field, R, T, d_lo, d_hi, tol=1e-3, N=2, points=32, n=256,
                 substeps=None):
    """Scan lambda1 over a geometric d-grid and refine the outermost sign
    changes by bisection.

    d_star is the largest diffusion below the first crossing with
    lambda1 <= 0; d_upper the smallest above the last crossing with
    lambda1 > 0.  Monotonicity in d is not assumed; multiple crossings are
    reported via ``crossings``.  Raises NoSignChange for a one-signed scan.
    """
    if not (0 < d_lo < d_hi):
        raise ValueError("need 0 < d_lo < d_hi")
    points = max(int(points), 32)
    ds = np.geomspace(d_lo, d_hi, points)

    def lam(d):
        return principal_eigenvalue(d, field, R, T, N=N, n=n,
                                       substeps=substeps).lambda1

    lams = np.array([lam(d) for d in ds])
    signs = lams > 0
    flips = np.nonzero(signs[1:] != signs[:-1])[0]
    if flips.size == 0:
        raise NoSignChange(+1 if signs[0] else -1)

    def refine(lo, hi):
        # bisect for the zero crossing inside [lo, hi]
        f_lo = lam(lo)
        while hi / lo > 1.0 + tol:
            mid = math.sqrt(lo * hi)
            if (lam(mid) > 0) == (f_lo > 0):
                lo = mid
            else:
                hi = mid
        return math.sqrt(lo * hi)

    first = flips[0]
    last = flips[-1]
    d_star = refine(ds[first], ds[first + 1])
    d_upper = d_star if last == first else refine(ds[last], ds[last + 1])
    return DThresholds(d_star=float(d_star), d_upper=float(d_upper),
                       scan_d=ds, scan_lambda=lams, crossings=int(flips.size))
