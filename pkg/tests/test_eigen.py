import math

import numpy as np
import pytest

from stefanlab.coeffmodel import CoefficientField, constant_field
from stefanlab.eigen import (H_STAR_INFINITE, d_thresholds, h_star,
                             period_map, principal_eigenvalue)
from stefanlab.errors import BracketInvalid, NoSignChange
from stefanlab.radialcore import DiffusionSolver, RadialGrid


def bessel_j0_first_zero(tol=1e-14):
    """First positive zero of J0 by bisection on the power series / scipy."""
    from scipy.special import j0
    lo, hi = 2.0, 3.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if j0(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


J01 = bessel_j0_first_zero()


def dirichlet_ground_eigenvalue(n, R, N, d):
    """Smallest eigenvalue of -d*Lap on the discrete radial grid.

    Independent oracle: dense eigensolve of the same matrix the implicit
    stepper uses, so period_map can be checked against separation of
    variables exactly in the discrete setting.
    """
    grid = RadialGrid(n=n, R=R, N=N)
    dr = grid.dr
    m = n
    A = np.zeros((m, m))
    A[0, 0] = 2.0 * N * d / dr ** 2
    A[0, 1] = -2.0 * N * d / dr ** 2
    for j in range(1, m):
        w = (N - 1) / (2.0 * j)
        A[j, j] = 2.0 * d / dr ** 2
        A[j, j - 1] = -d * (1.0 - w) / dr ** 2
        if j + 1 < m:
            A[j, j + 1] = -d * (1.0 + w) / dr ** 2
    vals, vecs = np.linalg.eig(A)
    k = int(np.argmin(vals.real))
    lam = float(vals.real[k])
    mode = vecs[:, k].real
    mode = mode * np.sign(mode[0])
    return lam, mode


class TestPeriodMap:
    def test_zero_potential_tiny_d(self):
        fld = constant_field(0.0, gamma=1.0)   # growth 0
        grid = RadialGrid(n=128, R=1.0, N=2)
        psi = 1.0 - grid.r ** 2
        out = period_map(psi, grid, fld, 1e-8, 1.0, substeps=256)
        assert np.max(np.abs(out - psi)) < 1e-4

    def test_linearity(self):
        fld = constant_field(1.0)
        grid = RadialGrid(n=64, R=2.0, N=2)
        psi = np.cos(np.pi * grid.r / 4.0)
        solver = DiffusionSolver(grid, 1.0, 1.0 / 512)
        a = period_map(2.0 * psi, grid, fld, 1.0, 1.0, 512, solver=solver)
        b = period_map(psi, grid, fld, 1.0, 1.0, 512, solver=solver)
        assert np.max(np.abs(a - 2.0 * b)) < 1e-12

    def test_ground_mode_separation_of_variables(self):
        # discrete ground mode of the same operator: multiplier is
        # exp((c - lam_D)T) up to the implicit-Euler step-size bias
        c, d, R, T, n = 0.5, 1.0, 1.0, 1.0, 128
        lam_D, mode = dirichlet_ground_eigenvalue(n, R, 2, d)
        fld = constant_field(c)
        grid = RadialGrid(n=n, R=R, N=2)
        psi = np.zeros(n + 1)
        psi[:n] = mode / np.max(mode)
        out = period_map(psi, grid, fld, d, T, substeps=16384)
        ratio = np.max(out) / np.max(psi)
        assert ratio == pytest.approx(math.exp((c - lam_D) * T), rel=2e-3)


class TestPrincipalEigenvalue:
    def test_bessel_closed_form_R1(self):
        res = principal_eigenvalue(1.0, constant_field(1.0), 1.0, 1.0, n=512)
        exact = J01 ** 2 - 1.0
        assert abs(res.lambda1 - exact) / exact < 1e-3

    def test_bessel_closed_form_R2(self):
        res = principal_eigenvalue(1.0, constant_field(1.0), 2.0, 1.0, n=512)
        exact = J01 ** 2 / 4.0 - 1.0
        assert abs(res.lambda1 - exact) / abs(exact) < 1e-3

    def test_rho_lambda_invariant(self):
        res = principal_eigenvalue(1.0, constant_field(1.0), 2.0, 1.0, n=128)
        assert res.lambda1 == pytest.approx(-math.log(res.rho) / 1.0, abs=1e-14)

    def test_eigenfunction_normalized_positive(self):
        res = principal_eigenvalue(1.0, constant_field(1.0), 3.0, 1.0, n=128)
        assert np.max(res.phi) == pytest.approx(1.0)
        assert np.all(res.phi[:, 1:-1] > 0)
        assert np.allclose(res.phi[:, -1], 0.0)

    def test_shift_identity(self):
        fld = CoefficientField.from_expressions(
            alpha="1 + 0.5*cos(2*pi*t) + max(0, 1-r)", gamma="0.2", beta="1",
            T=1.0)
        base = principal_eigenvalue(1.0, fld, 2.0, 1.0, n=256)
        for c in (-1.0, 0.3, 2.0):
            shifted = CoefficientField.from_expressions(
                alpha="1 + 0.5*cos(2*pi*t) + max(0, 1-r) + (%r)" % c,
                gamma="0.2", beta="1", T=1.0)
            res = principal_eigenvalue(1.0, shifted, 2.0, 1.0, n=256)
            assert res.lambda1 == pytest.approx(base.lambda1 - c, abs=1e-8)

    def test_time_mean_reduction(self):
        osc = CoefficientField.from_expressions(
            alpha="1 + sin(2*pi*t)", gamma="0", beta="1", T=1.0)
        res_osc = principal_eigenvalue(1.0, osc, 1.0, 1.0, n=256)
        res_const = principal_eigenvalue(1.0, constant_field(1.0), 1.0, 1.0,
                                         n=256)
        assert res_osc.lambda1 == pytest.approx(res_const.lambda1, abs=1e-3)

    def test_monotone_in_R(self):
        fld = constant_field(1.0)
        Rs = np.linspace(0.8, 5.0, 10)
        lams = [principal_eigenvalue(1.0, fld, R, 1.0, n=128).lambda1
                for R in Rs]
        assert all(a > b for a, b in zip(lams, lams[1:]))

    def test_monotone_in_potential(self):
        base = CoefficientField.from_expressions(alpha="1", gamma="0.2",
                                                 beta="1", T=1.0)
        bumped = CoefficientField.from_expressions(
            alpha="1 + 0.05*max(0, 1-r)", gamma="0.2", beta="1", T=1.0)
        a = principal_eigenvalue(1.0, base, 2.0, 1.0, n=256).lambda1
        b = principal_eigenvalue(1.0, bumped, 2.0, 1.0, n=256).lambda1
        assert b < a

    def test_small_R_blowup(self):
        fld = constant_field(1.0)
        R_small = 0.1
        res = principal_eigenvalue(1.0, fld, R_small, 1.0, n=128)
        assert res.lambda1 > 100.0

    def test_small_d_limit(self):
        fld = CoefficientField.from_expressions(
            alpha="1 + max(0, 1-r)", gamma="0.3", beta="1", T=1.0)
        # max_r mean(alpha-gamma) = 1.7 at r=0
        res = principal_eigenvalue(1e-4, fld, 2.0, 1.0, n=512)
        assert res.lambda1 == pytest.approx(-1.7, rel=0.05)

    def test_large_d_growth(self):
        fld = constant_field(1.0)
        a = principal_eigenvalue(1.0, fld, 2.0, 1.0, n=128).lambda1
        b = principal_eigenvalue(10.0, fld, 2.0, 1.0, n=128).lambda1
        assert b > a + 1.0

    def test_residual_bound(self):
        tol = 1e-7
        res = principal_eigenvalue(1.0, constant_field(1.0), 2.0, 1.0,
                                   tol=tol, n=128)
        assert res.residual <= 10.0 * tol


class TestHStar:
    def test_constants_d1(self):
        hs = h_star(1.0, constant_field(1.0), 1.0, r_lo=1.0, r_hi=4.0,
                    tol=1e-3, n=256)
        assert hs == pytest.approx(J01, abs=1e-3)

    def test_constants_d4(self):
        hs = h_star(4.0, constant_field(1.0), 1.0, r_lo=2.0, r_hi=8.0,
                    tol=2e-3, n=256)
        assert hs == pytest.approx(2.0 * J01, abs=2e-3)

    def test_unfavorable_infinite(self):
        fld = CoefficientField.from_expressions(alpha="0.5", gamma="1",
                                                beta="1", T=1.0)
        hs = h_star(1.0, fld, 1.0, r_lo=1.0, r_hi=10.0, tol=1e-2, n=128)
        assert hs == H_STAR_INFINITE

    def test_bracket_invalid(self):
        with pytest.raises(BracketInvalid):
            h_star(1.0, constant_field(1.0), 1.0, r_lo=5.0, r_hi=10.0, n=128)


class TestDThresholds:
    def test_linear_crossing_R1(self):
        out = d_thresholds(constant_field(1.0), 1.0, 1.0, d_lo=0.01,
                           d_hi=10.0, tol=1e-3, n=128)
        exact = 1.0 / J01 ** 2
        assert out.d_star == pytest.approx(exact, rel=2e-3)
        assert out.d_upper == pytest.approx(out.d_star)
        assert out.crossings == 1

    def test_large_R_crossing(self):
        out = d_thresholds(constant_field(1.0), 10.0, 1.0, d_lo=1.0,
                           d_hi=100.0, tol=1e-3, n=128)
        exact = (10.0 / J01) ** 2
        assert out.d_star == pytest.approx(exact, rel=5e-3)

    def test_no_sign_change(self):
        fld = CoefficientField.from_expressions(alpha="0.5", gamma="1.5",
                                                beta="1", T=1.0)
        with pytest.raises(NoSignChange):
            d_thresholds(fld, 2.0, 1.0, d_lo=0.1, d_hi=10.0, n=128)
