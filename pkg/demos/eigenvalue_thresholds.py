"""Principal eigenvalue of the periodic-parabolic operator on a ball.

Sweeps the habitat radius, locates the radius threshold h* where the
eigenvalue changes sign, and scans the diffusion thresholds d* and d^*
for a fixed habitat.  For a constant environment with growth rate a the
closed forms are lambda1 = d (j01/R)^2 - a and h* = j01 sqrt(d/a), with
j01 the first zero of the Bessel function J0.
"""

import numpy as np

from stefanlab import constant_field, d_thresholds, h_star, principal_eigenvalue

J01 = 2.4048255576957724

field = constant_field(1.0)

print("lambda1(R) for d = 1, growth rate 1:")
print("%8s %12s %12s" % ("R", "lambda1", "closed form"))
for R in (0.5, 1.0, 2.0, 3.0, 5.0):
    res = principal_eigenvalue(1.0, field, R, 1.0, n=256)
    print("%8.2f %12.6f %12.6f" % (R, res.lambda1, (J01 / R) ** 2 - 1.0))

for d in (1.0, 4.0):
    hs = h_star(d, field, 1.0, r_lo=0.5 * np.sqrt(d), r_hi=5.0 * np.sqrt(d),
                tol=1e-3, n=256)
    print("h*(d=%g) = %.4f   (closed form %.4f)" % (d, hs, J01 * np.sqrt(d)))

# the same machinery works for genuinely time-periodic environments;
# a space-constant oscillation only contributes its time mean
from stefanlab.coeffmodel import CoefficientField

osc = CoefficientField.from_expressions(alpha="1 + sin(2*pi*t)", gamma="0",
                                        beta="1", T=1.0)
res = principal_eigenvalue(1.0, osc, 1.0, 1.0, n=256)
print("oscillating vs constant at R = 1: %.6f vs %.6f" %
      (res.lambda1, J01 ** 2 - 1.0))

dth = d_thresholds(field, 3.0, 1.0, d_lo=0.05, d_hi=20.0, n=128)
print("diffusion thresholds at R = 3: d* = %.4f, d^* = %.4f "
      "(closed form (R/j01)^2 = %.4f)" % (dth.d_star, dth.d_upper,
                                          (3.0 / J01) ** 2))
