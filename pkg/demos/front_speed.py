"""Asymptotic spreading speed: semi-wave prediction vs direct simulation.

The spreading front settles onto a periodic semi-wave whose drift k0(t)
solves a fixed-point problem with the Stefan condition; the asymptotic
speed is the period mean c of the drift.  The measured slope of h(t)
over the trailing window of a long run should agree.
"""

from stefanlab import (ProblemSpec, constant_field, k0_fixed_point,
                       measure_front_speed, simulate)

mu = 5.0
res = k0_fixed_point(mu, 1.0, 1.0, 1.0, 1.0)
print("semi-wave speed for mu = %g: c = %.4f (bound 2 sqrt(d a) = %.4f)"
      % (mu, res.c, res.bound))

spec = ProblemSpec.build(constant_field(1.0), d=1.0, mu=mu, h0=3.0, n=512)
traj = simulate(spec, t_max=120.0)
slope, crude = measure_front_speed(traj)
print("measured slope over the trailing window: %.4f (crude h/t: %.4f)"
      % (slope, crude))
print("relative difference: %.2f%%" % (100 * abs(slope - res.c) / res.c))

# the speed is increasing in mu and collapses as mu -> 0
for m in (0.2, 1.0, 2.0, 5.0):
    print("  mu = %5.1f   c = %.4f" % (m, k0_fixed_point(m, 1.0, 1.0, 1.0, 1.0).c))
