"""The spreading-vanishing dichotomy of the free-boundary invasion model.

Two runs of the same favorable environment: a population seeded beyond
the radius threshold h* spreads no matter how small the expansion
coefficient, while a small population inside the threshold with a weak
Stefan response retreats to extinction.
"""

import numpy as np

from stefanlab import ProblemSpec, classify_outcome, constant_field, simulate

field = constant_field(1.0)

big = ProblemSpec.build(field, d=1.0, mu=1.0, h0=3.0, n=256)
traj = simulate(big, t_max=30.0)
out = classify_outcome(traj, big)
print("h0 = 3.0, mu = 1.0: %s at t = %.2f (h* = %.4f, h(30) = %.2f)"
      % (out.verdict, out.t_decided, out.evidence.h_star, traj.h[-1]))

small = ProblemSpec.build(field, d=1.0, mu=0.01, h0=1.0, n=128,
                          u0="0.05*(1 - r^2)")
traj = simulate(small, t_max=30.0)
out = classify_outcome(traj, small)
print("h0 = 1.0, mu = 0.01: %s (h stalls at %.4f < h*, sup u = %.2e)"
      % (out.verdict, traj.h[-1], traj.u_sup[-1]))

# front history of the spreading run: h(t) becomes asymptotically linear
traj = simulate(big, t_max=60.0)
sel = np.searchsorted(traj.t, [10.0, 20.0, 30.0, 40.0, 50.0, 60.0])
sel = np.clip(sel, 0, traj.t.size - 1)
print("front radius along the spreading run:")
for i in sel:
    print("  t = %5.1f   h = %7.3f   h' = %.4f" % (traj.t[i], traj.h[i],
                                                   traj.h_prime[i]))
