# The circle acting on C^2 with weights (1, -1).
# Its moment map is -(|z1|^2 - |z2|^2) / 2, so the flow pushes the two
# coordinates towards equal size while keeping z1 * z2 fixed.
import numpy as np

from mmflow.algebra import make_torus_rep
from mmflow.flow import FlowParams, analyze_limit, integrate_flow
from mmflow.symplectic import moment_map

rep = make_torus_rep(1, [[1], [-1]])

x0 = np.array([2.0, 1.0])
print("mu(x0) =", moment_map(rep, x0).value)

traj = integrate_flow(rep, x0, FlowParams(max_time=20.0, record_every=2.0))
for t, x, e in zip(traj.t, traj.points, traj.mu_norm_sq):
    print(f"t={t:6.2f}  |z1|={abs(x[0]):.6f}  |z2|={abs(x[1]):.6f}  z1*z2={(x[0] * x[1]).real:.10f}  |mu|^2={e:.3e}")

full = integrate_flow(rep, x0)
print("terminal:", full.terminal.real, " sqrt(2) =", np.sqrt(2))
print("dichotomy:", analyze_limit(rep, full, x0).dichotomy.value)

# On the axis z2 = 0 there is nothing to balance against: |z1|^2 = 1/(1+t).
axis = integrate_flow(rep, [1.0, 0.0], FlowParams(max_time=100.0, record_every=25.0))
for t, x in zip(axis.t, axis.points):
    print(f"t={t:6.1f}  |z1|^2={abs(x[0]) ** 2:.8f}  1/(1+t)={1 / (1 + t):.8f}")

lim = analyze_limit(rep, integrate_flow(rep, [1.0, 0.0]), [1.0, 0.0])
print("axis start:", lim.dichotomy.value, "witness", lim.witness, "limit support", sorted(lim.support))
