# Removing the stabilizer directions before flowing.
# su(2) acts on two copies of C^2 and a circle on a further C^2; a start
# point with the last block zero is fixed by the circle, so its projected
# flow only sees su(2).
import numpy as np

from mmflow.algebra import make_matrix_rep, maximal_torus_in, stabilizer_algebra, su2_basis
from mmflow.flow import projected_flow, projected_moment, stabilizer_residual

mats = []
for b in su2_basis():
    m = np.zeros((6, 6), dtype=complex)
    m[:2, :2] = b
    m[2:4, 2:4] = b
    mats.append(m)
mats.append(np.diag([0, 0, 0, 0, 1j, -1j]))
rep = make_matrix_rep(mats)

rng = np.random.default_rng(3)
x0 = rng.normal(size=6) + 1j * rng.normal(size=6)
x0[4:] = 0

stab = stabilizer_algebra(rep, x0)
torus = maximal_torus_in(stab, rep)
print("stabilizer dimension", len(stab), " torus", np.round(torus, 6))

traj = projected_flow(rep, x0, torus)
m = projected_moment(rep, traj.terminal, torus)
print("termination", traj.termination.value, "at t =", round(traj.t[-1], 3))
print("|mu_T-perp(x_inf)| =", rep.norm(m))
print("distance to stabilizer algebra:", stabilizer_residual(rep, traj.terminal, m))

u, v = traj.terminal[:2], traj.terminal[2:4]
print("the two vectors end up orthogonal with equal length:")
print("   <u, v> =", np.vdot(u, v), " |u| =", np.linalg.norm(u), " |v| =", np.linalg.norm(v))
