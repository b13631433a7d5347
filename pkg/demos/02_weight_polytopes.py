# GIT verdicts of torus points from their weight polytopes, compared
# with where the moment map flow actually goes.
import numpy as np

from mmflow.algebra import make_torus_rep
from mmflow.flow import analyze_limit, integrate_flow
from mmflow.git import classify_stability, destabilizer, limit_face, one_ps_energy

rep = make_torus_rep(2, [[1, 0], [-1, 0], [0, 1]])

points = {
    "(1, 1, 0)": np.array([1, 1, 0]),
    "(1, 2, 1)": np.array([1, 2, 1]),
    "(1, 0, 1)": np.array([1, 0, 1]),
}

for name, x in points.items():
    rpt = classify_stability(rep, x)
    lim = analyze_limit(rep, integrate_flow(rep, x), x)
    print(name)
    print("   verdict     ", rpt.verdict.value, " certificate", [str(c) for c in rpt.certificate])
    print("   limit face  ", limit_face(rep, x))
    print("   flow limit  ", np.round(lim.limit_point.real, 4), " support", sorted(lim.support))
    print("   dichotomy   ", lim.dichotomy.value, " witness", lim.witness)

# The destabilizer drives the energy of an unstable point to zero.
x = points["(1, 0, 1)"]
lam = destabilizer(rep, x)
print("destabilizer of (1, 0, 1):", lam)
for t in (0.0, 1.0, 2.0, 4.0):
    print(f"   energy at t={t}: {one_ps_energy(rep, x, lam, t):.6f}")

# (1, 2, 1) degenerates onto the face {0, 1}, but the limit is not the
# degenerate point (1, 2, 0) itself: the flow balances |z1| and |z2|.
lim = analyze_limit(rep, integrate_flow(rep, points["(1, 2, 1)"]), points["(1, 2, 1)"])
print("final clause:", lim.final_clause)
