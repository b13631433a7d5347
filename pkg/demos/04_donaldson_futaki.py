# Donaldson-Futaki invariants of product configurations on P^n, from a
# brute-force count of monomials, and the extraction of W0 and W1 from
# sampled fibration data.
from mmflow.kstab import adiabatic_expansion, adiabatic_verdict, df_from_oracle, projective_weight_oracle

print("degree-j monomials on P^1 with weights (0, 1):")
for j in range(1, 6):
    print("   j =", j, " (dim, weight) =", projective_weight_oracle([0, 1], j))

for c in ([0, 1], [0, 0, 1], [2, 5, -1], [0, 1, 2, 3]):
    res = df_from_oracle(c, len(c) - 1)
    a0, a1, b0, b1 = res.coefficients
    print(f"weights {c}: a0={a0} a1={a1} b0={b0} b1={b1}  DF={res.df}")

ks = [10, 15, 20, 30, 50, 100]
fit = adiabatic_expansion([(k, 1 + 1 / k + 1 / k**2) for k in ks])
print(f"W0={fit.W0:.9f} W1={fit.W1:.9f} residual={fit.residual:.1e}")
print(adiabatic_verdict(fit))

fit = adiabatic_expansion([(k, -0.25 / k) for k in ks])
print(f"W0={fit.W0:.2e} W1={fit.W1:.6f}", adiabatic_verdict(fit))
