"""Repeated states: the Born rule emerges from coefficient convergence.

For psi = sqrt(0.3)|A1> + sqrt(0.7)|A2> the squared coefficients of psi^(n)
form a multinomial bell centred at k1 = 0.3 n. Applying the rate operator
multiplies each term by k1/n; as n grows the result approaches 0.3 psi^(n).
An indefinite metric changes the norm-weighted average but not the
coefficient probabilities.
"""

import math

import numpy as np

from krein_qm import IndefiniteMetric, KreinOperator
from krein_qm import repeated as rep

c = np.array([math.sqrt(0.3), math.sqrt(0.7)])

print("n     peak k1   projective residual")
for n in (25, 100, 400, 1600):
    conv = rep.coefficient_convergence(c, 0, n)
    print(f"{n:<5d} {conv.peak_location[0]:<9d} {conv.projective_residual:.4f}")

g = rep.gaussian_summary(c, 1000)
print(f"\nGaussian fit at n = 1000: mu = {g.mu}, var(k1) = {g.sigma2[0, 0]:.1f}")

psi = [math.sqrt(3), math.sqrt(2)]
print("\npsi = sqrt(3)|+> + sqrt(2)|-> with metric diag(1, -1)")
print("coefficient probability p1 =", rep.coefficient_convergence(psi, 0, 400).probability)
for n in (10, 100, 1000):
    print(f"  norm moment <P1^2>, n = {n:<4d}: {rep.norm_moment([1, -1], psi, 0, 2, n):.4f}  (weight^2 = 9)")

A = KreinOperator(np.diag([1.0, 0.0]), IndefiniteMetric.from_signs([1, -1]))
lhs, rhs = rep.average_check(A, psi, 20)
print(f"averaged observable on psi^(20): {lhs.real:.12f}, on psi: {rhs.real:.12f}")
