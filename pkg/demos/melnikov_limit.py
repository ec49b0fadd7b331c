"""The splitting distance of the full solver tends to the Melnikov integral.

D(rho) = (mM_s(0) - mM_u(0))/rho is computed for a halving sequence of rho
at eps = 0.4, theta0 = 0.7 and extrapolated linearly to rho = 0, then set
against the first-order integral D0.

Run: python demos/melnikov_limit.py
"""

from rtbp_duffing.core_model import ParamSet
from rtbp_duffing.manifold import splitting_distance, splitting_distance_first_order
from rtbp_duffing.melnikov import D0_direct

eps, theta0 = 0.4, 0.7
rhos = (0.1, 0.05, 0.025, 0.0125)
D = []
for rho in rhos:
    D.append(splitting_distance(ParamSet(rho, eps, theta0)))
    print(f"rho = {rho:<7} D = {D[-1]:+.10f}")

print()
for (r0, d0), (r1, d1) in zip(zip(rhos, D), zip(rhos[1:], D[1:])):
    print(f"extrapolated from rho = {r0}, {r1}: {2 * d1 - d0:+.10f}")
print(f"first-order solver route      : {splitting_distance_first_order(theta0, eps):+.10f}")
print(f"Melnikov quadrature D0        : {D0_direct(theta0, eps):+.10f}")
