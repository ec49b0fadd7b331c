"""How D0(pi/2) compares with the two candidate leading constants.

Prints D0(pi/2, eps) in units of sqrt(pi/2) eps^-5 e^{-1/(3 eps^3)} for a
window of eps, next to the closed-form constant -37/20 and the constant
assembled from the corrected coefficients.  Above eps = 0.4 the values come
from direct quadrature; below, the tau quadrature loses its digits to phase
rounding and the series on the shifted z contour is used instead.

Run: python demos/splitting_trend.py
"""

import numpy as np

from rtbp_duffing.asymptotics import CLOSED_FORM_LEADING_CONSTANT, assembled_leading_constant, leading_scale
from rtbp_duffing.melnikov import D0_direct, fourier_series_D0

closed = float(CLOSED_FORM_LEADING_CONSTANT)
assembled = {c: float(assembled_leading_constant("corrected", c)) for c in ("exact", "closed_form")}

print(f"closed form constant           {closed:+.6f}")
print(f"assembled, exact weights       {assembled['exact']:+.6f}")
print(f"assembled, closed-form weights {assembled['closed_form']:+.6f}")
print()
print(f"{'eps':>6} {'route':>7} {'ratio (exact)':>14} {'ratio (closed form)':>19} {'resid/eps^1.5':>14}")
for eps in (0.50, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15):
    if eps >= 0.4:
        route = "direct"
        r = {c: D0_direct(np.pi / 2, eps, c) / leading_scale(eps) for c in ("exact", "closed_form")}
    else:
        route = "series"
        r = {c: float(fourier_series_D0(eps, (4, 8, 8), c, method="z")(np.pi / 2)) / leading_scale(eps)
             for c in ("exact", "closed_form")}
    scaled = (r["exact"] - assembled["exact"]) / eps ** 1.5
    print(f"{eps:6.2f} {route:>7} {r['exact']:+14.6f} {r['closed_form']:+19.6f} {scaled:+14.4f}")

print()
print("The exact-weight ratio drifts toward -1/8 with a residual close to")
print("-0.22 eps^1.5; nothing in the table approaches -37/20.")
