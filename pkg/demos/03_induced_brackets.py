"""
Three Toda brackets from one canonical bracket
==============================================

Give the vertex coordinates the canonical bracket {x_i, y_i} = 1/2 and change
variables to a_k = g_k**-2, b_k = u_k/(g_{k-1} g_k) - lam.  The brackets of
(a, b) are then a quadratic polynomial in lam whose coefficients are the
Toda brackets P1, P2 and P3 of degrees one to three.
"""

import numpy as np

from todacurve import (P1, P2, P3, FMState, fm_map, generate_curve, hexagon, jacobi_residual,
                       lambda_grade, numerical_bracket_table, closed_form_table, verify_theorem2)

curve = generate_curve(8, seed=11)

# Compare every pair bracket computed on the curve with the closed forms.
for lam in (0.0, 1.0, -1.0, 3.7):
    r = verify_theorem2(curve, lam)
    print(f"lam={lam:5.1f}  max relative deviation {r.max_rel:.1e}  passed={r.passed}")

# A single entry, side by side.
s = fm_map(curve, 0.5)
num = numerical_bracket_table(curve, 0.5)
cf = closed_form_table(s)
print("{b_3, a_2}:", num["b3", "a2"], "closed form:", cf["b3", "a2"])

# Split the bracket into powers of lam.  On the hexagon (a = 4/3) the linear
# bracket has {b_1, a_0} = a_0 and {b_1, a_1} = -a_1.
graded = lambda_grade(hexagon())
print("hexagon linear bracket: {b1,a0} =", round(graded.P1["b1", "a0"], 12),
      " {b1,a1} =", round(graded.P1["b1", "a1"], 12))
print("fit deviations:", {k: f"{v:.1e}" for k, v in graded.deviation.items()})

# Each bracket, and every member of the pencil P1 + t P2 + t^2 P3, satisfies
# the Jacobi identity.
rng = np.random.default_rng(0)
state = FMState(rng.uniform(0.5, 2.0, 6), rng.uniform(-1.0, 1.0, 6))
for name, P in [("P1", P1), ("P2", P2), ("P3", P3), ("P1+2P2+4P3", P1 + 2.0 * P2 + 4.0 * P3)]:
    print(f"Jacobi residual of {name}: {jacobi_residual(P, state):.1e}")
