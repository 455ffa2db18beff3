"""
Flows of polygons and the zero-curvature equation
=================================================

Any motion of the vertices that keeps the curve generic can be written as
gamma_k' = alpha_k gamma_k + beta_k/u_k (gamma_{k+1} - gamma_{k-1}).  The
induced rates of g and u and the frame connection V_k follow in closed form.
"""

import numpy as np

from todacurve import (CurveState, FlowCoefficients, VMatrixEntries, alpha_beta_from_v,
                       compute_invariants, curve_velocity, g_dot, generate_curve, u_dot,
                       zero_curvature_residual)
from todacurve.flows import v_matrices

rng = np.random.default_rng(1)
curve = generate_curve(7, seed=2)
inv = compute_invariants(curve)
flow = FlowCoefficients(rng.normal(size=7), rng.normal(size=7))

# Move the vertices by a small Euler step and compare the observed change of
# g and u with the predicted rates.  Shrinking the step ten times shrinks the
# error ten times: the formulas are exact derivatives.
for dt in (1e-3, 1e-4, 1e-5):
    moved = compute_invariants(CurveState.from_points(curve.points + dt * curve_velocity(curve, flow)))
    err_g = np.abs((moved.g - inv.g) / dt - g_dot(inv, flow)).max()
    err_u = np.abs((moved.u - inv.u) / dt - u_dot(inv, flow)).max()
    print(f"dt={dt:.0e}  error in g' {err_g:.2e}  error in u' {err_u:.2e}")

# The transfer matrices L_k and connection matrices V_k satisfy
# L_k' = V_{k+1} L_k - L_k V_k for every flow.
print("zero-curvature residual:", zero_curvature_residual(curve, flow))

# A connection can be prescribed by its first row; the flow producing it is
# recovered exactly.
v = VMatrixEntries(rng.normal(size=7), rng.normal(size=7))
V = v_matrices(inv, alpha_beta_from_v(inv, v))
print("first row reproduced:", np.allclose(V[:, 0, 0], v.v11) and np.allclose(V[:, 0, 1], v.v12))
