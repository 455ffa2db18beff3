"""
Closed polygons and their determinant invariants
================================================

A polygon is stored as its vertex coordinates.  Two determinants per vertex,
g_k = det(gamma_k, gamma_{k+1}) and u_k = det(gamma_{k-1}, gamma_{k+1}),
describe it up to the action of SL(2), and a three-term recursion rebuilds it.
"""

import numpy as np

from todacurve import (compute_invariants, generate_curve, hexagon, lax_matrices,
                       monodromy, reconstruct_curve)

# The regular hexagon has every g_k and u_k equal to sqrt(3)/2.
hexa = hexagon()
inv = compute_invariants(hexa)
print("hexagon g:", np.round(inv.g, 12))
print("hexagon u:", np.round(inv.u, 12))

# A random curve: coordinates drawn uniformly in [-1, 1] and rejected until
# no determinant is too close to zero.  The seed fixes the curve bit for bit.
curve = generate_curve(9, seed=4)
inv = compute_invariants(curve)

# Rebuild the polygon from (g, u) and its first two vertices.  Running the
# recursion one extra step returns to the starting vertex.
points = reconstruct_curve(inv.g, inv.u, curve.points[0], curve.points[1], curve.n)
print("round-trip error:", np.abs(points[:-1] - curve.points).max())
print("closes up after N steps:", np.allclose(points[-1], curve.points[0]))

# The same recursion on frames (gamma_k; gamma_{k-1}) is a product of 2x2
# transfer matrices.  Their ordered product is the identity on a closed curve.
T = monodromy(lax_matrices(inv))
print("monodromy:\n", np.round(T, 12))
