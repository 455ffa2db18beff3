"""Flows on discrete curves and the induced flows on g and u.

Any variation of a generic curve can be written as

    d/dt gamma_k = alpha_k gamma_k + (beta_k / u_k) (gamma_{k+1} - gamma_{k-1})

for real sequences alpha, beta.  This module evaluates that velocity field,
the induced derivatives of g and u, the flow matrices V_k that make
``(L_k, V_k)`` a zero-curvature pair, and the conversion from the first row of
V_k back to (alpha, beta).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import CurveState, DetInvariants, compute_invariants, lax_matrices, lattice_neighbours
from .errors import DegenerateSum


@dataclass(frozen=True, eq=False)
class FlowCoefficients:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float).reshape(-1)
        b = np.asarray(self.beta, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise ValueError("alpha and beta must have the same length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("flow coefficients must be finite")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def n(self) -> int:
        return self.alpha.size

    @classmethod
    def zeros(cls, n: int) -> "FlowCoefficients":
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def from_vector(cls, w) -> "FlowCoefficients":
        w = np.asarray(w, dtype=float)
        n = w.size // 2
        return cls(w[:n], w[n:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta])


@dataclass(frozen=True, eq=False)
class VMatrixEntries:
    """First-row entries ``v11``, ``v12`` of the flow matrices V_k."""

    v11: np.ndarray
    v12: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v11", np.asarray(self.v11, dtype=float).reshape(-1))
        object.__setattr__(self, "v12", np.asarray(self.v12, dtype=float).reshape(-1))
        if self.v11.shape != self.v12.shape:
            raise ValueError("v11 and v12 must have the same length")


def _shift(v, s):
    # _shift(v, s)[k] == v[(k + s) % n]
    return np.roll(v, -s)


def curve_velocity(c: CurveState, f: FlowCoefficients) -> np.ndarray:
    """Velocity ``alpha_k gamma_k + (beta_k/u_k)(gamma_{k+1} - gamma_{k-1})`` as an (N, 2) array."""
    inv = compute_invariants(c)
    inv.require_u(f.beta != 0)
    P = c.points
    prev, nxt = lattice_neighbours(c)
    coef = np.divide(f.beta, inv.u, out=np.zeros(c.n), where=f.beta != 0)
    return f.alpha[:, None] * P + coef[:, None] * (nxt - prev)


def v_matrices(inv: DetInvariants, f: FlowCoefficients) -> np.ndarray:
    """All flow matrices V_0..V_{N-1} as an (N, 2, 2) array."""
    inv.require_g()
    inv.require_u(f.beta != 0)
    g, u = inv.g, inv.u
    al, be = f.alpha, f.beta
    gm, gmm = _shift(g, -1), _shift(g, -2)
    bu = np.divide(be, u, out=np.zeros(inv.n), where=be != 0)
    V = np.empty((inv.n, 2, 2))
    V[:, 0, 0] = al + be / gm
    V[:, 0, 1] = -(1.0 + g / gm) * bu
    V[:, 1, 0] = (1.0 + gmm / gm) * _shift(bu, -1)
    V[:, 1, 1] = _shift(al, -1) - _shift(be, -1) / gm
    return V


def v_matrix(inv: DetInvariants, f: FlowCoefficients, k: int) -> np.ndarray:
    """Flow matrix V_k; indices k-1, k-2 wrap mod N."""
    n = inv.n
    k %= n
    km, kmm = (k - 1) % n, (k - 2) % n
    inv.require_g([km])
    mask = np.zeros(n, dtype=bool)
    mask[[k, km]] = f.beta[[k, km]] != 0
    inv.require_u(mask)
    g, u, al, be = inv.g, inv.u, f.alpha, f.beta
    bu_k = be[k] / u[k] if be[k] != 0 else 0.0
    bu_km = be[km] / u[km] if be[km] != 0 else 0.0
    return np.array([
        [al[k] + be[k] / g[km], -(1.0 + g[k] / g[km]) * bu_k],
        [(1.0 + g[kmm] / g[km]) * bu_km, al[km] - be[km] / g[km]],
    ])


def g_dot(inv: DetInvariants, f: FlowCoefficients) -> np.ndarray:
    """``g_k (alpha_{k+1} + alpha_k) + beta_{k+1} - beta_k``."""
    al, be = f.alpha, f.beta
    return inv.g * (_shift(al, 1) + al) + _shift(be, 1) - be


def u_dot(inv: DetInvariants, f: FlowCoefficients) -> np.ndarray:
    """Time derivative of u_k induced by the flow (alpha, beta)."""
    inv.require_g()
    inv.require_u(f.beta != 0)
    g, u, al, be = inv.g, inv.u, f.alpha, f.beta
    gm, gmm, gp = _shift(g, -1), _shift(g, -2), _shift(g, 1)
    bu = np.divide(be, u, out=np.zeros(inv.n), where=be != 0)
    return (
        u * (_shift(al, -1) + _shift(al, 1))
        + _shift(bu, -1) * g * (gmm + gm) / gm
        - _shift(bu, 1) * gm * (g + gp) / g
        + u * (_shift(be, 1) / g - _shift(be, -1) / gm)
    )


def alpha_beta_from_v(inv: DetInvariants, v: VMatrixEntries) -> FlowCoefficients:
    """Recover (alpha, beta) from the first row of the V_k.

    Raises
    ------
    DegenerateSum
        If some ``|g_{k-1} + g_k|`` is below the threshold.
    """
    g, u = inv.g, inv.u
    gm = _shift(g, -1)
    s = gm + g
    bad = np.flatnonzero(np.abs(s) <= inv.eps)
    if bad.size:
        raise DegenerateSum(f"|g_(k-1) + g_k| <= {inv.eps:.3g} at site(s) {bad.tolist()}")
    return FlowCoefficients(v.v11 + v.v12 * u / s, -v.v12 * gm * u / s)


def lax_dot(inv: DetInvariants, f: FlowCoefficients) -> np.ndarray:
    """Time derivative of the transfer matrices by the quotient rule."""
    g, u = inv.g, inv.u
    gd, ud = g_dot(inv, f), u_dot(inv, f)
    gm, gmd = _shift(g, -1), _shift(gd, -1)
    Ld = np.zeros((inv.n, 2, 2))
    Ld[:, 0, 0] = ud / gm - u * gmd / gm**2
    Ld[:, 0, 1] = -gd / gm + g * gmd / gm**2
    return Ld


def zero_curvature_residual(c: CurveState, f: FlowCoefficients, dt: float = 1e-6,
                            mode: str = "analytic") -> float:
    """Max-norm defect of ``dL_k/dt = V_{k+1} L_k - L_k V_k`` over all sites.

    ``mode="analytic"`` forms dL/dt from :func:`g_dot` and :func:`u_dot`;
    ``mode="fd"`` takes a forward difference of L along one Euler step of
    :func:`curve_velocity` of size ``dt`` (error O(dt)).
    """
    inv = compute_invariants(c)
    L = lax_matrices(inv).L
    V = v_matrices(inv, f)
    rhs = np.roll(V, -1, axis=0) @ L - L @ V
    if mode == "analytic":
        Ld = lax_dot(inv, f)
    elif mode == "fd":
        moved = CurveState.from_points(c.points + dt * curve_velocity(c, f), c.twist)
        Ld = (lax_matrices(compute_invariants(moved)).L - L) / dt
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(np.abs(Ld - rhs).max())
