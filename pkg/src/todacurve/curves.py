"""Closed discrete planar curves and their determinant invariants.

A closed discrete curve of length N is a sequence of points
``gamma_k = (x_k, y_k)`` with ``gamma_{k+N} = gamma_k``.  Everything here is
indexed ``0..N-1`` with arithmetic mod N.

The local invariants are

    g_k = det(gamma_k, gamma_{k+1}),    u_k = det(gamma_{k-1}, gamma_{k+1}),

and the curve can be rebuilt from them with the three-term recursion

    gamma_{k+1} = (u_k gamma_k - g_k gamma_{k-1}) / g_{k-1}.

The same recursion written on frames ``F_k = (gamma_k; gamma_{k-1})`` reads
``F_{k+1} = L_k F_k`` with the transfer matrices returned by
:func:`lax_matrices`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInvariant, GenerationFailure

#: Relative size of the degeneracy threshold, multiplied by (max |coordinate|)**2.
EPS_REL = 1e-12


@dataclass(frozen=True, eq=False)
class CurveState:
    """A closed discrete curve in the plane.

    Parameters
    ----------
    x, y : array_like
        Coordinates of the N vertices.
    twist : (2, 2) array_like, optional
        Fixed SL(2) matrix M with ``gamma_{k+N} = M gamma_k``.  ``None`` (the
        default) means a genuinely closed curve.  Twisted curves are only used
        internally, to realise Flaschka-Manakov states that no closed curve
        reaches.
    """

    x: np.ndarray
    y: np.ndarray
    twist: np.ndarray | None = None

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.shape != y.shape:
            raise ValueError(f"x and y differ in length ({x.size} != {y.size})")
        if x.size < 1:
            raise ValueError("a curve needs at least one vertex")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.twist is not None:
            M = np.array(self.twist, dtype=float)
            if M.shape != (2, 2):
                raise ValueError("twist must be a 2x2 matrix")
            object.__setattr__(self, "twist", M)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def points(self) -> np.ndarray:
        """Vertices as an (N, 2) array."""
        return np.column_stack([self.x, self.y])

    @property
    def coords(self) -> np.ndarray:
        """Flat phase-space vector ``(x_0..x_{N-1}, y_0..y_{N-1})``."""
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_points(cls, points, twist=None) -> "CurveState":
        P = np.asarray(points, dtype=float)
        return cls(P[:, 0], P[:, 1], twist)

    @classmethod
    def from_coords(cls, z, twist=None) -> "CurveState":
        z = np.asarray(z, dtype=float)
        n = z.size // 2
        return cls(z[:n], z[n:], twist)

    @property
    def scale(self) -> float:
        """Squared max-abs coordinate; sets the size of the degeneracy guards."""
        return float(max(np.abs(self.x).max(), np.abs(self.y).max()) ** 2)

    @property
    def eps(self) -> float:
        return EPS_REL * self.scale

    def is_generic(self) -> bool:
        """True when every ``|g_k|`` clears the degeneracy threshold."""
        return bool(np.all(np.abs(compute_invariants(self).g) > self.eps))

    def shifted(self, s: int = 1) -> "CurveState":
        """Relabel vertices so that new ``gamma_k`` is old ``gamma_{k+s}``."""
        if self.twist is not None:
            raise NotImplementedError("cyclic relabelling of twisted curves")
        return CurveState(np.roll(self.x, -s), np.roll(self.y, -s))


def regular_polygon(n: int, radius: float = 1.0) -> CurveState:
    """Regular n-gon ``gamma_k = radius * (cos 2 pi k/n, sin 2 pi k/n)``."""
    t = 2.0 * np.pi * np.arange(n) / n
    return CurveState(radius * np.cos(t), radius * np.sin(t))


def hexagon() -> CurveState:
    return regular_polygon(6)


def perturbed_polygon(n: int, seed: int = 0, amplitude: float = 0.2) -> CurveState:
    """Regular n-gon with seeded radial and angular jitter.

    Radii are drawn from ``1 +- amplitude`` and angles move by at most
    ``amplitude`` times half the polygon's angular step, so the result stays
    convex and far from degenerate.  Used where well-conditioned states are
    needed (time integration at a fixed step).
    """
    rng = np.random.default_rng(seed)
    step = 2.0 * np.pi / n
    t = step * (np.arange(n) + 0.5 * amplitude * rng.uniform(-1.0, 1.0, n))
    r = 1.0 + amplitude * rng.uniform(-1.0, 1.0, n)
    return CurveState(r * np.cos(t), r * np.sin(t))


@dataclass(frozen=True, eq=False)
class DetInvariants:
    """The determinant sequences g and u of a curve.

    ``scale`` is the squared coordinate scale of the source curve and sets the
    degeneracy thresholds of downstream operations.
    """

    g: np.ndarray
    u: np.ndarray
    scale: float | None = None

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float).reshape(-1)
        u = np.asarray(self.u, dtype=float).reshape(-1)
        if g.shape != u.shape:
            raise ValueError("g and u must have the same length")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "u", u)
        if self.scale is None:
            s = max(np.abs(g).max(initial=0.0), np.abs(u).max(initial=0.0))
            object.__setattr__(self, "scale", float(s) if s > 0 else 1.0)

    @property
    def n(self) -> int:
        return self.g.size

    @property
    def eps(self) -> float:
        return EPS_REL * self.scale

    def require_g(self, idx=None):
        g = self.g if idx is None else self.g[idx]
        bad = np.flatnonzero(np.abs(g) <= self.eps)
        if bad.size:
            raise DegenerateInvariant(
                f"|g| <= {self.eps:.3g} at site(s) {bad.tolist()}")

    def require_u(self, mask=None):
        small = np.abs(self.u) <= self.eps
        if mask is not None:
            small &= mask
        bad = np.flatnonzero(small)
        if bad.size:
            raise DegenerateInvariant(
                f"|u| <= {self.eps:.3g} at site(s) {bad.tolist()}")


def lattice_neighbours(c: CurveState) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(gamma_{k-1}, gamma_{k+1})`` for every k as (N, 2) arrays.

    For a twisted curve the wrap-around neighbours are moved by the twist.
    """
    P = c.points
    prev = np.roll(P, 1, axis=0)
    nxt = np.roll(P, -1, axis=0)
    if c.twist is not None:
        nxt[-1] = c.twist @ P[0]
        prev[0] = np.linalg.solve(c.twist, P[-1])
    return prev, nxt


def _det(p, q):
    return p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]


def compute_invariants(c: CurveState) -> DetInvariants:
    """Determinants ``g_k = det(gamma_k, gamma_{k+1})`` and ``u_k = det(gamma_{k-1}, gamma_{k+1})``.

    Degenerate curves are not rejected here; callers that divide by g or u
    check the thresholds themselves.
    """
    P = c.points
    prev, nxt = lattice_neighbours(c)
    return DetInvariants(_det(P, nxt), _det(prev, nxt), scale=c.scale)


def reconstruct_curve(g, u, gamma0, gamma1, steps: int, eps: float | None = None) -> np.ndarray:
    """Rebuild points ``gamma_0 .. gamma_steps`` from invariants and two seeds.

    Parameters
    ----------
    g, u : array_like
        Periodic invariant sequences of length N.
    gamma0, gamma1 : array_like
        The first two points.
    steps : int
        Index of the last point produced.
    eps : float, optional
        Degeneracy threshold for ``|g|``; defaults to ``1e-12`` times the
        squared scale of the seed points.

    Returns
    -------
    ndarray of shape (steps + 1, 2)

    Raises
    ------
    DegenerateInvariant
        If a ``g_{k-1}`` used as a divisor is below the threshold.
    """
    g = np.asarray(g, dtype=float)
    u = np.asarray(u, dtype=float)
    n = g.size
    p0 = np.asarray(gamma0, dtype=float)
    p1 = np.asarray(gamma1, dtype=float)
    if eps is None:
        eps = EPS_REL * max(np.abs(p0).max(), np.abs(p1).max()) ** 2
    out = np.empty((max(steps, 1) + 1, 2))
    out[0], out[1] = p0, p1
    for k in range(1, steps):
        gm = g[(k - 1) % n]
        if abs(gm) <= eps:
            raise DegenerateInvariant(f"|g_{(k - 1) % n}| = {abs(gm):.3g} <= {eps:.3g}")
        out[k + 1] = (u[k % n] * out[k] - g[k % n] * out[k - 1]) / gm
    return out[: steps + 1]


def frame(c: CurveState, k: int) -> np.ndarray:
    """Discrete frame: the 2x2 matrix with rows ``gamma_k`` and ``gamma_{k-1}``."""
    n = c.n
    P = c.points
    return np.array([P[k % n], P[(k - 1) % n]])


@dataclass(frozen=True, eq=False)
class LaxData:
    L: np.ndarray
    V: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.L.shape[0]


def lax_matrices(inv: DetInvariants) -> LaxData:
    """Transfer matrices ``L_k = [[u_k/g_{k-1}, -g_k/g_{k-1}], [1, 0]]``."""
    inv.require_g()
    g, u = inv.g, inv.u
    gm = np.roll(g, 1)
    L = np.zeros((inv.n, 2, 2))
    L[:, 0, 0] = u / gm
    L[:, 0, 1] = -g / gm
    L[:, 1, 0] = 1.0
    return LaxData(L)


def monodromy(lax: LaxData | np.ndarray) -> np.ndarray:
    """Ordered product ``T = L_{N-1} ... L_1 L_0``, so that ``T F_0 = F_N``."""
    L = lax.L if isinstance(lax, LaxData) else np.asarray(lax)
    T = np.eye(2)
    for Lk in L:
        T = Lk @ T
    return T


def generate_curve(n: int, seed: int = 0, preset: str | None = None,
                   max_attempts: int = 100) -> CurveState:
    """Seeded random closed curve with coordinates uniform in [-1, 1].

    Draws are rejected until every g_k, u_k and g_{k-1} + g_k clears the
    degeneracy threshold.  ``preset="hexagon"`` returns the regular hexagon
    and ignores ``n`` and ``seed``.
    """
    if preset is not None:
        if preset == "hexagon":
            return hexagon()
        raise ValueError(f"unknown preset {preset!r}")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        c = CurveState(rng.uniform(-1.0, 1.0, n), rng.uniform(-1.0, 1.0, n))
        inv = compute_invariants(c)
        guards = (inv.g, inv.u, inv.g + np.roll(inv.g, 1))
        if all(np.all(np.abs(v) > c.eps) for v in guards):
            return c
    raise GenerationFailure(f"no nondegenerate curve after {max_attempts} draws (n={n}, seed={seed})")
