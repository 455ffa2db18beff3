"""The first periodic Toda flow on curves and on Flaschka-Manakov variables.

The reference dynamics is the Hamiltonian flow of ``H = sum(b_k**2/2 + a_k)``
under the linear bracket P1:

    da_k/dt = a_k (b_k - b_{k+1}),    db_k/dt = a_{k-1} - a_k.

On curves the same flow is realised by solving, at every state, for flow
coefficients (alpha, beta) whose induced motion of (a, b) equals this field.
Both routes are integrated with a fixed-step classical RK4 and compared.
Conserved quantities are the traces of the spectral monodromy

    T(lam) = L_{N-1}(lam) ... L_0(lam),
    L_k(lam) = [[u_k/g_{k-1} + lam g_k, -g_k/g_{k-1}], [1, 0]].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .brackets import FMState, StructureFunctions, _flat, canonical_bracket, det_gradients, fm_map
from .curves import CurveState, compute_invariants
from .errors import DegeneracyCrossing, DegenerateInvariant, SolverFailure
from .flows import FlowCoefficients, curve_velocity, g_dot, u_dot

log = logging.getLogger(__name__)


def toda_vector_field_ab(s: FMState) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side of the first Toda flow in (a, b)."""
    if s.n < 2:
        raise ValueError("the Toda field needs at least two sites")
    a, b = s.a, s.b
    return a * (b - np.roll(b, -1)), np.roll(a, 1) - a


def h2_gradient(s: FMState) -> np.ndarray:
    """Gradient of ``sum(b**2/2 + a)`` in the ``(a, b)`` ordering."""
    return np.concatenate([np.ones(s.n), s.b])


def hamiltonian_vector_field(P: StructureFunctions, s: FMState, grad_H) -> np.ndarray:
    """``dz_i/dt = {z_i, H} = sum_j pi_ij dH/dz_j`` for the structure functions P."""
    pi, _ = P.tensor(s.a, s.b)
    return pi @ np.asarray(grad_H, dtype=float)


def fm_velocity(c: CurveState, f: FlowCoefficients) -> tuple[np.ndarray, np.ndarray]:
    """Motion of (a, b) induced by the curve flow f, by the chain rule through g and u."""
    inv = compute_invariants(c)
    inv.require_g()
    g, u = inv.g, inv.u
    gm = np.roll(g, 1)
    gd, ud = g_dot(inv, f), u_dot(inv, f)
    beta = u / (gm * g)
    adot = -2.0 * gd / g**3
    bdot = ud / (gm * g) - beta * (np.roll(gd, 1) / gm + gd / g)
    return adot, bdot


def _shift_matrix(n, s):
    # (_shift_matrix(n, s) @ v)[k] == v[(k + s) % n]
    return np.roll(np.eye(n), s, axis=1)


def flow_response_matrix(c: CurveState) -> np.ndarray:
    """The linear map (alpha, beta) -> (da/dt, db/dt) as a 2N x 2N matrix.

    Assembled in closed form from the g- and u-derivative formulas; see
    :func:`flow_response_matrix_columns` for the column-by-column version.
    """
    n = c.n
    inv = compute_invariants(c)
    inv.require_g()
    inv.require_u()
    g, u = inv.g, inv.u
    gm, gmm, gp = np.roll(g, 1), np.roll(g, 2), np.roll(g, -1)
    um, up = np.roll(u, 1), np.roll(u, -1)
    I, Sp, Sm = np.eye(n), _shift_matrix(n, 1), _shift_matrix(n, -1)
    Dg = np.hstack([g[:, None] * (I + Sp), Sp - I])
    c_prev = g * (gmm + gm) / (um * gm) - u / gm
    c_next = u / g - gm * (g + gp) / (up * g)
    Du = np.hstack([u[:, None] * (Sm + Sp), c_prev[:, None] * Sm + c_next[:, None] * Sp])
    beta = u / (gm * g)
    Da = (-2.0 / g**3)[:, None] * Dg
    Db = Du / (gm * g)[:, None] - (beta / gm)[:, None] * (Sm @ Dg) - (beta / g)[:, None] * Dg
    return np.vstack([Da, Db])


def flow_response_matrix_columns(c: CurveState) -> np.ndarray:
    """Same matrix as :func:`flow_response_matrix`, one unit flow at a time."""
    n = c.n
    cols = []
    for j in range(2 * n):
        e = np.zeros(2 * n)
        e[j] = 1.0
        cols.append(np.concatenate(fm_velocity(c, FlowCoefficients.from_vector(e))))
    return np.column_stack(cols)


@dataclass
class TodaFlowSolution:
    flow: FlowCoefficients
    rank: int
    residual: float
    rank_deficient: bool


def toda_flow_on_curve(c: CurveState, lam: float = 0.0, tol: float = 1e-10,
                       full_output: bool = False):
    """Flow coefficients moving the curve along the first Toda flow.

    The response matrix has a kernel (the infinitesimal SL(2) motions of the
    curve leave a and b unchanged), so the minimum-norm least-squares
    solution is returned and its rank is reported with ``full_output``.

    Raises
    ------
    SolverFailure
        If the relative residual exceeds ``tol``.
    """
    s = fm_map(c, lam)
    target = np.concatenate(toda_vector_field_ab(s))
    A = flow_response_matrix(c)
    w, _, rank, sv = np.linalg.lstsq(A, target, rcond=1e-11)
    residual = float(np.abs(A @ w - target).max() / max(1.0, np.abs(target).max()))
    if not np.isfinite(residual) or residual > tol:
        raise SolverFailure(f"Toda flow system residual {residual:.3g} > {tol:.3g} (rank {rank})")
    sol = TodaFlowSolution(FlowCoefficients.from_vector(w), int(rank), residual,
                           bool(rank < 2 * c.n))
    return sol if full_output else sol.flow


def ab_field(s: FMState) -> np.ndarray:
    return np.concatenate(toda_vector_field_ab(s))


def curve_field(lam: float = 0.0):
    """Vector field on curve coordinates that realises the Toda flow."""

    def field(c: CurveState) -> np.ndarray:
        v = curve_velocity(c, toda_flow_on_curve(c, lam))
        return np.concatenate([v[:, 0], v[:, 1]])

    return field


# ---------------------------------------------------------------------------
# integration


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    invariant_log: np.ndarray | None = None

    def vectors(self) -> np.ndarray:
        """Snapshots packed as rows (curve coordinates or ``(a, b)``)."""
        return np.array([_pack(s) for s in self.states])


def _pack(state):
    if isinstance(state, CurveState):
        return state.coords
    if isinstance(state, FMState):
        return state.as_vector()
    raise TypeError(f"cannot integrate a {type(state).__name__}")


def _unpack(z, like):
    if isinstance(like, CurveState):
        return CurveState.from_coords(z, like.twist)
    return FMState.from_vector(z, like.lam)


def _check(state, t):
    if isinstance(state, CurveState):
        if not np.all(np.isfinite(state.coords)) or not state.is_generic():
            raise DegeneracyCrossing(f"curve became degenerate at t={t:.6g}", t)
    elif not (np.all(np.isfinite(state.as_vector())) and np.all(state.a > 0)):
        raise DegeneracyCrossing(f"a_k left (0, inf) at t={t:.6g}", t)


def integrate(state, field, t_end: float, dt: float, invariants=None) -> Trajectory:
    """Fixed-step classical RK4 from t = 0 to ``t_end``.

    Parameters
    ----------
    state : CurveState or FMState
    field : callable
        Maps a state to its time derivative, packed like the state
        (``coords`` for curves, ``as_vector()`` for FM states).
    t_end, dt : float
        Snapshots are taken at ``0, dt, 2 dt, ...`` up to ``floor(t_end/dt)`` steps.
    invariants : callable, optional
        Evaluated on every snapshot and stored in ``invariant_log``.

    Raises
    ------
    DegeneracyCrossing
        If a stage state is degenerate or the field cannot be evaluated.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    steps = int(np.floor(t_end / dt + 1e-9))
    times = dt * np.arange(steps + 1)
    z = _pack(state)

    def f(zz, t):
        st = _unpack(zz, state)
        _check(st, t)
        try:
            return np.asarray(field(st), dtype=float)
        except (DegenerateInvariant, SolverFailure) as exc:
            raise DegeneracyCrossing(f"field failed at t={t:.6g}: {exc}", t) from exc

    states = [state]
    for i in range(steps):
        t = times[i]
        k1 = f(z, t)
        k2 = f(z + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = f(z + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = f(z + dt * k3, t + dt)
        z = z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        st = _unpack(z, state)
        _check(st, times[i + 1])
        states.append(st)
    log_ = None
    if invariants is not None:
        log_ = np.array([np.atleast_1d(invariants(s)) for s in states])
    return Trajectory(times, states, log_)


def convergence_order(state, field, t_end: float, dt: float) -> float:
    """Observed order from endpoints at dt, dt/2, dt/4 (three-grid Richardson)."""
    ends = [_pack(integrate(state, field, t_end, h).states[-1]) for h in (dt, dt / 2, dt / 4)]
    e1 = np.abs(ends[0] - ends[1]).max()
    e2 = np.abs(ends[1] - ends[2]).max()
    return float(np.log2(e1 / e2))


# ---------------------------------------------------------------------------
# spectral invariants


def spectral_lax(c: CurveState, lam: float) -> np.ndarray:
    inv = compute_invariants(c)
    inv.require_g()
    g, u = inv.g, inv.u
    gm = np.roll(g, 1)
    L = np.zeros((c.n, 2, 2))
    L[:, 0, 0] = u / gm + lam * g
    L[:, 0, 1] = -g / gm
    L[:, 1, 0] = 1.0
    return L


def _trace_of_product(L):
    T = np.eye(2)
    for Lk in L:
        T = Lk @ T
    return float(np.trace(T))


def spectral_invariants(c: CurveState, lambdas) -> np.ndarray:
    """``tr T(lam)`` of the curve for every requested lam.

    At lam = 0 this is the trace of the ordinary monodromy, hence 2 on every
    closed curve.
    """
    return np.array([_trace_of_product(spectral_lax(c, lam)) for lam in np.atleast_1d(lambdas)])


def fm_spectral_invariants(s: FMState, lambdas, sign: float = 1.0) -> np.ndarray:
    """``tr T(lam)`` written in Flaschka-Manakov variables.

    Equals :func:`spectral_invariants` of a source curve when ``sign`` is the
    sign of ``prod(g_k)``; the lam argument is measured from the lam = 0 part
    of b, independently of ``s.lam``.
    """
    beta, a = s.beta, s.a
    prefactor = sign * np.prod(a ** -0.5)
    out = []
    for lam in np.atleast_1d(lambdas):
        T = np.eye(2)
        for k in range(s.n):
            T = np.array([[beta[k] + lam, -a[k - 1]], [1.0, 0.0]]) @ T
        out.append(prefactor * np.trace(T))
    return np.array(out)


def spectral_gradient(c: CurveState, lam: float) -> np.ndarray:
    """Exact gradient of ``tr T(lam)`` on the curve phase space (flat, x block then y block)."""
    inv = compute_invariants(c)
    g, u = inv.g, inv.u
    gm = np.roll(g, 1)
    L = spectral_lax(c, lam)
    n = c.n
    pre = [np.eye(2)]
    for k in range(n - 1):
        pre.append(L[k] @ pre[-1])
    suf = [np.eye(2)] * n
    for k in range(n - 2, -1, -1):
        suf[k] = suf[k + 1] @ L[k + 1]
    dg, du = (_flat(d) for d in det_gradients(c))
    dgm = np.roll(dg, 1, axis=0)
    grad = np.zeros(2 * n)
    for k in range(n):
        R = pre[k] @ suf[k]
        dL11 = du[k] / gm[k] - u[k] * dgm[k] / gm[k] ** 2 + lam * dg[k]
        dL12 = -dg[k] / gm[k] + g[k] * dgm[k] / gm[k] ** 2
        grad += R[0, 0] * dL11 + R[1, 0] * dL12
    return grad


def trace_bracket(c: CurveState, lam: float, mu: float) -> float:
    """Canonical bracket ``{tr T(lam), tr T(mu)}`` on the curve phase space."""
    return canonical_bracket(spectral_gradient(c, lam), spectral_gradient(c, mu))


# ---------------------------------------------------------------------------
# two-route consistency


@dataclass
class ConsistencyReport:
    """Deviation between the curve route and the direct (a, b) route.

    ``max_deviation`` is the largest entrywise difference divided by
    ``max(1, |state|)``, over all snapshots.
    """

    max_deviation: float
    max_abs_deviation: float
    times: np.ndarray
    curve_route: np.ndarray
    ab_route: np.ndarray
    ranks: list = field(default_factory=list)


def consistency_check(c: CurveState, lam: float = 0.0, t_end: float = 1.0,
                      dt: float = 1e-3) -> ConsistencyReport:
    """Integrate the Toda flow on the curve and on (a, b) and compare after mapping."""
    ranks = []

    def tracked_field(cc):
        sol = toda_flow_on_curve(cc, lam, full_output=True)
        ranks.append(sol.rank)
        v = curve_velocity(cc, sol.flow)
        return np.concatenate([v[:, 0], v[:, 1]])

    curve_traj = integrate(c, tracked_field, t_end, dt)
    ab_traj = integrate(fm_map(c, lam), ab_field, t_end, dt)
    z_curve = np.array([fm_map(st, lam).as_vector() for st in curve_traj.states])
    z_ab = ab_traj.vectors()
    diff = np.abs(z_curve - z_ab)
    scale = np.maximum(1.0, np.abs(z_ab).max(axis=1, keepdims=True))
    if ranks and min(ranks) < 2 * c.n:
        log.info("Toda flow system rank-deficient (min rank %d of %d); used minimum-norm solution",
                 min(ranks), 2 * c.n)
    return ConsistencyReport(float((diff / scale).max()), float(diff.max()), curve_traj.times,
                             z_curve, z_ab, sorted(set(ranks)))
