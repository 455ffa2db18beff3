"""Flaschka-Manakov variables and the Poisson brackets induced on them.

The curve phase space R^{2N} carries the ultralocal bracket
``{x_i, y_i} = 1/2`` (all other coordinate brackets vanish).  Through

    a_k = g_k**-2,    b_k = u_k / (g_{k-1} g_k) - lam

it induces brackets among the a_k, b_k.  For N > 3 these are local and
quadratic in lam.  Each coefficient of the polynomial is itself a Poisson
structure: P1 multiplies lam**2, P2 multiplies lam and P3 is the constant term.

Variables are ordered ``(a_0..a_{N-1}, b_0..b_{N-1})`` in every 2N x 2N table;
phase-space gradients are ordered ``(x_0..x_{N-1}, y_0..y_{N-1})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import CurveState, compute_invariants, lattice_neighbours, reconstruct_curve
from .errors import UnsupportedSize


@dataclass(frozen=True, eq=False)
class FMState:
    """Periodic Flaschka-Manakov variables at spectral parameter ``lam``."""

    a: np.ndarray
    b: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise ValueError("a and b must have the same length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def beta(self) -> np.ndarray:
        """The lam-independent part ``u_k / (g_{k-1} g_k) = b_k + lam``."""
        return self.b + self.lam

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    @classmethod
    def from_vector(cls, z, lam: float = 0.0) -> "FMState":
        z = np.asarray(z, dtype=float)
        n = z.size // 2
        return cls(z[:n], z[n:], lam)

    def at(self, lam: float) -> "FMState":
        """Same point of phase space described at another spectral parameter."""
        return FMState(self.a, self.beta - lam, lam)


def fm_map(c: CurveState, lam: float = 0.0) -> FMState:
    """Map a generic curve to its Flaschka-Manakov variables.

    Raises
    ------
    DegenerateInvariant
        If some ``|g_k|`` is below the degeneracy threshold.
    """
    inv = compute_invariants(c)
    inv.require_g()
    g, u = inv.g, inv.u
    return FMState(g**-2.0, u / (np.roll(g, 1) * g) - lam, lam)


# ---------------------------------------------------------------------------
# gradients on the curve phase space


def _perp(p):
    # gradient of det(p, q) with respect to p is (q_y, -q_x) = _perp(q)
    return np.stack([p[..., 1], -p[..., 0]], axis=-1)


@dataclass(frozen=True, eq=False)
class GradientTable:
    """Phase-space gradients of every a_k and b_k.

    ``da[k]`` and ``db[k]`` are 2N-vectors ordered ``(d/dx_0.., d/dy_0..)``.
    """

    da: np.ndarray
    db: np.ndarray

    @property
    def n(self) -> int:
        return self.da.shape[0]

    @property
    def stacked(self) -> np.ndarray:
        """All 2N gradients as rows, a's first."""
        return np.vstack([self.da, self.db])

    def of(self, label) -> np.ndarray:
        return self.stacked[label_index(label, self.n)]


def det_gradients(c: CurveState) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of g_k and u_k, each returned as an (N, N, 2) array.

    ``dg[k, i]`` is ``(dg_k/dx_i, dg_k/dy_i)``.  Twisted wrap-around
    neighbours contribute through the transpose of the twist.
    """
    n = c.n
    P = c.points
    prev, nxt = lattice_neighbours(c)
    M = np.eye(2) if c.twist is None else c.twist
    Minv = np.linalg.inv(M)
    dg = np.zeros((n, n, 2))
    du = np.zeros((n, n, 2))
    for k in range(n):
        kp, km = (k + 1) % n, (k - 1) % n
        to_next = M.T if k == n - 1 else np.eye(2)
        to_prev = Minv.T if k == 0 else np.eye(2)
        dg[k, k] += _perp(nxt[k])
        dg[k, kp] += to_next @ -_perp(P[k])
        du[k, km] += to_prev @ _perp(nxt[k])
        du[k, kp] += to_next @ -_perp(prev[k])
    return dg, du


def _flat(d):
    # (N, N, 2) -> (N, 2N) in (x block, y block) order
    return np.concatenate([d[..., 0], d[..., 1]], axis=1)


def fm_gradients(c: CurveState, lam: float = 0.0) -> GradientTable:
    """Exact chain-rule gradients of a_k and b_k in the curve coordinates.

    ``lam`` only shifts b by a constant and does not change the gradients;
    it is accepted for symmetry with :func:`fm_map`.
    """
    inv = compute_invariants(c)
    inv.require_g()
    g, u = inv.g, inv.u
    gm = np.roll(g, 1)
    beta = u / (gm * g)
    dg, du = det_gradients(c)
    dgm = np.roll(dg, 1, axis=0)
    da = (-2.0 * g**-3)[:, None, None] * dg
    db = (du / (gm * g)[:, None, None]
          - beta[:, None, None] * (dgm / gm[:, None, None] + dg / g[:, None, None]))
    return GradientTable(_flat(da), _flat(db))


def fd_gradients(c: CurveState, lam: float = 0.0, h: float = 1e-6) -> GradientTable:
    """Central-difference gradients of a_k, b_k (independent oracle)."""
    z0 = c.coords
    cols = []
    for i in range(z0.size):
        e = np.zeros_like(z0)
        e[i] = h
        hi = fm_map(CurveState.from_coords(z0 + e, c.twist), lam).as_vector()
        lo = fm_map(CurveState.from_coords(z0 - e, c.twist), lam).as_vector()
        cols.append((hi - lo) / (2.0 * h))
    J = np.column_stack(cols)
    return GradientTable(J[: c.n], J[c.n:])


def canonical_bracket(F_grad, G_grad) -> float:
    """``{F, G} = 1/2 sum_i (F_x_i G_y_i - F_y_i G_x_i)`` from flat 2N gradients."""
    F = np.asarray(F_grad, dtype=float)
    G = np.asarray(G_grad, dtype=float)
    n = F.size // 2
    return 0.5 * float(F[:n] @ G[n:] - F[n:] @ G[:n])


def canonical_bracket_matrix(A, B=None) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise canonical brackets between rows of A and rows of B.

    Returns ``(values, magnitude)`` where ``magnitude[i, j]`` is the
    Cauchy-Schwarz bound ``|A_i| |B_j| / 2`` on ``|values[i, j]|``.  It is the
    natural size of a pair and is used to normalise deviations of entries
    that cancel to zero.
    """
    A = np.atleast_2d(A)
    B = A if B is None else np.atleast_2d(B)
    n = A.shape[1] // 2
    Ax, Ay, Bx, By = A[:, :n], A[:, n:], B[:, :n], B[:, n:]
    vals = 0.5 * (Ax @ By.T - Ay @ Bx.T)
    mag = 0.5 * np.outer(np.linalg.norm(A, axis=1), np.linalg.norm(B, axis=1))
    return vals, mag


# ---------------------------------------------------------------------------
# labels and tables


def label_index(label, n: int) -> int:
    """Row of ``("a", i)``/``"a3"``-style labels in a 2N table (sites mod n)."""
    if isinstance(label, str):
        kind, idx = label[0], int(label[1:])
    else:
        kind, idx = label
    if kind == "a":
        return idx % n
    if kind == "b":
        return n + idx % n
    raise ValueError(f"bad variable label {label!r}")


def index_label(i: int, n: int) -> str:
    return f"a{i}" if i < n else f"b{i - n}"


@dataclass(frozen=True, eq=False)
class BracketTable:
    """All brackets ``{p, q}`` among the 2N variables ``(a_0.., b_0..)``.

    ``lam`` is the spectral parameter the table was evaluated at, or ``None``
    for a coefficient table of a lam-polynomial.  ``magnitude`` holds the
    gradient-norm bound for numerically computed tables.
    """

    values: np.ndarray
    lam: float | None = None
    magnitude: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0] // 2

    def __getitem__(self, pair) -> float:
        p, q = pair
        return float(self.values[label_index(p, self.n), label_index(q, self.n)])

    def antisymmetry_defect(self) -> float:
        return float(np.abs(self.values + self.values.T).max())


def numerical_bracket_table(c: CurveState, lam: float = 0.0, gradients: str = "analytic",
                            h: float = 1e-6) -> BracketTable:
    """Brackets of all a_k, b_k computed from the canonical bracket on the curve."""
    if gradients == "analytic":
        G = fm_gradients(c, lam)
    elif gradients == "fd":
        G = fd_gradients(c, lam, h)
    else:
        raise ValueError(f"unknown gradient mode {gradients!r}")
    vals, mag = canonical_bracket_matrix(G.stacked)
    return BracketTable(vals, lam, mag)


# ---------------------------------------------------------------------------
# closed-form structure functions


def _require_size(n):
    if n <= 3:
        raise UnsupportedSize(
            f"closed-form bracket relations need N > 3 sites (got N={n})")


def _entries(a, b, degree):
    """Yield ``(i, j, value, {var: partial})`` for the upper relations of one table.

    ``degree`` selects the lam**2 (P1), lam (P2) or lam**0 (P3) coefficient.
    Variable indices are positions in the 2N vector.
    """
    n = a.size
    A = lambda k: k % n          # noqa: E731
    B = lambda k: n + k % n      # noqa: E731
    for k in range(n):
        kp, km, kmm = (k + 1) % n, (k - 1) % n, (k - 2) % n
        ak, akp, akm, akmm = a[k], a[kp], a[km], a[kmm]
        bk, bkp = b[k], b[kp]
        if degree == 1:
            yield B(k), A(km), akm, {A(km): 1.0}
            yield B(k), A(k), -ak, {A(k): -1.0}
        elif degree == 2:
            yield A(k), A(kp), -2 * ak * akp, {A(k): -2 * akp, A(kp): -2 * ak}
            yield B(k), B(kp), -2 * ak, {A(k): -2.0}
            yield B(k), A(km), 2 * bk * akm, {B(k): 2 * akm, A(km): 2 * bk}
            yield B(k), A(k), -2 * bk * ak, {B(k): -2 * ak, A(k): -2 * bk}
        elif degree == 3:
            yield (A(k), A(kp), -2 * ak * akp * bkp,
                   {A(k): -2 * akp * bkp, A(kp): -2 * ak * bkp, B(kp): -2 * ak * akp})
            yield (B(k), B(kp), -ak * (bk + bkp),
                   {A(k): -(bk + bkp), B(k): -ak, B(kp): -ak})
            yield B(k), A(kmm), akmm * akm, {A(kmm): akm, A(km): akmm}
            yield (B(k), A(km), akm * (bk**2 + akm),
                   {A(km): bk**2 + 2 * akm, B(k): 2 * bk * akm})
            yield (B(k), A(k), -ak * (bk**2 + ak),
                   {A(k): -bk**2 - 2 * ak, B(k): -2 * bk * ak})
            yield B(k), A(kp), -ak * akp, {A(k): -akp, A(kp): -ak}
        else:
            raise ValueError(f"degree must be 1, 2 or 3, not {degree}")


@dataclass(frozen=True)
class StructureFunctions:
    """A linear combination ``w1 P1 + w2 P2 + w3 P3`` of the three Toda brackets.

    P1 is linear in (a, b), P2 quadratic and P3 cubic.  The full bracket at
    spectral parameter lam is ``P3 + lam P2 + lam**2 P1``, see
    :func:`full_bracket`.
    """

    weights: tuple[float, float, float]

    def __add__(self, other):
        return StructureFunctions(tuple(x + y for x, y in zip(self.weights, other.weights)))

    def __rmul__(self, t):
        return StructureFunctions(tuple(t * w for w in self.weights))

    __mul__ = __rmul__

    def tensor(self, a, b) -> tuple[np.ndarray, np.ndarray]:
        """Poisson tensor ``pi[i, j]`` and its derivatives ``dpi[i, j, l] = d pi[i, j] / d z_l``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        n = a.size
        _require_size(n)
        pi = np.zeros((2 * n, 2 * n))
        dpi = np.zeros((2 * n, 2 * n, 2 * n))
        for degree, w in zip((1, 2, 3), self.weights):
            if w == 0:
                continue
            for i, j, val, grad in _entries(a, b, degree):
                pi[i, j] += w * val
                pi[j, i] -= w * val
                for l, d in grad.items():
                    dpi[i, j, l] += w * d
                    dpi[j, i, l] -= w * d
        return pi, dpi

    def table(self, s: FMState) -> BracketTable:
        return BracketTable(self.tensor(s.a, s.b)[0], None)


P1 = StructureFunctions((1.0, 0.0, 0.0))
P2 = StructureFunctions((0.0, 1.0, 0.0))
P3 = StructureFunctions((0.0, 0.0, 1.0))


def full_bracket(lam: float) -> StructureFunctions:
    """``P3 + lam P2 + lam**2 P1``: the induced bracket written in (a, b) at ``lam``."""
    return StructureFunctions((lam * lam, lam, 1.0))


def closed_form_table(s: FMState) -> BracketTable:
    """All closed-form brackets at the state ``s`` (at its own ``s.lam``)."""
    return BracketTable(full_bracket(s.lam).tensor(s.a, s.b)[0], s.lam)


def closed_form_bracket(s: FMState, p, q) -> float:
    """Closed-form value of ``{p, q}``; pairs outside the listed relations give 0.

    Raises
    ------
    UnsupportedSize
        For N <= 3, where the relations overlap.
    """
    _require_size(s.n)
    return closed_form_table(s)[p, q]


def _relative(diff, scale):
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(diff == 0, 0.0, diff / scale)
    return np.where(np.isnan(rel), np.inf, rel)


@dataclass
class BracketCheckReport:
    max_abs: float
    max_rel: float
    worst_pair: tuple[str, str]
    tol: float
    passed: bool


def verify_theorem2(c: CurveState, lam: float = 0.0, tol: float = 1e-9,
                    gradients: str = "analytic", h: float = 1e-6) -> BracketCheckReport:
    """Compare the canonical-bracket table with the closed forms, pair by pair.

    The relative deviation of an entry is its absolute deviation divided by
    the larger of the closed-form value and the gradient-norm bound of the
    pair, so pairs that cancel to zero are measured against the size of the
    gradients involved.
    """
    _require_size(c.n)
    num = numerical_bracket_table(c, lam, gradients, h)
    cf = closed_form_table(fm_map(c, lam))
    diff = np.abs(num.values - cf.values)
    rel = _relative(diff, np.maximum(np.abs(cf.values), num.magnitude))
    i, j = np.unravel_index(np.argmax(rel), rel.shape)
    n = c.n
    max_rel = float(rel.max())
    return BracketCheckReport(float(diff.max()), max_rel, (index_label(i, n), index_label(j, n)),
                          tol, bool(max_rel < tol))


# ---------------------------------------------------------------------------
# lam-grading


def realize_state(c: CurveState, beta_shift: float) -> CurveState:
    """A curve with the same a and with ``u/(g_{k-1} g_k)`` raised by ``beta_shift``.

    Shifting beta usually leaves the image of closed curves, so the result is
    a twisted curve ``gamma_{k+N} = M gamma_k`` with M in SL(2), rebuilt from
    the first two points of ``c`` by the three-term recursion.
    """
    inv = compute_invariants(c)
    inv.require_g()
    g = inv.g
    beta = inv.u / (np.roll(g, 1) * g)
    u_new = (beta + beta_shift) * np.roll(g, 1) * g
    pts = c.points
    P = reconstruct_curve(g, u_new, pts[0], pts[1 % c.n], c.n + 1)
    # M [gamma_0 gamma_1] = [gamma_N gamma_{N+1}], points as columns
    M = P[c.n:c.n + 2].T @ np.linalg.inv(P[:2].T)
    return CurveState.from_points(P[: c.n], twist=M)


@dataclass
class GradedBrackets:
    """Coefficient tables of the induced bracket as a quadratic in lam.

    ``P1``, ``P2``, ``P3`` are the fitted lam**2, lam**1, lam**0 coefficients
    at ``state`` (b taken at lam = 0).  ``deviation`` compares each against
    its closed form; ``reconstruction_deviation`` checks the fit at
    ``check_lambda``.
    """

    state: FMState
    P1: BracketTable
    P2: BracketTable
    P3: BracketTable
    deviation: dict = field(default_factory=dict)
    reconstruction_deviation: float = 0.0
    tol: float = 1e-9
    passed: bool = False

    def at(self, lam: float) -> np.ndarray:
        return self.P3.values + lam * self.P2.values + lam**2 * self.P1.values


def lambda_grade(c: CurveState, tol: float = 1e-9, lambdas=(0.0, 1.0, -1.0),
                 check_lambda: float = 2.0) -> GradedBrackets:
    """Split the induced bracket at the state ``fm_map(c, 0)`` into powers of lam.

    For each sample lam the bracket is evaluated numerically on a curve whose
    Flaschka-Manakov variables at that lam equal the fixed state, then every
    entry is fitted by the quadratic through the samples.
    """
    _require_size(c.n)
    s = fm_map(c, 0.0)
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size != 3 or np.unique(lambdas).size != 3:
        raise ValueError("need three distinct sample values of lam")
    samples, mags = [], []
    for lam in lambdas:
        t = numerical_bracket_table(realize_state(c, lam) if lam else c, lam)
        samples.append(t.values)
        mags.append(t.magnitude)
    vander = np.vander(lambdas, 3)  # columns lam**2, lam, 1
    coef = np.linalg.solve(vander, np.stack(samples).reshape(3, -1)).reshape(3, *samples[0].shape)
    scale = np.max(mags, axis=0)
    deviation = {}
    tables = []
    for name, P, fit in zip(("P1", "P2", "P3"), (P1, P2, P3), coef):
        cf = P.tensor(s.a, s.b)[0]
        diff = np.abs(fit - cf)
        deviation[name] = float(_relative(diff, np.maximum(np.abs(cf), scale)).max())
        tables.append(BracketTable(fit, None))
    check = numerical_bracket_table(realize_state(c, check_lambda), check_lambda)
    recon = coef[0] * check_lambda**2 + coef[1] * check_lambda + coef[2]
    rdiff = np.abs(check.values - recon)
    recon_dev = float(_relative(rdiff, np.maximum(np.abs(check.values), check.magnitude + scale)).max())
    ok = max(deviation.values()) < tol and recon_dev < tol
    return GradedBrackets(s, *tables, deviation=deviation, reconstruction_deviation=recon_dev,
                          tol=tol, passed=bool(ok))


# ---------------------------------------------------------------------------
# Jacobi identity


def jacobi_tensor(P: StructureFunctions, s: FMState) -> np.ndarray:
    """Jacobiator ``J[i, j, k] = {z_i, {z_j, z_k}} + cyclic`` on coordinate functions."""
    pi, dpi = P.tensor(s.a, s.b)
    t = np.einsum("il,jkl->ijk", pi, dpi)
    return t + t.transpose(1, 2, 0) + t.transpose(2, 0, 1)


def jacobi_residual(P: StructureFunctions, s: FMState, trials: int | None = None,
                    seed: int = 0) -> float:
    """Largest Jacobi-identity defect over coordinate triples.

    With ``trials=None`` every triple is checked; otherwise ``trials`` triples
    are drawn with the given seed.
    """
    J = jacobi_tensor(P, s)
    if trials is None:
        return float(np.abs(J).max())
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, J.shape[0], size=(trials, 3))
    return float(np.abs(J[idx[:, 0], idx[:, 1], idx[:, 2]]).max())
