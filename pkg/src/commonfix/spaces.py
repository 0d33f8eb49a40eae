"""Finite-dimensional l_p geometry: norms, distance to a set, nearest points
and the Hausdorff metric on compact sets.

Sets come in three flavours.  ``Interval`` and ``Polytope`` (convex hull of a
vertex list) are the compact convex sets used as values of KC-valued maps and
as domains; ``FinitePointSet`` stands for a general closed bounded set.

Polytope Hausdorff distance uses a vertex shortcut: for a convex set ``B`` the
function ``a -> dist(a, B)`` is convex, so its supremum over ``conv(A)`` is
attained at a vertex of ``A``.  The one-sided deviation is therefore a finite
maximum over the vertex list, and the symmetrised value is exact up to the
projection tolerance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import linprog

from . import kernels

INF = math.inf
TOL = 1e-9
PROJECTION_BUDGET = 10_000


def parse_exponent(p) -> float:
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        p = float(p)
    p = float(p)
    if not (p >= 1.0):
        raise ValueError(f"exponent p must lie in [1, inf], got {p}")
    return p


@dataclass(frozen=True)
class NormedSpace:
    """R^dimension with the l_p norm; ``p = math.inf`` is the max norm."""

    dimension: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dimension}")
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "p", parse_exponent(self.p))

    @property
    def strictly_convex(self) -> bool:
        # the unit sphere of the real line is {-1, 1}: no segments for any p
        return self.dimension == 1 or 1.0 < self.p < INF

    def norm(self, x) -> float:
        return norm(self, x)

    def to_dict(self):
        return {"dimension": self.dimension, "p": "inf" if self.p == INF else self.p}


def as_point(x, dimension: int | None = None) -> np.ndarray:
    """Coerce a scalar or sequence to a finite float vector."""
    a = np.atleast_1d(np.asarray(x, dtype=np.float64)).ravel()
    if dimension is not None and a.shape[0] != dimension:
        raise ValueError(f"dimension mismatch: point has {a.shape[0]} coordinates, expected {dimension}")
    if not np.all(np.isfinite(a)):
        raise ValueError("point coordinates must be finite")
    return a


def _lp(v: np.ndarray, p: float) -> float:
    v = np.abs(v)
    if p == INF:
        return float(v.max()) if v.size else 0.0
    if p == 1.0:
        return float(v.sum())
    if p == 2.0:
        return float(np.sqrt(np.dot(v, v)))
    return float((v ** p).sum() ** (1.0 / p))


def norm(space: NormedSpace, x) -> float:
    return _lp(as_point(x, space.dimension), space.p)


# ---------------------------------------------------------------------------
# sets
# ---------------------------------------------------------------------------


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


class CompactSet:
    """Common interface of the three set representations."""

    dimension: int
    convex: bool

    @property
    def vertices(self) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def grid(self, n: int) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def to_literal(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_literal()})"


@dataclass(frozen=True, eq=False, repr=False)
class Interval(CompactSet):
    lo: float
    hi: float
    dimension: int = field(default=1, init=False)
    convex: bool = field(default=True, init=False)

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("interval endpoints must be finite")
        if lo > hi:
            raise ValueError(f"interval needs lo <= hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def vertices(self):
        return np.array([[self.lo], [self.hi]])

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def grid(self, n):
        return np.linspace(self.lo, self.hi, max(int(n), 1) if self.hi > self.lo else 1)[:, None]

    def sample(self, rng, k):
        return rng.uniform(self.lo, self.hi, size=(k, 1))

    def to_literal(self):
        return {"interval": [self.lo, self.hi]}

    def __eq__(self, other):
        return isinstance(other, Interval) and (self.lo, self.hi) == (other.lo, other.hi)

    def __hash__(self):
        return hash((self.lo, self.hi))


@dataclass(frozen=True, eq=False, repr=False)
class Polytope(CompactSet):
    """Convex hull of a nonempty vertex list (rows of ``vertices``)."""

    points: np.ndarray
    convex: bool = field(default=True, init=False)

    def __post_init__(self):
        v = np.array(self.points, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("polytope needs a nonempty list of vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("polytope vertices must be finite")
        object.__setattr__(self, "points", _frozen(v))

    @property
    def dimension(self):
        return self.points.shape[1]

    @property
    def vertices(self):
        return self.points

    def grid(self, n):
        """Barycentric lattice of the vertex weights, at most ``n`` nodes when possible."""
        m = self.points.shape[0]
        if m == 1:
            return self.points.copy()
        level = 1
        while comb(level + 1 + m - 1, m - 1) <= max(n, m):
            level += 1
        nodes = []
        for combo in itertools.combinations_with_replacement(range(m), level):
            w = np.bincount(combo, minlength=m) / level
            nodes.append(w @ self.points)
        return np.unique(np.round(np.array(nodes), 15), axis=0)

    def sample(self, rng, k):
        w = rng.dirichlet(np.ones(self.points.shape[0]), size=k)
        return w @ self.points

    def to_literal(self):
        return {"polytope": self.points.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class FinitePointSet(CompactSet):
    points: np.ndarray
    convex: bool = field(default=False, init=False)

    def __post_init__(self):
        v = np.array(self.points, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("point set must be nonempty")
        if not np.all(np.isfinite(v)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", _frozen(v))

    @property
    def dimension(self):
        return self.points.shape[1]

    @property
    def vertices(self):
        return self.points

    def grid(self, n):
        return self.points.copy()

    def sample(self, rng, k):
        return self.points[rng.integers(0, self.points.shape[0], size=k)]

    def to_literal(self):
        return {"points": self.points.tolist()}


def set_from_literal(obj) -> CompactSet:
    """Parse ``{"interval": [lo, hi]}``, ``{"polytope": [[..], ..]}`` or ``{"points": [[..], ..]}``."""
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("set literal must be an object with exactly one of 'interval', 'polytope', 'points'")
    (kind, val), = obj.items()
    if kind == "interval":
        if not isinstance(val, (list, tuple)) or len(val) != 2:
            raise ValueError("'interval' needs [lo, hi]")
        return Interval(val[0], val[1])
    if kind == "polytope":
        return Polytope(val)
    if kind == "points":
        return FinitePointSet(val)
    raise ValueError(f"unknown set kind {kind!r}")


def as_interval(S: CompactSet) -> Interval:
    """View a one-dimensional convex set as an interval."""
    if isinstance(S, Interval):
        return S
    if S.dimension != 1 or not S.convex:
        raise ValueError("only one-dimensional convex sets are intervals")
    return Interval(S.vertices.min(), S.vertices.max())


def _check_dim(space: NormedSpace, *objs):
    for o in objs:
        d = o.dimension if isinstance(o, CompactSet) else np.asarray(o).size
        if d != space.dimension:
            raise ValueError(f"dimension mismatch: {d} vs space dimension {space.dimension}")


# ---------------------------------------------------------------------------
# nearest points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NearestPoint:
    point: np.ndarray
    distance: float
    unique: bool
    weights: np.ndarray | None = None


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _start_weights(V, x, start):
    m = V.shape[0]
    if start is None or start == "vertex":
        w = np.zeros(m)
        w[int(np.argmin(((V - x) ** 2).sum(axis=1)))] = 1.0
        return w
    if start == "centroid":
        return np.full(m, 1.0 / m)
    w = np.asarray(start, dtype=np.float64)
    if w.shape != (m,):
        raise ValueError("start weights must have one entry per vertex")
    return project_simplex(w)


def _frank_wolfe_l2(V, x, w, tol=TOL, budget=PROJECTION_BUDGET):
    """Away-step Frank-Wolfe with exact line search on 0.5*|Vw - x|^2 over the simplex."""
    w = w.copy()
    p = w @ V
    for _ in range(budget):
        r = p - x
        g = V @ r
        s = int(np.argmin(g))
        gap_fw = float(r @ (p - V[s]))
        if gap_fw <= tol * tol:
            break
        active = np.nonzero(w > 0)[0]
        a = int(active[np.argmax(g[active])])
        gap_aw = float(r @ (V[a] - p))
        if gap_fw >= gap_aw:
            d = V[s] - p
            gmax = 1.0
            fw = True
        else:
            d = p - V[a]
            gmax = w[a] / (1.0 - w[a]) if w[a] < 1.0 else np.inf
            fw = False
        dd = float(d @ d)
        if dd == 0.0:
            break
        gamma = min(max(-float(r @ d) / dd, 0.0), gmax)
        if gamma == 0.0:
            break
        if fw:
            w *= 1.0 - gamma
            w[s] += gamma
        else:
            w *= 1.0 + gamma
            w[a] -= gamma
            if gamma == gmax:
                w[a] = 0.0
        p_new = w @ V
        if np.array_equal(p_new, p):
            break
        p = p_new
    return w


def _projected_gradient_lp(V, x, w, p_exp, tol=TOL, budget=PROJECTION_BUDGET):
    """Projected gradient with backtracking on |Vw - x|_p over the simplex, 1 < p < inf."""

    def f(w):
        return _lp(w @ V - x, p_exp)

    w = w.copy()
    fw = f(w)
    step = 1.0
    for _ in range(budget):
        if fw == 0.0:
            break
        r = w @ V - x
        a = np.abs(r)
        g_pt = np.sign(r) * (a / fw) ** (p_exp - 1.0)
        grad = V @ g_pt
        while True:
            w_new = project_simplex(w - step * grad)
            dw = w_new - w
            f_new = f(w_new)
            if f_new <= fw + grad @ dw + (dw @ dw) / (2.0 * step) or step < 1e-18:
                break
            step *= 0.5
        moved = float(np.abs(dw @ V).max()) if dw.any() else 0.0
        if f_new <= fw:
            w, fw_prev, fw = w_new, fw, f_new
        else:
            break
        step *= 2.0
        if moved <= tol * 1e-4 or fw_prev - fw <= 1e-17 * max(fw, 1.0):
            break
    return w


def _lp_projection_linprog(V, x, p_exp, distance_only=False):
    """Exact projection for p in {1, inf} by linear programming.

    Returns ``(weights, distance, unique)``: uniqueness is decided by
    maximising and minimising each coordinate over the optimal face, and the
    weights are the lexicographically smallest optimal weight vector.
    """
    m, d = V.shape
    # variables: w (m), then u (d) for p=1 or a single s for p=inf
    nu = d if p_exp == 1.0 else 1
    n = m + nu
    A_ub, b_ub = [], []
    for k in range(d):
        u_col = np.zeros(nu)
        u_col[k if p_exp == 1.0 else 0] = -1.0
        A_ub.append(np.concatenate([V[:, k], u_col]))
        b_ub.append(x[k])
        A_ub.append(np.concatenate([-V[:, k], u_col]))
        b_ub.append(-x[k])
    A_ub, b_ub = np.array(A_ub), np.array(b_ub)
    A_eq = np.concatenate([np.ones(m), np.zeros(nu)])[None, :]
    b_eq = np.array([1.0])
    bounds = [(0, None)] * n
    obj = np.concatenate([np.zeros(m), np.ones(nu)])

    def solve(c, A, b):
        res = linprog(c, A_ub=A, b_ub=b, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
        if res.status != 0:
            raise RuntimeError(f"projection LP failed: {res.message}")
        return res

    best = solve(obj, A_ub, b_ub)
    dist = float(best.fun)
    if distance_only:
        return best.x[:m], dist, None
    slack = 1e-9 * max(1.0, dist)
    A_opt = np.vstack([A_ub, obj])
    b_opt = np.concatenate([b_ub, [dist + slack]])

    spread = 0.0
    for k in range(d):
        c = np.concatenate([V[:, k], np.zeros(nu)])
        lo = solve(c, A_opt, b_opt).fun
        hi = -solve(-c, A_opt, b_opt).fun
        spread = max(spread, hi - lo)
    unique = spread <= 1e-7 * max(1.0, float(np.abs(V).max()))

    # lexicographic tie-break on the weights, on a much tighter optimal face;
    # the slack is widened when it falls below the solver's feasibility tolerance
    w = None
    for slack in (1e-12, 1e-10, 1e-9):
        try:
            w = _lex_weights(solve, A_opt, np.concatenate([b_ub, [dist + slack * max(1.0, dist)]]), m, n, slack)
            break
        except RuntimeError:
            continue
    if w is None:
        w = best.x[:m]
    w = np.where(w < 1e-10, 0.0, w)
    return w / w.sum(), dist, unique


def _lex_weights(solve, A, b, m, n, slack):
    w = None
    for i in range(m):
        c = np.zeros(n)
        c[i] = 1.0
        res = solve(c, A, b)
        w = res.x[:m]
        A = np.vstack([A, c])
        b = np.concatenate([b, [res.fun + slack]])
    return w


def nearest_point(space: NormedSpace, x, S: CompactSet, start=None) -> NearestPoint:
    """Nearest point of the convex set ``S`` to ``x``.

    Intervals clamp exactly.  Polytopes use away-step Frank-Wolfe for p=2,
    projected gradient on the vertex weights for other p in (1, inf), and
    linear programming for p in {1, inf}, where minimisers need not be
    unique; ``unique`` reports what was found and the returned point then
    comes from the lexicographically smallest optimal weight vector.
    ``start`` selects the initial weights ("vertex", "centroid" or an array).
    """
    if not S.convex:
        raise ValueError("nearest_point needs a convex set (Interval or Polytope)")
    _check_dim(space, S)
    x = as_point(x, space.dimension)
    if space.dimension == 1:
        I = as_interval(S)
        y = np.array([min(max(x[0], I.lo), I.hi)])
        return NearestPoint(y, abs(x[0] - y[0]), True)
    V = np.asarray(S.vertices, dtype=np.float64)
    if V.shape[0] == 1:
        return NearestPoint(V[0].copy(), _lp(x - V[0], space.p), True, np.ones(1))
    p = space.p
    if p in (1.0, INF):
        w, _, unique = _lp_projection_linprog(V, x, p)
    else:
        w0 = _start_weights(V, x, start)
        if p == 2.0:
            w = _frank_wolfe_l2(V, x, w0)
        else:
            w = _projected_gradient_lp(V, x, w0, p)
        unique = True
    y = w @ V
    return NearestPoint(y, _lp(x - y, p), unique, w)


def distance_point_set(space: NormedSpace, x, S: CompactSet) -> float:
    """dist(x, S) = inf over s in S of |x - s|_p."""
    _check_dim(space, S)
    x = as_point(x, space.dimension)
    if isinstance(S, FinitePointSet):
        return float(kernels.row_norms(S.points - x, space.p).min())
    if space.dimension > 1 and space.p in (1.0, INF) and S.vertices.shape[0] > 1:
        return _lp_projection_linprog(np.asarray(S.vertices, dtype=np.float64), x, space.p, True)[1]
    return nearest_point(space, x, S).distance


def contains(space: NormedSpace, x, S: CompactSet, tol: float = TOL) -> bool:
    x = as_point(x, space.dimension)
    if isinstance(S, Interval):
        return S.lo - tol <= x[0] <= S.hi + tol
    if isinstance(S, FinitePointSet):
        return distance_point_set(space, x, S) <= tol
    if space.dimension == 1:
        return contains(space, x, as_interval(S), tol)
    # membership does not depend on the norm; the Euclidean projection is the cheapest
    euclid = NormedSpace(space.dimension, 2.0)
    return _lp(x - nearest_point(euclid, x, S).point, space.p) <= tol


# ---------------------------------------------------------------------------
# Hausdorff metric
# ---------------------------------------------------------------------------


def _deviation_interval_from_points(I: Interval, pts: np.ndarray) -> float:
    """sup over a in I of the distance from a to the nearest of the 1-d points."""
    q = np.sort(pts.ravel())
    cands = [I.lo, I.hi]
    mids = 0.5 * (q[:-1] + q[1:])
    cands.extend(m for m in mids if I.lo <= m <= I.hi)
    c = np.array(cands)
    return float(np.abs(c[:, None] - q[None, :]).min(axis=1).max())


def _deviation(space: NormedSpace, A: CompactSet, B: CompactSet) -> float:
    """sup over a in A of dist(a, B)."""
    if B.convex:
        return max(distance_point_set(space, v, B) for v in A.vertices)
    if not A.convex:
        return kernels.directed_hausdorff(A.points, B.points, space.p)
    if space.dimension == 1:
        return _deviation_interval_from_points(as_interval(A), B.points)
    raise NotImplementedError("deviation of a polytope from a finite point set is only implemented on the real line")


def hausdorff(space: NormedSpace, A: CompactSet, B: CompactSet) -> float:
    """H(A, B) = max(sup_{a in A} dist(a, B), sup_{b in B} dist(b, A))."""
    _check_dim(space, A, B)
    if A is B:
        return 0.0
    if space.dimension == 1 and A.convex and B.convex:
        a, b = as_interval(A), as_interval(B)
        return max(abs(a.lo - b.lo), abs(a.hi - b.hi))
    return max(_deviation(space, A, B), _deviation(space, B, A))
