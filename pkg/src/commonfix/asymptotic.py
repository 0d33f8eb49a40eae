"""Asymptotic radius and center of a sequence relative to a convex set.

For a bounded sequence and a set D the asymptotic radius is
``inf_{c in D} limsup_n |x_n - c|`` and the center is the set of minimisers.
A limsup over an infinite sequence is not computable, so it is replaced by
the maximum over the last ``W`` terms (``maxTail``).  For a sequence that
converges to ``x*`` the surrogate is off by at most the tail oscillation
``max_{n > N-W} |x_n - x_N|``.

On the real line maxTail is convex in ``c``; it is scanned on a grid and then
refined by golden-section search.  On polytopes the weights of the vertex
combination are optimised by projected subgradient steps from every vertex
and from the centroid, followed by an exact epigraph solve (a linear program
for p in {1, inf}, SLSQP otherwise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from . import kernels
from .spaces import INF, CompactSet, NormedSpace, as_interval, project_simplex

CENTER_TOL = 1e-6
SUBGRADIENT_BUDGET = 10_000
MAX_GRID = 2_000_000


@dataclass
class AsymptoticResult:
    radius: float
    center: np.ndarray
    centers: np.ndarray
    window: int
    resolution: float
    center_tol: float

    @property
    def diameter(self) -> float:
        c = self.centers
        if c.shape[0] < 2:
            return 0.0
        return float(np.abs(c[:, None, :] - c[None, :, :]).max())

    def to_dict(self):
        return {
            "radius": self.radius,
            "center": self.center.tolist(),
            "centers": self.centers.tolist(),
            "window": self.window,
            "resolution": self.resolution,
            "center_tol": self.center_tol,
        }


def _sequence(seq, dimension):
    a = np.asarray(seq, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] == 0:
        raise ValueError("empty sequence")
    if a.shape[1] != dimension:
        raise ValueError(f"dimension mismatch: sequence has {a.shape[1]} coordinates, space {dimension}")
    return a


def default_window(length: int) -> int:
    return max(1, min(64, length // 2))


def max_tail(space: NormedSpace, tail: np.ndarray, C) -> np.ndarray:
    """maxTail at each row of ``C``."""
    return kernels.tail_max_distance(np.atleast_2d(C), tail, space.p)


def _golden(f, a, b, tol=1e-9):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    probes = []
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    probes += [(c, fc), (d, fd)]
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
            probes.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
            probes.append((d, fd))
    return probes


def _center_interval(space, tail, I, resolution):
    if I.hi == I.lo:
        xs = np.array([I.lo])
    else:
        n = min(MAX_GRID, int(math.ceil(I.length / resolution)) + 1)
        xs = np.linspace(I.lo, I.hi, n)
    vals = max_tail(space, tail, xs[:, None])
    k = int(np.argmin(vals))
    probes = list(zip(xs, vals))
    if xs.size > 1:
        a = xs[max(k - 1, 0)]
        b = xs[min(k + 1, xs.size - 1)]
        probes += _golden(lambda c: float(max_tail(space, tail, [[c]])[0]), a, b)
    pts = np.array([p for p, _ in probes])[:, None]
    return pts, np.array([v for _, v in probes])


def _subgradient(space, tail, V, w, budget):
    diam = float(np.ptp(np.vstack([V, tail]), axis=0).max()) or 1.0
    best_w, best_f = w.copy(), math.inf
    for k in range(budget):
        c = w @ V
        diffs = c - tail
        d = kernels.row_norms(diffs, space.p)
        j = int(np.argmax(d))
        f = float(d[j])
        if f < best_f:
            best_f, best_w = f, w.copy()
        if f == 0.0:
            break
        r = diffs[j]
        if space.p == INF:
            g = np.zeros_like(r)
            i = int(np.argmax(np.abs(r)))
            g[i] = np.sign(r[i])
        elif space.p == 1.0:
            g = np.sign(r)
        else:
            g = np.sign(r) * (np.abs(r) / f) ** (space.p - 1.0)
        gw = V @ g
        nrm = float(np.linalg.norm(gw))
        if nrm == 0.0:
            break
        w = project_simplex(w - (0.5 * diam / math.sqrt(k + 1.0)) * gw / nrm)
    return best_w, best_f


def _epigraph(space, tail, V, w0):
    """min s subject to |x_n - Vw|_p <= s over the tail, w in the simplex."""
    m, d = V.shape
    W = tail.shape[0]
    p = space.p
    if p in (1.0, INF):
        # variables: w (m), s, plus u (W*d) for p = 1
        nu = W * d if p == 1.0 else 0
        n = m + 1 + nu
        rows, rhs = [], []
        for t in range(W):
            for k in range(d):
                for sign in (1.0, -1.0):
                    row = np.zeros(n)
                    row[:m] = sign * V[:, k]
                    if p == INF:
                        row[m] = -1.0
                    else:
                        row[m + 1 + t * d + k] = -1.0
                    rows.append(row)
                    rhs.append(sign * tail[t, k])
            if p == 1.0:
                row = np.zeros(n)
                row[m + 1 + t * d:m + 1 + (t + 1) * d] = 1.0
                row[m] = -1.0
                rows.append(row)
                rhs.append(0.0)
        c = np.zeros(n)
        c[m] = 1.0
        A_eq = np.zeros((1, n))
        A_eq[0, :m] = 1.0
        res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=A_eq, b_eq=[1.0],
                      bounds=[(0, None)] * n, method="highs")
        if res.status != 0:
            return None
        w = np.clip(res.x[:m], 0.0, None)
        return w / w.sum()

    def obj(z):
        return z[-1]

    def cons(z):
        return z[-1] - kernels.row_norms(z[:-1] @ V - tail, p)

    z0 = np.concatenate([w0, [float(max_tail(space, tail, (w0 @ V)[None, :])[0])]])
    res = minimize(obj, z0, method="SLSQP",
                   constraints=[{"type": "ineq", "fun": cons},
                                {"type": "eq", "fun": lambda z: z[:-1].sum() - 1.0}],
                   bounds=[(0.0, 1.0)] * m + [(0.0, None)],
                   options={"maxiter": 500, "ftol": 1e-14})
    return project_simplex(res.x[:-1])


def _center_polytope(space, tail, V, budget):
    m = V.shape[0]
    starts = [np.eye(m)[i] for i in range(m)] + [np.full(m, 1.0 / m)]
    per_start = max(1, budget // len(starts))
    cands = []
    for w in starts:
        bw, _ = _subgradient(space, tail, V, w, per_start)
        cands.append(bw)
    vals = [float(max_tail(space, tail, (w @ V)[None, :])[0]) for w in cands]
    polished = _epigraph(space, tail, V, cands[int(np.argmin(vals))])
    if polished is not None:
        cands.append(polished)
    pts = np.array([w @ V for w in cands])
    return pts, max_tail(space, tail, pts)


def asymptotic_radius_center(space: NormedSpace, sequence, D: CompactSet, W: int | None = None,
                             resolution: float = 1e-4, center_tol: float = CENTER_TOL,
                             budget: int = SUBGRADIENT_BUDGET) -> AsymptoticResult:
    """Radius and center of ``sequence`` relative to the convex set ``D``.

    The center set holds every probed point whose maxTail is within
    ``center_tol`` of the best value found.
    """
    if not D.convex:
        raise ValueError("the asymptotic center is computed relative to a convex set")
    seq = _sequence(sequence, space.dimension)
    if D.dimension != space.dimension:
        raise ValueError("dimension mismatch between D and the space")
    W = default_window(seq.shape[0]) if W is None else int(W)
    if not 1 <= W <= seq.shape[0]:
        raise ValueError(f"window W={W} must lie in [1, {seq.shape[0]}]")
    tail = np.ascontiguousarray(seq[-W:])
    if space.dimension == 1:
        pts, vals = _center_interval(space, tail, as_interval(D), resolution)
    else:
        pts, vals = _center_polytope(space, tail, np.asarray(D.vertices, dtype=float), budget)
    k = int(np.argmin(vals))
    r = float(vals[k])
    keep = vals <= r + center_tol
    centers = np.unique(pts[keep], axis=0)
    return AsymptoticResult(r, pts[k].copy(), centers, W, resolution, center_tol)


# ---------------------------------------------------------------------------
# regularity
# ---------------------------------------------------------------------------


@dataclass
class RegularityReport:
    base_radius: float
    radii: list
    max_deviation: float
    tolerance: float
    regular: bool
    subsequences: int
    note: str = "finite subsequences can refute regularity but never certify it"
    patterns: list = field(default_factory=list)

    def to_dict(self):
        return dict(self.__dict__)


def _pattern_indices(rng, N, max_period=8):
    q = int(rng.integers(1, max_period + 1))
    bits = rng.random(q) < 0.5
    if not bits.any():
        bits[int(rng.integers(0, q))] = True
    return np.nonzero(np.resize(bits, N))[0], bits.astype(int).tolist()


def regularity_probe(space: NormedSpace, sequence, D: CompactSet, K: int = 16, seed: int = 0,
                     W: int | None = None, resolution: float = 1e-4, subsequences=None,
                     max_retries: int = 100) -> RegularityReport:
    """Compare the asymptotic radius of the sequence with that of subsequences.

    ``K`` random subsequences follow periodic keep/drop patterns (period 1..8,
    each slot kept with probability 1/2), mimicking infinite subsequences;
    ``subsequences`` adds explicit index lists.  Each needs at least ``W``
    terms; short draws are resampled up to ``max_retries`` times.  The
    verdict uses tolerance ``10*resolution``.

    A subsequence's limsup is read off the same stretch of the sequence as
    the base one: its window is the set of its terms among the last ``W``
    indices, so early terms never leak into the tail.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    seq = _sequence(sequence, space.dimension)
    N = seq.shape[0]
    W = default_window(N) if W is None else int(W)
    base = asymptotic_radius_center(space, seq, D, W, resolution).radius
    rng = np.random.default_rng(seed)
    radii, patterns = [], []

    def sub_radius(idx):
        w_sub = max(1, int(np.count_nonzero(idx >= N - W)))
        return asymptotic_radius_center(space, seq[idx], D, w_sub, resolution).radius

    for _ in range(K):
        for _attempt in range(max_retries):
            idx, bits = _pattern_indices(rng, N)
            if idx.size >= W:
                break
        else:
            raise RuntimeError(f"could not draw a subsequence with at least {W} terms in {max_retries} tries")
        radii.append(sub_radius(idx))
        patterns.append(bits)
    for idx in subsequences or []:
        idx = np.unique(np.asarray(idx, dtype=int))
        if idx.size < W:
            raise ValueError(f"explicit subsequence has {idx.size} < W={W} terms")
        radii.append(sub_radius(idx))
        patterns.append(None)
    tol = 10.0 * resolution
    dev = max((abs(r - base) for r in radii), default=0.0)
    return RegularityReport(base, radii, dev, tol, dev <= tol, len(radii), patterns=patterns)
