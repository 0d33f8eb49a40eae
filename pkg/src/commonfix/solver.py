"""Common fixed point ``z = t(z) in T(z)`` of a commuting pair.

``solve_common`` follows the constructive skeleton of the existence argument
for a single-valued ``t`` and a KC-valued ``T`` that both satisfy (E) and
(C_lambda) and commute:

1. approximate ``Fix(t)`` by Krasnoselskii runs from a grid of starts and
   replace it by the hull of the certified points (the *surrogate*);
2. check that ``T(x)`` meets the surrogate for sampled ``x`` in it;
3. run the multivalued iteration inside the surrogate (selections nearest to
   the previous selection, moved into ``T(x_n) ∩ Fix(t)`` when they drift);
4. take the asymptotic center of that outer sequence relative to the
   surrogate;
5. run the multivalued iteration again from a center point, with selections
   kept in ``T(z_n) ∩ center`` whenever that intersection is nonempty;
6. certify the limit against both residuals.

Every "belongs to Fix(t)" step of the argument becomes a distance bound to
the surrogate with a factor-10 tolerance.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .asymptotic import AsymptoticResult, asymptotic_radius_center
from .conditions import PairSample, check_Clambda, check_E, minimal_mu
from .iteration import (
    DEFAULT_BUDGET,
    DEFAULT_TOL,
    FixSetApproximation,
    IterationTrace,
    approximate_fix_set,
    krasnoselskii_multi,
)
from .maps import MultiValuedMap, SingleValuedMap
from .spaces import (
    TOL,
    CompactSet,
    Interval,
    NormedSpace,
    Polytope,
    as_interval,
    as_point,
    contains,
    distance_point_set,
    nearest_point,
    norm,
)

COMMUTE_TOL = 1e-8


class SolverAbort(RuntimeError):
    """A hypothesis of the construction failed; ``witness`` says where."""

    stage = "unknown"

    def __init__(self, message, witness=None, report=None):
        super().__init__(message)
        self.witness = witness
        self.report = report

    def to_dict(self):
        return {"status": "aborted", "stage": self.stage, "message": str(self),
                "witness": self.witness,
                "report": self.report.to_dict() if hasattr(self.report, "to_dict") else self.report}


class CommutingFailure(SolverAbort):
    stage = "commuting"


class FixSetFailure(SolverAbort):
    stage = "fixed_point_set"


class IntersectionFailure(SolverAbort):
    stage = "intersection"


# ---------------------------------------------------------------------------
# commuting check
# ---------------------------------------------------------------------------


@dataclass
class CommutingReport:
    satisfied: bool
    checked: int
    skipped: int
    violations: list
    sample: dict

    def to_dict(self):
        return dict(self.__dict__)


def _sample_domain(D, size, seed, extra=()):
    rng = np.random.default_rng(seed)
    half = max(1, size // 2)
    pts = [D.grid(half), D.sample(rng, max(0, size - half)).reshape(-1, D.dimension)]
    pts += [np.atleast_2d(e) for e in extra]
    return np.vstack(pts)


def check_commuting(t: SingleValuedMap, T: MultiValuedMap, D: CompactSet | None = None, size: int = 200,
                    seed: int = 0, grid: int = 21, space: NormedSpace | None = None) -> CommutingReport:
    """Sampled check that ``x in T(y)`` and ``t(y) in D`` imply ``t(x) in T(t(y))``.

    ``y`` runs over a grid plus seeded random points of D (and the maps'
    exception points); ``x`` over the vertices and a grid of ``T(y)``.
    """
    D = D or t.domain
    space = space or NormedSpace(D.dimension)
    ys = _sample_domain(D, size, seed, [*t.exception_points, *T.exception_points])
    checked = skipped = 0
    violations = []
    for y in ys:
        ty = np.asarray(t.rule.apply(y), dtype=float)
        if not contains(space, ty, D, TOL):
            skipped += 1
            continue
        S = T.rule.apply(y)
        T_ty = T.rule.apply(ty)
        xs = np.vstack([S.vertices, S.grid(grid)])
        # T maps into D, so every x of T(y) is a valid argument of t
        for x in np.unique(xs, axis=0):
            tx = np.asarray(t.rule.apply(x), dtype=float)
            d = distance_point_set(space, tx, T_ty)
            checked += 1
            if d > COMMUTE_TOL:
                violations.append({"y": y.tolist(), "x": x.tolist(), "tx": tx.tolist(), "ty": ty.tolist(),
                                   "T_ty": T_ty.to_literal(), "distance": float(d)})
    return CommutingReport(not violations, checked, skipped, violations,
                           {"size": int(ys.shape[0]), "seed": seed, "grid": grid})


# ---------------------------------------------------------------------------
# problem and result
# ---------------------------------------------------------------------------


@dataclass
class CommonFixedPointProblem:
    space: NormedSpace
    domain: CompactSet
    t: SingleValuedMap
    T: MultiValuedMap
    lam: float
    eps: float = DEFAULT_TOL
    window: int | None = None
    resolution: float = 1e-4
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    n_starts: int = 11
    commuting_sample: int = 200
    x0: object = None
    mu: float | None = None
    fix_step: float | None = None
    check_hypotheses: bool = True

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if not self.domain.convex:
            raise ValueError("the domain must be convex")
        for f in (self.t, self.T):
            if f.domain.to_literal() != self.domain.to_literal():
                raise ValueError(f"map {f.name} is defined on {f.domain.to_literal()}, not on the problem domain")
            if f.dimension != self.space.dimension:
                raise ValueError("dimension mismatch between maps and space")
        if self.t.multivalued or not self.T.multivalued:
            raise ValueError("t must be single-valued and T multivalued")


@dataclass
class CommonFixedPointResult:
    z: np.ndarray
    residual_t: float
    residual_T: float
    certified: bool
    eps: float
    outer: IterationTrace
    inner: IterationTrace
    commuting: CommutingReport
    fix_set: FixSetApproximation
    surrogate: CompactSet
    center: AsymptoticResult
    hypotheses: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def verify(self, problem: CommonFixedPointProblem):
        """Independent re-evaluation of both residuals."""
        rt = norm(problem.space, self.z - problem.t(self.z))
        rT = distance_point_set(problem.space, self.z, problem.T(self.z))
        return rt, rT

    def to_dict(self):
        return {
            "status": "certified" if self.certified else "non-certified",
            "z": self.z.tolist(),
            "residual_t": self.residual_t,
            "residual_T": self.residual_T,
            "eps": self.eps,
            "commuting": self.commuting.to_dict(),
            "hypotheses": self.hypotheses,
            "fix_set": self.fix_set.to_dict(),
            "fix_surrogate": self.surrogate.to_literal(),
            "asymptotic_center": self.center.to_dict(),
            "outer": self.outer.to_dict(),
            "inner": self.inner.to_dict(),
            "diagnostics": self.diagnostics,
        }


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------


def _hull(points: np.ndarray) -> CompactSet:
    if points.shape[1] == 1:
        return Interval(points[:, 0].min(), points[:, 0].max())
    return Polytope(np.unique(points, axis=0))


def _intersection(A: CompactSet, B: CompactSet):
    """Exact intersection of two intervals, or None when empty or not 1-d."""
    if A.dimension != 1 or not (A.convex and B.convex):
        return None
    a, b = as_interval(A), as_interval(B)
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    return Interval(lo, hi) if lo <= hi else None


def _gap(space, S: CompactSet, F: CompactSet, grid=21) -> float:
    """Distance between the sets, computed on a grid of S (exact for intervals)."""
    if S.dimension == 1 and S.convex and F.convex:
        s, f = as_interval(S), as_interval(F)
        return max(0.0, f.lo - s.hi, s.lo - f.hi)
    cands = np.vstack([S.vertices, S.grid(grid)])
    return min(distance_point_set(space, c, F) for c in cands)


def _hypotheses(problem):
    out = {}
    for f in (problem.t, problem.T):
        slow = f.multivalued and not f.interval_valued
        sample = PairSample.build(f.domain, n=21 if slow else 201, k=200 if slow else 10_000,
                                  seed=problem.seed, include=f.exception_points)
        cl = check_Clambda(f, problem.lam, sample, problem.space)
        mu = problem.mu
        if mu is None:
            mu = minimal_mu(f, sample, problem.space)[0]
        e = check_E(f, mu, sample, problem.space)
        out[f.name] = {"C_lambda": cl.satisfied, "mu": mu, "E": e.satisfied}
        if not cl.satisfied:
            warnings.warn(f"{f.name} violates (C_lambda) at lambda={problem.lam} on the default sample: {cl.worst}")
        if not e.satisfied:
            warnings.warn(f"{f.name} violates (E_mu) at mu={mu} on the default sample: {e.worst}")
    return out


class _Selector:
    """Moves selections into ``T(x) ∩ target`` (falling back to ``T(x) ∩ Fix``) and logs the drift."""

    def __init__(self, space, fix, eps, target=None):
        self.space, self.fix, self.eps, self.target = space, fix, eps, target
        self.max_drift = 0.0
        self.fallbacks = 0

    def _into(self, anchor, S, y, F):
        inter = _intersection(S, F)
        if inter is not None:
            return nearest_point(self.space, anchor, inter).point
        if S.dimension == 1:
            return None
        # general position: nearest point of the surrogate to the selection
        q = nearest_point(self.space, y, F).point
        return q if distance_point_set(self.space, q, S) <= 10 * self.eps else None

    def __call__(self, anchor, S, y):
        if self.target is not None:
            if distance_point_set(self.space, y, self.target) <= self.eps:
                return y
            q = self._into(anchor, S, y, self.target)
            if q is not None:
                self.max_drift = max(self.max_drift, norm(self.space, q - y))
                return q
            self.fallbacks += 1
        drift = distance_point_set(self.space, y, self.fix)
        if drift <= self.eps:
            return y
        q = self._into(anchor, S, y, self.fix)
        if q is None:
            return y
        self.max_drift = max(self.max_drift, norm(self.space, q - y))
        return q


def _residuals(problem, z):
    return (norm(problem.space, z - problem.t.rule.apply(z)),
            distance_point_set(problem.space, z, problem.T.rule.apply(z)))


def solve_common(problem: CommonFixedPointProblem) -> CommonFixedPointResult:
    """Run the six-stage construction; raises ``SolverAbort`` when a hypothesis fails."""
    space, D, t, T, lam, eps = problem.space, problem.domain, problem.t, problem.T, problem.lam, problem.eps

    commuting = check_commuting(t, T, D, problem.commuting_sample, problem.seed, space=space)
    if not commuting.satisfied:
        w = commuting.violations[0]
        raise CommutingFailure(f"t and T do not commute: x={w['x']} in T(y={w['y']}) but t(x)={w['tx']} "
                               f"is at distance {w['distance']:.3g} from T(t(y))", w, commuting)
    hyp = _hypotheses(problem) if problem.check_hypotheses else {}

    # (1) fixed points of t
    starts = np.unique(np.vstack([D.grid(problem.n_starts), D.vertices]), axis=0)
    fix = approximate_fix_set(t, starts, problem.fix_step or lam, eps / 10.0, problem.budget, space)
    if fix.empty:
        raise FixSetFailure("no Krasnoselskii run for t converged", {"starts": starts.tolist()}, fix)
    F = _hull(fix.points)

    # (2) T(x) meets Fix(t) for x in Fix(t)
    worst_gap, worst_x = 0.0, None
    for x in np.unique(np.vstack([F.grid(21), F.vertices]), axis=0):
        g = _gap(space, T.rule.apply(x), F)
        if g > worst_gap:
            worst_gap, worst_x = g, x
    if worst_gap > 10 * eps:
        raise IntersectionFailure(f"T(x) misses the fixed-point set of t by {worst_gap:.3g}",
                                  {"x": worst_x.tolist(), "gap": worst_gap})

    # (3) outer sequence in Fix(t)
    if problem.x0 is not None:
        x0 = nearest_point(space, as_point(problem.x0, space.dimension), F).point
    else:
        x0 = F.vertices.mean(axis=0)
    outer_sel = _Selector(space, F, eps)
    outer = krasnoselskii_multi(T, x0, lam, "paper", eps, problem.budget, space, restrict=outer_sel)

    # (4) asymptotic center of the outer sequence relative to Fix(t)
    center = asymptotic_radius_center(space, outer.points, F, problem.window, problem.resolution)
    A = _hull(center.centers)

    # (5) inner sequence from a center point, (6) certification
    def inner_run(z0):
        sel = _Selector(space, F, eps, target=A)
        tr = krasnoselskii_multi(T, z0, lam, "paper", eps, problem.budget, space, restrict=sel)
        return tr, sel

    inner, inner_sel = inner_run(center.center)
    rt, rT = _residuals(problem, inner.final)
    restarts = 0
    if max(rt, rT) > eps:
        restarts = 1
        cands = center.centers
        far = cands[int(np.argmax([norm(space, c - center.center) for c in cands]))]
        alt = far if norm(space, far - center.center) > 0 else outer.final
        inner2, sel2 = inner_run(alt)
        rt2, rT2 = _residuals(problem, inner2.final)
        if max(rt2, rT2) < max(rt, rT):
            inner, inner_sel, rt, rT = inner2, sel2, rt2, rT2
    z = inner.final.copy()
    diagnostics = {
        "intersection_gap": worst_gap,
        "outer_projection_drift": outer_sel.max_drift,
        "inner_projection_drift": inner_sel.max_drift,
        "inner_center_fallbacks": inner_sel.fallbacks,
        "distance_to_fix_surrogate": float(distance_point_set(space, z, F)),
        "restarts": restarts,
    }
    return CommonFixedPointResult(z, rt, rT, max(rt, rT) <= eps, eps, outer, inner, commuting, fix, F,
                                  center, hyp, diagnostics)
