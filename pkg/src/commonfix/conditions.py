"""Sampled verification of (C), (C_lambda), (E_mu) and nonexpansiveness.

The conditions quantify over every pair of the domain; here they are checked
on a deterministic ``PairSample``: the full product of an n-point grid (with
the map's exception points added as nodes) plus k seeded random pairs.

Premises are compared exactly (``<=``, no tolerance).  A consequent counts as
violated only when ``lhs > rhs + 1e-12`` so that floating-point noise on the
boundary of a condition never produces a false witness.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .maps import Map
from .spaces import NormedSpace, as_point, distance_point_set, hausdorff, norm

MARGIN = 1e-12
MAX_GRID_PAIRS = 100_000


@dataclass(frozen=True, eq=False)
class PairSample:
    """Ordered pairs ``(points[I[k]], points[J[k]])`` drawn from a domain."""

    points: np.ndarray
    I: np.ndarray
    J: np.ndarray
    n: int = 0
    k: int = 0
    seed: int | None = None
    grid_nodes: int = 0

    @classmethod
    def build(cls, domain, n=201, k=10_000, seed=0, include=(), max_grid_pairs=MAX_GRID_PAIRS):
        extra = [as_point(e, domain.dimension) for e in include]
        while True:
            grid = domain.grid(n)
            if extra:
                grid = np.unique(np.vstack([grid, *extra]), axis=0)
            if grid.shape[0] ** 2 <= max_grid_pairs or n <= 2:
                break
            n = int(np.floor(np.sqrt(max_grid_pairs))) - len(extra) if n > np.sqrt(max_grid_pairs) else n - 1
        g = grid.shape[0]
        gi, gj = np.meshgrid(np.arange(g), np.arange(g), indexing="ij")
        rng = np.random.default_rng(seed)
        rand = domain.sample(rng, 2 * k).reshape(2 * k, domain.dimension)
        points = np.vstack([grid, rand])
        ri = g + 2 * np.arange(k)
        I = np.concatenate([gi.ravel(), ri])
        J = np.concatenate([gj.ravel(), ri + 1])
        return cls(points, I, J, n, k, seed, g)

    @classmethod
    def from_points(cls, points):
        """All ordered pairs of an explicit point list."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[0] == 1 and points.shape[1] > 1:
            points = points.T
        g = points.shape[0]
        gi, gj = np.meshgrid(np.arange(g), np.arange(g), indexing="ij")
        return cls(points, gi.ravel(), gj.ravel(), g, 0, None, g)

    @property
    def size(self) -> int:
        return int(self.I.shape[0])

    def describe(self) -> dict:
        return {"grid_n": self.n, "grid_nodes": self.grid_nodes, "random_pairs": self.k,
                "seed": self.seed, "pairs": self.size}


def default_sample(f: Map, n=201, k=10_000, seed=0) -> PairSample:
    return PairSample.build(f.domain, n=n, k=k, seed=seed, include=f.exception_points)


@dataclass(frozen=True)
class Witness:
    x: list
    y: list
    lhs: float
    rhs: float

    @property
    def excess(self) -> float:
        return self.lhs - self.rhs


@dataclass
class ConditionReport:
    condition: str
    flavor: str
    parameter: float | None
    sample: dict
    satisfied: bool
    violations: list = field(default_factory=list)
    violation_count: int = 0
    vacuous: bool = False
    estimate: float | None = None
    worst: Witness | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        return d


# ---------------------------------------------------------------------------
# per-pair quantities
# ---------------------------------------------------------------------------


def _space_for(f: Map, space: NormedSpace | None) -> NormedSpace:
    space = space or NormedSpace(f.dimension, 2.0)
    if space.dimension != f.dimension:
        raise ValueError("dimension mismatch between space and map")
    return space


def pair_quantities(f: Map, sample: PairSample, space: NormedSpace):
    """Residual of the first point and the three pair distances used by every check.

    Returns ``(res, dxy, dimg, dx_img)`` where, for pair (x, y),
    ``res = dist(x, Tx)``, ``dxy = |x - y|``, ``dimg = |Tx - Ty|`` (Hausdorff
    for multivalued maps) and ``dx_img = dist(x, Ty)``.
    """
    X = sample.points
    I, J = sample.I, sample.J
    if not f.multivalued:
        TX = f.images(X)
        res_pt = kernels.row_norms(X - TX, space.p)
        dxy, dimg, dxi = kernels.pair_terms_single(X, TX, I, J, space.p)
    elif f.interval_valued:
        x = X[:, 0]
        lo, hi = f.interval_images(x)
        res_pt = np.maximum(np.maximum(lo - x, x - hi), 0.0)
        dxy, dimg, dxi = kernels.pair_terms_interval(x, lo, hi, I, J)
    else:
        imgs = [f.rule.apply(x) for x in X]
        res_pt = np.array([distance_point_set(space, x, S) for x, S in zip(X, imgs)])
        m = sample.size
        dxy, dimg, dxi = np.empty(m), np.empty(m), np.empty(m)
        for k in range(m):
            i, j = I[k], J[k]
            dxy[k] = norm(space, X[i] - X[j])
            dimg[k] = hausdorff(space, imgs[i], imgs[j])
            dxi[k] = distance_point_set(space, X[i], imgs[j])
    return res_pt[I], dxy, dimg, dxi


def _report(cond, f, param, sample, mask, lhs, rhs, vacuous=False, estimate=None, max_witnesses=10_000):
    X = sample.points
    idx = np.nonzero(mask)[0]
    worst = None
    if idx.size:
        # lexicographic order on (x, y)
        keys = [X[sample.J[idx], c] for c in range(X.shape[1] - 1, -1, -1)]
        keys += [X[sample.I[idx], c] for c in range(X.shape[1] - 1, -1, -1)]
        idx = idx[np.lexsort(keys)]
        w = idx[int(np.argmax(lhs[idx] - rhs[idx]))]
        worst = _witness(sample, w, lhs, rhs)
    violations = [_witness(sample, k, lhs, rhs) for k in idx[:max_witnesses]]
    return ConditionReport(
        condition=cond,
        flavor="multi" if f.multivalued else "single",
        parameter=None if param is None else float(param),
        sample=sample.describe(),
        satisfied=idx.size == 0,
        violations=violations,
        violation_count=int(idx.size),
        vacuous=bool(vacuous),
        estimate=estimate,
        worst=worst,
    )


def _witness(sample, k, lhs, rhs):
    return Witness(sample.points[sample.I[k]].tolist(), sample.points[sample.J[k]].tolist(),
                   float(lhs[k]), float(rhs[k]))


def _conditional(cond, f, lam, sample, space):
    space = _space_for(f, space)
    sample = sample if sample is not None else default_sample(f)
    res, dxy, dimg, _ = pair_quantities(f, sample, space)
    premise = lam * res <= dxy
    mask = premise & (dimg > dxy + MARGIN)
    vacuous = sample.size == 0 or not np.any(res > 0)
    return _report(cond, f, lam, sample, mask, dimg, dxy, vacuous)


# ---------------------------------------------------------------------------
# public checks
# ---------------------------------------------------------------------------


def check_Clambda(f: Map, lam: float, sample: PairSample | None = None, space: NormedSpace | None = None) -> ConditionReport:
    """lam * dist(x, Tx) <= |x - y|  implies  H(Tx, Ty) <= |x - y|."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    return _conditional("C_lambda", f, lam, sample, space)


def check_C(f: Map, sample: PairSample | None = None, space: NormedSpace | None = None) -> ConditionReport:
    """Suzuki's condition (C), i.e. (C_lambda) at lambda = 1/2."""
    return _conditional("C", f, 0.5, sample, space)


check_C_single = check_C


def check_E(f: Map, mu: float, sample: PairSample | None = None, space: NormedSpace | None = None) -> ConditionReport:
    """dist(x, Ty) <= mu * dist(x, Tx) + |x - y| for every sampled pair."""
    if not mu >= 1.0:
        raise ValueError(f"mu must be >= 1, got {mu}")
    space = _space_for(f, space)
    sample = sample if sample is not None else default_sample(f)
    res, dxy, _, dxi = pair_quantities(f, sample, space)
    rhs = mu * res + dxy
    return _report("E_mu", f, mu, sample, dxi > rhs + MARGIN, dxi, rhs, sample.size == 0)


def check_nonexpansive(f: Map, sample: PairSample | None = None, space: NormedSpace | None = None) -> ConditionReport:
    space = _space_for(f, space)
    sample = sample if sample is not None else default_sample(f)
    _, dxy, dimg, _ = pair_quantities(f, sample, space)
    return _report("nonexpansive", f, None, sample, dimg > dxy + MARGIN, dimg, dxy, sample.size == 0)


def minimal_mu(f: Map, sample: PairSample | None = None, space: NormedSpace | None = None):
    """Sample estimate of the smallest mu for (E_mu): a lower bound on the true value.

    Returns ``(mu, witness)``; ``witness`` is None when no sampled pair has
    ``dist(x, Tx) > 0`` (the supremum is vacuous and the floor 1 applies).
    """
    space = _space_for(f, space)
    sample = sample if sample is not None else default_sample(f)
    res, dxy, _, dxi = pair_quantities(f, sample, space)
    live = np.nonzero(res > 0)[0]
    if live.size == 0:
        return 1.0, None
    ratio = (dxi[live] - dxy[live]) / res[live]
    k = live[int(np.argmax(ratio))]
    mu = max(1.0, float(ratio.max()))
    return mu, _witness(sample, k, dxi, dxy + mu * res)


def mu_report(f: Map, sample: PairSample | None = None, space: NormedSpace | None = None) -> ConditionReport:
    """minimal_mu packaged as a report (always satisfied; the estimate is the payload)."""
    sample = sample if sample is not None else default_sample(f)
    mu, w = minimal_mu(f, sample, space)
    return ConditionReport("minimal_mu", "multi" if f.multivalued else "single", None, sample.describe(),
                           True, [], 0, w is None, mu, w)


def monotonicity_probe(f: Map, lam1: float, lam2: float, sample: PairSample | None = None,
                       space: NormedSpace | None = None) -> bool:
    """True when satisfaction at lam1 implies satisfaction at lam2 on the same sample."""
    if not 0.0 < lam1 < lam2 < 1.0:
        raise ValueError("need 0 < lam1 < lam2 < 1")
    sample = sample if sample is not None else default_sample(f)
    if not check_Clambda(f, lam1, sample, space).satisfied:
        return True
    return check_Clambda(f, lam2, sample, space).satisfied


def reevaluate(f: Map, report: ConditionReport, w: Witness, space: NormedSpace | None = None):
    """Recompute ``(lhs, rhs)`` of a witness from scratch, outside the kernels."""
    space = _space_for(f, space)
    x, y = as_point(w.x), as_point(w.y)
    if f.multivalued:
        Tx, Ty = f(x), f(y)
        res = distance_point_set(space, x, Tx)
        dimg = hausdorff(space, Tx, Ty)
        dxi = distance_point_set(space, x, Ty)
    else:
        Tx, Ty = f(x), f(y)
        res = norm(space, x - Tx)
        dimg = norm(space, Tx - Ty)
        dxi = norm(space, x - Ty)
    dxy = norm(space, x - y)
    if report.condition == "E_mu":
        return dxi, report.parameter * res + dxy
    if report.condition == "minimal_mu":
        return dxi, dxy + report.estimate * res
    return dimg, dxy
