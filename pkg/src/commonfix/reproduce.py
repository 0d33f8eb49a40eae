"""Built-in suite of worked examples, run by ``commonfix reproduce-paper``.

Each criterion returns a ``CriterionResult`` with a pass flag and the numbers
it was judged on.  Iteration traces produced along the way are pooled and
checked against the Goebel-Kirk property at the end, so criterion 6 covers
every converged trace of the run.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .asymptotic import asymptotic_radius_center
from .conditions import (
    check_C,
    check_Clambda,
    check_E,
    check_nonexpansive,
    default_sample,
    minimal_mu,
    monotonicity_probe,
    reevaluate,
)
from .iteration import krasnoselskii_multi, krasnoselskii_single, trace_goebel_kirk
from .maps import (
    affine,
    constant_set,
    garcia_example,
    interval_scaling,
    multivalued_example,
    suzuki_example,
)
from .solver import CommonFixedPointProblem, CommutingFailure, solve_common
from .spaces import INF, Interval, NormedSpace, Polytope, hausdorff, nearest_point

GARCIA_LAMBDAS = (0.3, 0.5, 0.8)


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    seconds: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id}. {self.name} ({self.seconds:.2f} s)"

    def to_dict(self, timings=True):
        d = dict(self.__dict__)
        if not timings:
            d.pop("seconds")
        return d


@dataclass
class SuiteReport:
    results: list
    seconds: float
    traces: int

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def table(self) -> str:
        lines = [r.line() for r in self.results]
        lines.append(f"{sum(r.passed for r in self.results)}/{len(self.results)} passed in {self.seconds:.2f} s")
        return "\n".join(lines)

    def to_dict(self, timings=True):
        d = {"passed": self.passed, "traces_checked": self.traces,
             "criteria": [r.to_dict(timings) for r in self.results]}
        if timings:
            d["seconds"] = self.seconds
        return d


class _Pool:
    """Collects iteration traces for the Goebel-Kirk sweep."""

    def __init__(self):
        self.traces = []

    def add(self, label, trace):
        self.traces.append((label, trace))
        return trace


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def suzuki_criterion(pool, seed=0):
    f = suzuki_example()
    sample = default_sample(f, seed=seed)
    c = check_C(f, sample)
    ne = check_nonexpansive(f, sample)
    has_3 = bool(np.any(sample.points[:, 0] == 3.0))
    excess = ne.worst.excess if ne.worst else 0.0
    pool.add("suzuki from 3", krasnoselskii_single(f, 3.0, 0.5))
    ok = c.satisfied and c.violation_count == 0 and sample.size >= 10_000 and has_3 and not ne.satisfied and excess >= 0.9
    return ok, {"pairs": sample.size, "includes_3": has_3, "C_violations": c.violation_count,
                "nonexpansive_worst": [ne.worst.x, ne.worst.y] if ne.worst else None, "excess": excess}


def garcia_criterion(pool, seed=0):
    out, ok = {}, True
    for lam in GARCIA_LAMBDAS:
        f = garcia_example(lam)
        sample = default_sample(f, seed=seed)
        at = check_Clambda(f, lam, sample)
        below = check_Clambda(f, lam / 2, sample)
        again = check_Clambda(f, lam / 2, sample)
        at_one = [w for w in below.violations if w.x == [1.0]]
        reproducible = [(w.x, w.y) for w in below.violations] == [(w.x, w.y) for w in again.violations]
        if at_one:
            lhs, rhs = reevaluate(f, below, at_one[0])
            reproducible = reproducible and lhs > rhs
        mu, _ = minimal_mu(f, sample)
        target = (2.0 + lam) / 2.0
        pool.add(f"garcia {lam} from 1", krasnoselskii_single(f, 1.0, lam))
        good = at.satisfied and not below.satisfied and bool(at_one) and reproducible and abs(mu - target) <= 0.01
        ok = ok and good
        out[str(lam)] = {"C_lambda": at.satisfied, "C_half_lambda": below.satisfied,
                         "witness": [at_one[0].x, at_one[0].y] if at_one else None,
                         "mu": mu, "mu_target": target}
    return ok, out


def multivalued_criterion(pool, seed=0):
    T = multivalued_example()
    sample = default_sample(T, seed=seed)
    c = check_Clambda(T, 0.5, sample)
    # dist(x, Ty) - |x - y| <= dist(x, Tx) holds everywhere on [0, 5], so mu = 1
    e = check_E(T, 1.0, sample)
    ne = check_nonexpansive(T, sample)
    near5 = bool(ne.worst) and min(abs(ne.worst.x[0] - 5.0), abs(ne.worst.y[0] - 5.0)) <= 0.05
    # run at the default tolerance so the last iterate estimates the limit
    tr = pool.add("mv5 from 5", krasnoselskii_multi(T, 5.0, 0.5, "paper", budget=200))
    for x1 in (2.5, 0.7):
        for rule in ("paper", "to-x"):
            pool.add(f"mv5 from {x1} ({rule})", krasnoselskii_multi(T, x1, 0.5, rule, 1e-6, 200))
    hits = np.nonzero(tr.residuals <= 1e-6)[0]
    steps = int(hits[0]) if hits.size else None
    ok = (c.satisfied and e.satisfied and not ne.satisfied and near5 and steps is not None
          and steps <= 200 and abs(tr.final[0]) <= 1e-6)
    return ok, {"C_half": c.satisfied, "E_1": e.satisfied, "nonexpansive_worst": [ne.worst.x, ne.worst.y] if ne.worst else None,
                "steps": steps, "final_residual": float(tr.residuals[-1]), "limit": float(tr.final[0])}


def catalog_maps():
    maps = {"suzuki": suzuki_example(), "mv5": multivalued_example()}
    for lam in GARCIA_LAMBDAS:
        maps[f"garcia({lam})"] = garcia_example(lam)
    return maps


def monotonicity_criterion(pool, seed=0, pairs=10):
    rng = np.random.default_rng(seed)
    out, ok = {}, True
    for name, f in catalog_maps().items():
        sample = default_sample(f, seed=seed)
        fails = []
        for _ in range(pairs):
            lam1, lam2 = np.sort(rng.uniform(0.01, 0.99, 2))
            if not monotonicity_probe(f, float(lam1), float(lam2), sample):
                fails.append([float(lam1), float(lam2)])
        ok = ok and not fails
        out[name] = {"pairs": pairs, "failures": fails}
    return ok, out


def random_contraction(rng, index):
    """Affine contraction x -> z + s (x - z) on a domain symmetric about z."""
    z = rng.uniform(-5, 5, 1 + index % 2)
    s = float(rng.uniform(-0.95, 0.95)) if z.size == 1 else float(rng.uniform(0.0, 0.95))
    R = float(rng.uniform(0.5, 3.0))
    if z.size == 1:
        D = Interval(z[0] - R, z[0] + R)
    else:
        D = Polytope(z + R * np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]]))
    p = [1.0, 2.0, 3.0, INF][index % 4]
    return affine(D, s, z * (1.0 - s)), NormedSpace(z.size, p), z


def contraction_criterion(pool, seed=0, count=20):
    rng = np.random.default_rng(seed)
    rows, ok = [], True
    for i in range(count):
        f, space, z = random_contraction(rng, i)
        sample = default_sample(f, n=101, k=2_000, seed=seed + i)
        ne = check_nonexpansive(f, sample, space)
        e = check_E(f, 1.0, sample, space)
        pool.add(f"contraction {i}", krasnoselskii_single(f, f.domain.vertices[0], 0.5, 1e-9, space=space))
        ok = ok and ne.satisfied and e.satisfied
        rows.append({"scale": f.rule.scale, "p": "inf" if space.p == INF else space.p,
                     "nonexpansive": ne.satisfied, "E_1": e.satisfied})
    return ok, {"maps": rows}


def grid_center_oracle(seq, lo, hi, h=1e-5):
    """Brute force: scan c over a grid of [lo, hi] and take the max distance to the tail."""
    tail = np.asarray(seq, dtype=float)
    tail = tail[-max(1, min(64, tail.size // 2)):]
    cs = np.linspace(lo, hi, int(round((hi - lo) / h)) + 1)
    vals = np.max(np.abs(cs[:, None] - tail[None, :]), axis=1)
    k = int(np.argmin(vals))
    return float(vals[k]), float(cs[k])


def grid_hausdorff_oracle(a, b, h):
    """Hausdorff distance between two discretised intervals via sorted search."""
    A = np.arange(a[0], a[1] + h / 2, h)
    B = np.arange(b[0], b[1] + h / 2, h)
    A[-1], B[-1] = a[1], b[1]

    def directed(P, Q):
        k = np.clip(np.searchsorted(Q, P), 1, Q.size - 1) if Q.size > 1 else np.zeros(P.size, int)
        d = np.abs(P - Q[k])
        if Q.size > 1:
            d = np.minimum(d, np.abs(P - Q[k - 1]))
        return float(d.max())

    return max(directed(A, B), directed(B, A))


def asymptotic_criterion(pool, seed=0, pairs=100):
    space = NormedSpace(1)
    seq = np.array([i % 2 for i in range(200)], dtype=float)
    rows, ok = {}, True
    for (lo, hi), (r_exp, c_exp) in (((0.0, 1.0), (0.5, 0.5)), ((2.0, 3.0), (2.0, 2.0))):
        res = asymptotic_radius_center(space, seq, Interval(lo, hi))
        r_or, c_or = grid_center_oracle(seq, lo, hi)
        good = (abs(res.radius - r_or) <= 1e-4 and abs(res.center[0] - c_or) <= 1e-4
                and abs(res.radius - r_exp) <= 1e-4 and abs(res.center[0] - c_exp) <= 1e-4)
        ok = ok and good
        rows[f"[{lo}, {hi}]"] = {"radius": res.radius, "center": float(res.center[0]), "oracle": [r_or, c_or]}
    rng = np.random.default_rng(seed)
    h, worst = 1e-3, 0.0
    for _ in range(pairs):
        a = np.sort(rng.uniform(-5, 5, 2))
        b = np.sort(rng.uniform(-5, 5, 2))
        exact = hausdorff(space, Interval(*a), Interval(*b))
        worst = max(worst, abs(exact - grid_hausdorff_oracle(a, b, h)))
    ok = ok and worst <= h
    rows["hausdorff"] = {"pairs": pairs, "grid": h, "max_gap": worst}
    return ok, rows


def solver_criterion(pool, seed=0):
    space, D = NormedSpace(1), Interval(0.0, 1.0)
    half = affine(D, 0.5, 0.0)
    prob = CommonFixedPointProblem(space, D, half, interval_scaling(D, 0.5), 0.5, seed=seed)
    res = solve_common(prob)
    pool.add("solver outer", res.outer)
    pool.add("solver inner", res.inner)
    rt, rT = res.verify(prob)
    first = res.certified and max(rt, rT) <= 1e-8 and abs(res.z[0]) <= 1e-6
    D5 = Interval(0.0, 5.0)
    res2 = solve_common(CommonFixedPointProblem(space, D5, affine(D5, 1.0, 0.0), multivalued_example(), 0.5, seed=seed))
    pool.add("solver identity/mv5 outer", res2.outer)
    pool.add("solver identity/mv5 inner", res2.inner)
    second = res2.certified and abs(res2.z[0]) <= 1e-6
    witness = None
    try:
        solve_common(CommonFixedPointProblem(space, D, half, constant_set(D, Interval(1.0, 1.0)), 0.5, seed=seed))
        third = False
    except CommutingFailure as exc:
        witness = exc.witness
        third = witness["x"] == [1.0] and witness["tx"] == [0.5] and witness["T_ty"] == {"interval": [1.0, 1.0]}
    return first and second and third, {
        "z": res.z.tolist(), "residuals": [rt, rT], "identity_mv5_z": res2.z.tolist(),
        "commuting_witness": witness}


def convexity_criterion(pool, seed=0):
    instances = {
        "inf": ([0.0, 0.0], [[1.0, -1.0], [1.0, 1.0]]),
        "1": ([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]),
    }
    out, ok = {}, True
    for p, (x, seg) in instances.items():
        S = Polytope(seg)
        flat = nearest_point(NormedSpace(2, p), x, S)
        round_ = nearest_point(NormedSpace(2, 2.0), x, S)
        ok = ok and (not flat.unique) and round_.unique
        out[p] = {"unique": flat.unique, "unique_p2": round_.unique, "point": flat.point.tolist()}
    return ok, out


def goebel_kirk_criterion(pool, tol=1e-6):
    failures, checked = [], 0
    for label, tr in pool.traces:
        if not tr.converged:
            continue
        checked += 1
        rep = trace_goebel_kirk(tr, tol)
        if not (rep.passed and rep.final_gap is not None and rep.final_gap <= tol):
            failures.append({"trace": label, **rep.to_dict()})
    return checked > 0 and not failures, {"converged_traces": checked, "failures": failures}


CRITERIA = [
    (1, "Suzuki map: (C) holds, nonexpansiveness fails", suzuki_criterion),
    (2, "Garcia-Falset map: (C_lambda) thresholds and minimal mu", garcia_criterion),
    (3, "Multivalued [0,5] map: conditions and iteration to 0", multivalued_criterion),
    (4, "Monotonicity of (C_lambda) in lambda", monotonicity_criterion),
    (5, "Nonexpansive contractions satisfy (E_1)", contraction_criterion),
    (7, "Asymptotic center and Hausdorff against grid oracles", asymptotic_criterion),
    (8, "Common fixed point solver end to end", solver_criterion),
    (9, "Uniqueness flag of nearest points", convexity_criterion),
    (6, "Goebel-Kirk property on every converged trace", None),
]


def run_suite(seed: int = 0) -> SuiteReport:
    pool = _Pool()
    results = []
    t_all = time.perf_counter()
    for cid, name, fn in CRITERIA:
        t0 = time.perf_counter()
        if fn is None:
            ok, detail = goebel_kirk_criterion(pool)
        else:
            ok, detail = fn(pool, seed)
        dt = time.perf_counter() - t0
        if cid == 1:
            detail["runtime_limit"] = 5.0
            ok = ok and dt < 5.0
        results.append(CriterionResult(cid, name, bool(ok), dt, detail))
    total = time.perf_counter() - t_all
    s8 = next(r for r in results if r.id == 8)
    s8.detail["suite_runtime_limit"] = 30.0
    s8.passed = s8.passed and total < 30.0
    results.sort(key=lambda r: r.id)
    return SuiteReport(results, total, len(pool.traces))

