"""Krasnoselskii-type iterations for approximate fixed points.

Single-valued runs use the averaged update ``x <- r*t(x) + (1-r)*x``; for a
map satisfying (C_lambda) and ``r`` in ``[lambda, 1)`` the residual
``|x_n - t x_n|`` tends to zero.  Multivalued runs use
``x <- (1-lam)*x + lam*y`` with ``y`` a nearest-point selection from ``T(x)``:
anchored at the previous selection (rule ``"paper"``, which is what makes the
selections move no faster than the iterates) or at ``x`` itself (rule
``"to-x"``).

Convergence is declared on the residual, never on the step length.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .maps import MapError, MultiValuedMap, SingleValuedMap
from .spaces import (
    TOL,
    CompactSet,
    NormedSpace,
    as_point,
    contains,
    distance_point_set,
    nearest_point,
    norm,
)

DEFAULT_TOL = 1e-8
DEFAULT_BUDGET = 100_000
RULES = ("paper", "to-x")


@dataclass
class IterationTrace:
    """Recorded run: ``points[n+1] = (1-step)*points[n] + step*selections[n]``.

    ``selections[n]`` is ``t(points[n])`` for single-valued runs and the chosen
    ``y_n`` in ``T(points[n])`` for multivalued runs; ``residuals[n]`` is
    ``dist(points[n], T points[n])``.
    """

    kind: str
    step: float
    start: np.ndarray
    tol: float
    budget: int
    points: np.ndarray
    selections: np.ndarray
    residuals: np.ndarray
    status: str
    rule: str | None = None
    p: float = 2.0

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]

    def __len__(self):
        return self.points.shape[0]

    def recurrence_error(self) -> float:
        """Largest componentwise deviation from the recorded update rule."""
        if len(self) < 2:
            return 0.0
        x, y = self.points[:-1], self.selections[:-1]
        if self.kind == "single":
            pred = self.step * y + (1.0 - self.step) * x
        else:
            pred = (1.0 - self.step) * x + self.step * y
        return float(np.abs(pred - self.points[1:]).max())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "step": self.step,
            "rule": self.rule,
            "start": self.start.tolist(),
            "tol": self.tol,
            "budget": self.budget,
            "iterations": len(self),
            "status": self.status,
            "final": self.final.tolist(),
            "final_residual": float(self.residuals[-1]),
        }

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "x", "y", "residual"])
        for n in range(len(self)):
            w.writerow([n + 1, _join(self.points[n]), _join(self.selections[n]), repr(float(self.residuals[n]))])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _join(v) -> str:
    return ";".join(repr(float(c)) for c in np.ravel(v))


def _start(f, x1):
    x = as_point(x1, f.dimension)
    if not contains(NormedSpace(f.dimension), x, f.domain, TOL):
        raise MapError(f"start point {x.tolist()} lies outside the domain")
    return x


def krasnoselskii_single(t: SingleValuedMap, x1, r: float, tol: float = DEFAULT_TOL,
                         budget: int = DEFAULT_BUDGET, space: NormedSpace | None = None,
                         lam: float | None = None) -> IterationTrace:
    """Iterate ``x_{n+1} = r*t(x_n) + (1-r)*x_n`` until ``|x_n - t x_n| <= tol``.

    Passing the map's (C_lambda) constant as ``lam`` warns when ``r < lam``,
    where the residual guarantee no longer applies.
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"step r must lie in (0, 1), got {r}")
    if lam is not None and r < lam:
        warnings.warn(f"r={r} < lambda={lam}: the approximate-fixed-point guarantee needs r in [lambda, 1)")
    space = space or NormedSpace(t.dimension)
    x = _start(t, x1)
    apply = t.rule.apply
    pts, imgs, res = [x], [], []
    status = "budget_exhausted"
    for n in range(budget + 1):
        tx = np.asarray(apply(x), dtype=np.float64)
        rn = norm(space, x - tx)
        imgs.append(tx)
        res.append(rn)
        if rn <= tol:
            status = "converged"
            break
        if n == budget:
            break
        x = r * tx + (1.0 - r) * x
        pts.append(x)
    return IterationTrace("single", float(r), pts[0], tol, budget, np.array(pts), np.array(imgs),
                          np.array(res), status, None, space.p)


def select_nearest(space: NormedSpace, anchor, S: CompactSet) -> np.ndarray:
    """Nearest point of S to ``anchor``; lowest index wins among equidistant points of a finite set."""
    if S.convex:
        return nearest_point(space, anchor, S).point
    d = kernels.row_norms(S.points - anchor, space.p)
    return S.points[int(np.argmin(d))].copy()


def krasnoselskii_multi(T: MultiValuedMap, x1, lam: float, rule: str = "paper", tol: float = DEFAULT_TOL,
                        budget: int = DEFAULT_BUDGET, space: NormedSpace | None = None,
                        restrict=None) -> IterationTrace:
    """Iterate ``x_{n+1} = (1-lam)*x_n + lam*y_n`` with nearest-point selections ``y_n`` in ``T(x_n)``.

    ``y_0`` is the nearest point of ``T(x_1)`` to ``x_1``.  After that, rule
    ``"paper"`` picks the point of ``T(x_n)`` nearest to ``y_{n-1}`` and rule
    ``"to-x"`` the point nearest to ``x_n``.  ``restrict``, when given, is a
    callable ``(anchor, image_set, candidate) -> point`` used by the solver to
    keep selections inside a target set.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    if rule not in RULES:
        raise ValueError(f"unknown selection rule {rule!r}; expected one of {RULES}")
    space = space or NormedSpace(T.dimension)
    x = _start(T, x1)
    apply = T.rule.apply
    pts, sel, res = [x], [], []
    y_prev = None
    status = "budget_exhausted"
    for n in range(budget + 1):
        S = apply(x)
        anchor = x if (rule == "to-x" or y_prev is None) else y_prev
        y = select_nearest(space, anchor, S)
        if restrict is not None:
            y = restrict(anchor, S, y)
        rn = distance_point_set(space, x, S)
        sel.append(y)
        res.append(rn)
        if rn <= tol:
            status = "converged"
            break
        if n == budget:
            break
        x = (1.0 - lam) * x + lam * y
        pts.append(x)
        y_prev = y
    return IterationTrace("multi", float(lam), pts[0], tol, budget, np.array(pts), np.array(sel),
                          np.array(res), status, rule, space.p)


# ---------------------------------------------------------------------------
# Goebel-Kirk trace property
# ---------------------------------------------------------------------------


@dataclass
class GoebelKirkReport:
    length: int
    recurrence_ok: bool
    increments_ok: bool
    max_recurrence_error: float
    max_increment_excess: float
    conclusion_evaluated: bool
    tail_min_gap: float | None
    final_gap: float | None
    tol: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def _as_sequence(a):
    a = np.asarray(a, dtype=np.float64)
    return a[:, None] if a.ndim == 1 else a


def goebel_kirk_check(z, w, lam: float, tol: float = 1e-6, space: NormedSpace | None = None) -> GoebelKirkReport:
    """Check the hypotheses of the Goebel-Kirk lemma on finite sequences and, if
    they hold, whether ``|w_n - z_n|`` has fallen below ``tol`` over the last
    10% of the run.

    Hypotheses: ``z_{n+1} = lam*w_n + (1-lam)*z_n`` (to 1e-12) and
    ``|w_{n+1} - w_n| <= |z_{n+1} - z_n|`` (to 1e-12).  Sequences shorter
    than three terms make the hypotheses vacuous; the conclusion is still
    evaluated on the final term.
    """
    z, w = _as_sequence(z), _as_sequence(w)
    if z.shape != w.shape:
        raise ValueError(f"sequence length mismatch: {z.shape} vs {w.shape}")
    if z.shape[0] == 0:
        raise ValueError("empty sequences")
    space = space or NormedSpace(z.shape[1])
    N = z.shape[0]
    scale = max(1.0, float(np.abs(z).max()), float(np.abs(w).max()))
    if N >= 2:
        pred = lam * w[:-1] + (1.0 - lam) * z[:-1]
        rec_err = float(np.abs(pred - z[1:]).max())
        dz = kernels.row_norms(z[1:] - z[:-1], space.p)
        dw = kernels.row_norms(w[1:] - w[:-1], space.p)
        inc_excess = float((dw - dz).max())
    else:
        rec_err, inc_excess = 0.0, -math.inf
    rec_ok = rec_err <= 1e-12 * scale
    inc_ok = inc_excess <= 1e-12 * scale
    gaps = kernels.row_norms(w - z, space.p)
    evaluated = rec_ok and inc_ok
    tail = gaps[-max(1, math.ceil(0.1 * N)):]
    tail_min = float(tail.min()) if evaluated else None
    return GoebelKirkReport(
        length=N,
        recurrence_ok=rec_ok,
        increments_ok=inc_ok,
        max_recurrence_error=rec_err,
        max_increment_excess=inc_excess if N >= 2 else 0.0,
        conclusion_evaluated=evaluated,
        tail_min_gap=tail_min,
        final_gap=float(gaps[-1]) if evaluated else None,
        tol=tol,
        passed=evaluated and tail_min <= tol,
    )


def trace_goebel_kirk(trace: IterationTrace, tol: float = 1e-6) -> GoebelKirkReport:
    """goebel_kirk_check on the (iterates, selections) pair of a trace."""
    return goebel_kirk_check(trace.points, trace.selections, trace.step, tol, NormedSpace(trace.points.shape[1], trace.p))


# ---------------------------------------------------------------------------
# fixed-point set approximation
# ---------------------------------------------------------------------------


@dataclass
class FixSetApproximation:
    points: np.ndarray
    tol: float
    dedup_radius: float
    convexity_checked: bool
    convex_ok: bool | None
    worst_midpoint_residual: float | None
    runs: int
    converged_runs: int
    diagnostic: str = ""
    traces: list = field(default_factory=list, repr=False)

    @property
    def empty(self) -> bool:
        return self.points.shape[0] == 0

    def to_dict(self):
        return {
            "points": self.points.tolist(),
            "tol": self.tol,
            "dedup_radius": self.dedup_radius,
            "convexity_checked": self.convexity_checked,
            "convex_ok": self.convex_ok,
            "worst_midpoint_residual": self.worst_midpoint_residual,
            "runs": self.runs,
            "converged_runs": self.converged_runs,
            "diagnostic": self.diagnostic,
        }


def approximate_fix_set(t: SingleValuedMap, starts, r: float, tol: float = DEFAULT_TOL,
                        budget: int = DEFAULT_BUDGET, space: NormedSpace | None = None) -> FixSetApproximation:
    """Collect near-fixed points of ``t`` by iterating from every start.

    Converged endpoints closer than ``10*tol`` to an already kept point are
    dropped.  In strictly convex spaces the set of fixed points of a map with
    (E) and (C_lambda) is convex, which is probed on the midpoints of every
    pair of kept points (residual at most ``10*tol``).
    """
    space = space or NormedSpace(t.dimension)
    starts = [as_point(s, t.dimension) for s in np.atleast_1d(np.asarray(starts, dtype=float)).reshape(-1, t.dimension)]
    if not starts:
        raise ValueError("need at least one start point")
    radius = 10.0 * tol
    kept, traces = [], []
    for s in starts:
        tr = krasnoselskii_single(t, s, r, tol, budget, space)
        traces.append(tr)
        if not tr.converged:
            continue
        e = tr.final
        if all(norm(space, e - k) > radius for k in kept):
            kept.append(e)
    pts = np.array(kept).reshape(-1, t.dimension)
    converged = sum(tr.converged for tr in traces)
    if not kept:
        return FixSetApproximation(pts, tol, radius, False, None, None, len(starts), 0,
                                   "no start converged within the budget", traces)
    worst, checked = None, space.strictly_convex
    if checked and len(kept) > 1:
        worst = 0.0
        for i in range(len(kept)):
            for j in range(i + 1, len(kept)):
                m = 0.5 * (kept[i] + kept[j])
                worst = max(worst, norm(space, m - t.rule.apply(m)))
    convex_ok = None if not checked else (worst is None or worst <= radius)
    return FixSetApproximation(pts, tol, radius, checked, convex_ok, worst, len(starts), converged, "", traces)
