"""Single- and multivalued maps built from closed-form tagged rules.

Rules are plain data (affine, interval scaling, constant set, and a pointwise
exception wrapper) so that a map can be rebuilt from its JSON spec and every
condition-check witness is reproducible.  The three worked examples of the
generalized-nonexpansive literature are available as a catalog:

* ``suzuki_example``: on [0, 3], ``T(x) = 0`` except ``T(3) = 1``;
* ``garcia_example(lam)``: on [0, 1], ``T(x) = x/2`` except ``T(1) = (1+lam)/(2+lam)``;
* ``multivalued_example``: on [0, 5], ``T(x) = [0, x/5]`` except ``T(5) = {1}``.

Exception points compare by exact equality; the catalog maps are defined
pointwise and their interesting behaviour sits exactly there.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .spaces import (
    TOL,
    CompactSet,
    FinitePointSet,
    Interval,
    NormedSpace,
    as_interval,
    as_point,
    contains,
    distance_point_set,
    set_from_literal,
)


class MapError(ValueError):
    pass


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Affine:
    """x -> scale @ x + offset (``scale`` scalar or square matrix)."""

    scale: np.ndarray
    offset: np.ndarray
    multivalued = False

    def apply(self, x):
        s = self.scale
        return (s @ x if s.ndim == 2 else s * x) + self.offset

    def apply_many(self, X):
        s = self.scale
        return (X @ s.T if s.ndim == 2 else s * X) + self.offset

    def to_spec(self):
        s = self.scale.tolist() if self.scale.ndim else float(self.scale)
        b = self.offset.tolist() if self.offset.size > 1 else float(self.offset.ravel()[0])
        return {"affine": {"scale": s, "offset": b}}


@dataclass(frozen=True)
class IntervalScaling:
    """x -> [min(0, c x), max(0, c x)] on the real line."""

    c: float
    multivalued = True

    def apply(self, x):
        v = self.c * float(x[0])
        return Interval(min(0.0, v), max(0.0, v))

    def interval_bounds(self, x):
        v = self.c * x
        return np.minimum(0.0, v), np.maximum(0.0, v)

    def to_spec(self):
        return {"interval_scaling": {"c": self.c}}


@dataclass(frozen=True)
class ConstantSet:
    value: CompactSet
    multivalued = True

    def apply(self, x):
        return self.value

    def interval_bounds(self, x):
        I = as_interval(self.value)
        return np.full(x.shape, I.lo), np.full(x.shape, I.hi)

    def to_spec(self):
        return {"constant_set": self.value.to_literal()}


@dataclass(frozen=True, eq=False)
class Exceptional:
    """``base`` everywhere except at the single point ``at`` where the value is ``value``."""

    base: object
    at: np.ndarray
    value: object

    @property
    def multivalued(self):
        return self.base.multivalued

    def apply(self, x):
        if np.array_equal(x, self.at):
            return self.value
        return self.base.apply(x)

    def apply_many(self, X):
        out = self.base.apply_many(X)
        out[np.all(X == self.at, axis=1)] = self.value
        return out

    def interval_bounds(self, x):
        lo, hi = self.base.interval_bounds(x)
        hit = x == self.at[0]
        I = as_interval(self.value)
        lo[hit], hi[hit] = I.lo, I.hi
        return lo, hi

    def to_spec(self):
        spec = dict(self.base.to_spec())
        value = self.value.to_literal() if isinstance(self.value, CompactSet) else _plain(self.value)
        spec["exception"] = {"at": _plain(self.at), "value": value}
        return spec


def _plain(a):
    a = np.asarray(a, dtype=float)
    return float(a.ravel()[0]) if a.size == 1 else a.tolist()


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SingleValuedMap:
    domain: CompactSet
    rule: object
    name: str = "t"
    multivalued: bool = field(default=False, init=False)

    @property
    def dimension(self):
        return self.domain.dimension

    @property
    def exception_points(self) -> list[np.ndarray]:
        return [self.rule.at] if isinstance(self.rule, Exceptional) else []

    def _check(self, x):
        x = as_point(x, self.dimension)
        if not contains(NormedSpace(self.dimension), x, self.domain, TOL):
            raise MapError(f"{self.name}: point {x.tolist()} lies outside the domain {self.domain.to_literal()}")
        return x

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.rule.apply(self._check(x)), dtype=np.float64)

    def images(self, X) -> np.ndarray:
        """Vectorised evaluation at the rows of ``X`` (no domain check)."""
        X = np.asarray(X, dtype=np.float64).reshape(-1, self.dimension)
        return np.asarray(self.rule.apply_many(X), dtype=np.float64).reshape(X.shape)

    def to_spec(self):
        return self.rule.to_spec()


@dataclass(frozen=True, eq=False)
class MultiValuedMap:
    domain: CompactSet
    rule: object
    name: str = "T"
    kc_valued: bool = True
    multivalued: bool = field(default=True, init=False)

    @property
    def dimension(self):
        return self.domain.dimension

    @property
    def exception_points(self) -> list[np.ndarray]:
        return [self.rule.at] if isinstance(self.rule, Exceptional) else []

    @property
    def interval_valued(self) -> bool:
        """True when every image is an interval of the real line (fast kernels apply)."""
        if self.dimension != 1:
            return False
        rule = self.rule.base if isinstance(self.rule, Exceptional) else self.rule
        if isinstance(rule, ConstantSet) and not rule.value.convex:
            return False
        if isinstance(self.rule, Exceptional) and not self.rule.value.convex:
            return False
        return hasattr(rule, "interval_bounds")

    def __call__(self, x) -> CompactSet:
        x = as_point(x, self.dimension)
        if not contains(NormedSpace(self.dimension), x, self.domain, TOL):
            raise MapError(f"{self.name}: point {x.tolist()} lies outside the domain {self.domain.to_literal()}")
        return self.rule.apply(x)

    def interval_images(self, x):
        """(lo, hi) arrays of the images at the 1-d points ``x``."""
        return self.rule.interval_bounds(np.asarray(x, dtype=np.float64).ravel().copy())

    def to_spec(self):
        return self.rule.to_spec()


Map = SingleValuedMap | MultiValuedMap


def evaluate(f: Map, x):
    """Apply a map at ``x``; raises ``MapError`` outside the domain."""
    return f(x)


# ---------------------------------------------------------------------------
# constructors and catalog
# ---------------------------------------------------------------------------


def affine(domain: CompactSet, scale=1.0, offset=0.0, name="t") -> SingleValuedMap:
    d = domain.dimension
    s = np.asarray(scale, dtype=np.float64)
    if s.ndim == 2 and s.shape != (d, d):
        raise MapError(f"affine scale must be a scalar or a {d}x{d} matrix")
    if s.ndim not in (0, 2):
        raise MapError("affine scale must be a scalar or a square matrix")
    b = np.broadcast_to(np.asarray(offset, dtype=np.float64), (d,)).copy()
    return SingleValuedMap(domain, Affine(s, b), name)


def identity(domain: CompactSet, name="t") -> SingleValuedMap:
    return affine(domain, 1.0, 0.0, name)


def interval_scaling(domain: CompactSet, c: float, name="T") -> MultiValuedMap:
    if domain.dimension != 1:
        raise MapError("interval_scaling is defined on the real line only")
    return MultiValuedMap(domain, IntervalScaling(float(c)), name)


def constant_set(domain: CompactSet, value: CompactSet, name="T") -> MultiValuedMap:
    if value.dimension != domain.dimension:
        raise MapError("constant set dimension differs from the domain")
    return MultiValuedMap(domain, ConstantSet(value), name, kc_valued=value.convex)


def with_exception(f: Map, at, value) -> Map:
    """Copy of ``f`` whose value at the single point ``at`` is replaced by ``value``."""
    at = as_point(at, f.dimension)
    if f.multivalued:
        if not isinstance(value, CompactSet):
            value = FinitePointSet([as_point(value, f.dimension)]) if f.dimension > 1 else Interval(value, value)
        return MultiValuedMap(f.domain, Exceptional(f.rule, at, value), f.name, f.kc_valued and value.convex)
    return SingleValuedMap(f.domain, Exceptional(f.rule, at, as_point(value, f.dimension)), f.name)


def suzuki_example() -> SingleValuedMap:
    """T(x) = 0 on [0, 3] except T(3) = 1: condition (C) but not continuous."""
    return with_exception(affine(Interval(0.0, 3.0), 0.0, 0.0, "suzuki"), 3.0, 1.0)


def garcia_example(lam: float) -> SingleValuedMap:
    """T(x) = x/2 on [0, 1] except T(1) = (1+lam)/(2+lam)."""
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise MapError(f"lambda must lie in (0, 1), got {lam}")
    return with_exception(affine(Interval(0.0, 1.0), 0.5, 0.0, "garcia"), 1.0, (1.0 + lam) / (2.0 + lam))


def multivalued_example() -> MultiValuedMap:
    """T(x) = [0, x/5] on [0, 5] except T(5) = {1}."""
    return with_exception(interval_scaling(Interval(0.0, 5.0), 0.2, "mv5"), 5.0, Interval(1.0, 1.0))


CATALOG = {
    "suzuki": lambda params: suzuki_example(),
    "garcia": lambda params: garcia_example(params["lambda"]),
    "mv5": lambda params: multivalued_example(),
}


def map_from_spec(spec: dict, domain: CompactSet | None = None, name: str | None = None) -> Map:
    """Build a map from its JSON form.

    Forms: ``{"affine": {"scale": s, "offset": b}}``, ``{"catalog": "suzuki"}``,
    ``{"catalog": "garcia", "lambda": l}``, ``{"catalog": "mv5"}``,
    ``{"interval_scaling": {"c": c}}``, ``{"constant_set": <set literal>}``,
    each optionally with an ``"exception": {"at": x, "value": v}`` entry.
    Catalog maps carry their own domain; the others need ``domain``.
    """
    if not isinstance(spec, dict):
        raise MapError("map spec must be a JSON object")
    spec = dict(spec)
    exc = spec.pop("exception", None)
    if "catalog" in spec:
        key = spec["catalog"]
        if key not in CATALOG:
            raise MapError(f"unknown catalog map {key!r}; known: {sorted(CATALOG)}")
        if key == "garcia" and "lambda" not in spec:
            raise MapError("catalog map 'garcia' needs 'lambda'")
        f = CATALOG[key](spec)
    else:
        if domain is None:
            raise MapError("non-catalog maps need a 'domain'")
        kinds = [k for k in ("affine", "interval_scaling", "constant_set") if k in spec]
        if len(kinds) != 1:
            raise MapError("map spec needs exactly one of 'affine', 'catalog', 'interval_scaling', 'constant_set'")
        kind = kinds[0]
        body = spec[kind]
        if kind == "affine":
            if not isinstance(body, dict) or "scale" not in body:
                raise MapError("'affine' needs {'scale': s, 'offset': b}")
            f = affine(domain, body["scale"], body.get("offset", 0.0))
        elif kind == "interval_scaling":
            if not isinstance(body, dict) or "c" not in body:
                raise MapError("'interval_scaling' needs {'c': c}")
            f = interval_scaling(domain, body["c"])
        else:
            f = constant_set(domain, set_from_literal(body))
    if name is not None:
        f = replace(f, name=name)
    if exc is not None:
        if not isinstance(exc, dict) or "at" not in exc or "value" not in exc:
            raise MapError("'exception' needs {'at': x, 'value': v}")
        value = exc["value"]
        if f.multivalued and isinstance(value, dict):
            value = set_from_literal(value)
        f = with_exception(f, exc["at"], value)
    return f


def self_map_excursion(f: Map, n: int = 1000) -> float:
    """Largest distance from an image (point or set vertex) to the domain over an n-point grid."""
    space = NormedSpace(f.dimension)
    X = f.domain.grid(n)
    for e in f.exception_points:
        X = np.vstack([X, e])
    worst = 0.0
    for x in X:
        img = f(x)
        pts = img.vertices if f.multivalued else [img]
        for v in pts:
            worst = max(worst, distance_point_set(space, v, f.domain))
    return worst


__all__ = [
    "Affine",
    "CATALOG",
    "ConstantSet",
    "Exceptional",
    "IntervalScaling",
    "Map",
    "MapError",
    "MultiValuedMap",
    "SingleValuedMap",
    "affine",
    "constant_set",
    "evaluate",
    "garcia_example",
    "identity",
    "interval_scaling",
    "map_from_spec",
    "multivalued_example",
    "self_map_excursion",
    "suzuki_example",
    "with_exception",
]
