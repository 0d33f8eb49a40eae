"""Command-line runner: ``commonfix SUBCOMMAND --config problem.json``.

Exit codes: 0 success or satisfied, 1 violated / non-certified / aborted
(the report is still written), 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .asymptotic import asymptotic_radius_center, regularity_probe
from .conditions import (
    PairSample,
    check_C,
    check_Clambda,
    check_E,
    check_nonexpansive,
    mu_report,
)
from .iteration import DEFAULT_BUDGET, DEFAULT_TOL, RULES, krasnoselskii_multi, krasnoselskii_single, trace_goebel_kirk
from .maps import MapError, map_from_spec
from .solver import CommonFixedPointProblem, SolverAbort, check_commuting, solve_common
from .spaces import NormedSpace, set_from_literal

SUBCOMMANDS = ("check-conditions", "iterate", "asymptotic-center", "check-commuting", "solve-common", "reproduce-paper")
CONDITIONS = ("C", "C_lambda", "E", "nonexpansive", "minimal_mu")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    def __init__(self, path, message):
        super().__init__(f"config error at '{path}': {message}")
        self.path = path


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _get(cfg, key, path, kind=None, required=True, default=None):
    full = f"{path}.{key}" if path else key
    if key not in cfg or cfg[key] is None:
        if required:
            raise ConfigError(full, "required field is missing")
        return default
    v = cfg[key]
    if kind == "number":
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(full, f"expected a finite number, got {v!r}")
        return float(v)
    if kind == "int":
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ConfigError(full, f"expected a nonnegative integer, got {v!r}")
        return v
    if kind == "object" and not isinstance(v, dict):
        raise ConfigError(full, "expected a JSON object")
    if kind == "list" and not isinstance(v, list):
        raise ConfigError(full, "expected a JSON array")
    if kind == "str" and not isinstance(v, str):
        raise ConfigError(full, "expected a string")
    return v


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "the config must be a JSON object")
    return cfg


def _domain(cfg, required=True):
    lit = _get(cfg, "domain", "", "object", required)
    if lit is None:
        return None
    try:
        return set_from_literal(lit)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError("domain", str(exc)) from exc


def _space(cfg, dimension):
    sp = _get(cfg, "space", "", "object", required=False, default={})
    dim = sp.get("dimension", dimension)
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ConfigError("space.dimension", f"expected a positive integer, got {dim!r}")
    if dim != dimension:
        raise ConfigError("space.dimension", f"is {dim} but the domain has dimension {dimension}")
    try:
        return NormedSpace(dim, sp.get("p", 2.0))
    except ValueError as exc:
        raise ConfigError("space.p", str(exc)) from exc


def _map(spec, path, domain, name):
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected a map spec object")
    try:
        f = map_from_spec(spec, domain, name)
    except MapError as exc:
        raise ConfigError(path, str(exc)) from exc
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(path, f"invalid map spec: {exc}") from exc
    if domain is not None and "catalog" in spec and f.domain.to_literal() != domain.to_literal():
        raise ConfigError(path, f"catalog map lives on {f.domain.to_literal()}, not on the configured domain")
    return f


def _single_map(cfg):
    """The ``map`` entry, or a top-level catalog shorthand like ``{"catalog": "suzuki"}``."""
    domain = _domain(cfg, required=False)
    if "map" in cfg:
        f = _map(cfg["map"], "map", domain, None)
    elif "catalog" in cfg:
        spec = {k: cfg[k] for k in ("catalog", "lambda", "exception") if k in cfg}
        f = _map(spec, "catalog", domain, None)
    else:
        raise ConfigError("map", "required field is missing")
    return f, _space(cfg, f.dimension)


def _pair_maps(cfg):
    domain = _domain(cfg)
    maps = _get(cfg, "maps", "", "object")
    t = _map(_get(maps, "t", "maps", "object"), "maps.t", domain, "t")
    T = _map(_get(maps, "T", "maps", "object"), "maps.T", domain, "T")
    if t.multivalued:
        raise ConfigError("maps.t", "t must be single-valued")
    if not T.multivalued:
        raise ConfigError("maps.T", "T must be multivalued")
    return domain, t, T, _space(cfg, domain.dimension)


def _sample(cfg, f, seed):
    s = _get(cfg, "sample", "", "object", required=False, default={})
    n = _get(s, "n", "sample", "int", required=False, default=201)
    k = _get(s, "k", "sample", "int", required=False, default=10_000)
    return PairSample.build(f.domain, n=n, k=k, seed=seed, include=f.exception_points)


def _lambda(cfg, key="lambda"):
    lam = _get(cfg, key, "", "number")
    if not 0.0 < lam < 1.0:
        raise ConfigError(key, f"must lie in (0, 1), got {lam}")
    return lam


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _emit(report, args):
    text = dumps(report)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_traces(args, traces):
    if not args.trace_dir:
        return
    d = Path(args.trace_dir)
    d.mkdir(parents=True, exist_ok=True)
    for name, tr in traces.items():
        with open(d / f"{name}.csv", "w", encoding="utf-8", newline="") as fh:
            tr.write_csv(fh)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_check_conditions(cfg, args):
    f, space = _single_map(cfg)
    cond = _get(cfg, "condition", "", "str")
    if cond not in CONDITIONS:
        raise ConfigError("condition", f"unknown condition {cond!r}; expected one of {list(CONDITIONS)}")
    sample = _sample(cfg, f, args.seed)
    if cond == "C":
        rep = check_C(f, sample, space)
    elif cond == "C_lambda":
        rep = check_Clambda(f, _lambda(cfg), sample, space)
    elif cond == "E":
        mu = _get(cfg, "mu", "", "number")
        if mu < 1.0:
            raise ConfigError("mu", f"must be >= 1, got {mu}")
        rep = check_E(f, mu, sample, space)
    elif cond == "nonexpansive":
        rep = check_nonexpansive(f, sample, space)
    else:
        rep = mu_report(f, sample, space)
    limit = _get(cfg, "max_witnesses", "", "int", required=False, default=100)
    out = rep.to_dict()
    out["violations"] = out["violations"][:limit]
    out["map"] = f.to_spec()
    return out, EXIT_OK if rep.satisfied else EXIT_FAIL


def cmd_iterate(cfg, args):
    f, space = _single_map(cfg)
    x1 = _get(cfg, "x1", "", None)
    tol = args.tol if args.tol is not None else _get(cfg, "tol", "", "number", False, DEFAULT_TOL)
    budget = _get(cfg, "budget", "", "int", False, DEFAULT_BUDGET)
    try:
        if f.multivalued:
            rule = _get(cfg, "rule", "", "str", False, "paper")
            if rule not in RULES:
                raise ConfigError("rule", f"unknown rule {rule!r}; expected one of {list(RULES)}")
            tr = krasnoselskii_multi(f, x1, _lambda(cfg), rule, tol, budget, space)
        else:
            r = _get(cfg, "r", "", "number")
            if not 0.0 < r < 1.0:
                raise ConfigError("r", f"must lie in (0, 1), got {r}")
            tr = krasnoselskii_single(f, x1, r, tol, budget, space)
    except (ValueError, MapError) as exc:
        raise ConfigError("x1", str(exc)) from exc
    _write_traces(args, {"trace": tr})
    out = tr.to_dict()
    out["goebel_kirk"] = trace_goebel_kirk(tr).to_dict()
    out["map"] = f.to_spec()
    return out, EXIT_OK if tr.converged else EXIT_FAIL


def cmd_asymptotic_center(cfg, args):
    D = _domain(cfg)
    space = _space(cfg, D.dimension)
    seq = _get(cfg, "sequence", "", "list")
    try:
        arr = np.asarray(seq, dtype=float)
    except (ValueError, TypeError) as exc:
        raise ConfigError("sequence", f"expected numbers or points: {exc}") from exc
    if arr.size == 0:
        raise ConfigError("sequence", "must not be empty")
    W = _get(cfg, "W", "", "int", required=False)
    resolution = _get(cfg, "resolution", "", "number", False, 1e-4)
    try:
        res = asymptotic_radius_center(space, arr, D, W, resolution)
        out = res.to_dict()
        reg = _get(cfg, "regularity", "", "object", required=False)
        if reg is not None:
            K = _get(reg, "K", "regularity", "int", False, 16)
            out["regularity"] = regularity_probe(space, arr, D, K, args.seed, W, resolution).to_dict()
    except ValueError as exc:
        raise ConfigError("sequence", str(exc)) from exc
    return out, EXIT_OK


def cmd_check_commuting(cfg, args):
    D, t, T, space = _pair_maps(cfg)
    size = _get(cfg, "sample_size", "", "int", False, 200)
    rep = check_commuting(t, T, D, size, args.seed, space=space)
    return rep.to_dict(), EXIT_OK if rep.satisfied else EXIT_FAIL


def cmd_solve_common(cfg, args):
    D, t, T, space = _pair_maps(cfg)
    eps = args.tol if args.tol is not None else _get(cfg, "eps", "", "number", False, DEFAULT_TOL)
    mu = _get(cfg, "mu", "", "number", required=False)
    if mu is not None and mu < 1.0:
        raise ConfigError("mu", f"must be >= 1, got {mu}")
    try:
        prob = CommonFixedPointProblem(
            space, D, t, T, _lambda(cfg), eps=eps,
            window=_get(cfg, "W", "", "int", required=False),
            resolution=_get(cfg, "resolution", "", "number", False, 1e-4),
            budget=_get(cfg, "budget", "", "int", False, DEFAULT_BUDGET),
            seed=args.seed,
            n_starts=_get(cfg, "starts", "", "int", False, 11),
            commuting_sample=_get(cfg, "sample_size", "", "int", False, 200),
            x0=_get(cfg, "x0", "", None, required=False),
            mu=mu,
        )
    except ValueError as exc:
        raise ConfigError("maps", str(exc)) from exc
    try:
        res = solve_common(prob)
    except SolverAbort as exc:
        return exc.to_dict(), EXIT_FAIL
    _write_traces(args, {"outer": res.outer, "inner": res.inner})
    return res.to_dict(), EXIT_OK if res.certified else EXIT_FAIL


def cmd_reproduce(cfg, args):
    from .reproduce import run_suite

    rep = run_suite(args.seed)
    print(rep.table())
    return rep.to_dict(timings=False), EXIT_OK if rep.passed else EXIT_FAIL


HANDLERS = {
    "check-conditions": cmd_check_conditions,
    "iterate": cmd_iterate,
    "asymptotic-center": cmd_asymptotic_center,
    "check-commuting": cmd_check_commuting,
    "solve-common": cmd_solve_common,
    "reproduce-paper": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="commonfix", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="problem JSON (not needed for reproduce-paper)")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--trace-dir", help="directory for CSV iteration traces")
    ap.add_argument("--seed", type=int, default=0, help="seed for sampling (default 0)")
    ap.add_argument("--threads", type=int, default=None, help="kernel threads (default: all cores)")
    ap.add_argument("--tol", type=float, default=None, help="override the iteration or solver tolerance")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.seed < 0:
        print("error: --seed must be nonnegative", file=sys.stderr)
        return EXIT_CONFIG
    if args.tol is not None and not (args.tol > 0 and math.isfinite(args.tol)):
        print("error: --tol must be a positive number", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be at least 1", file=sys.stderr)
            return EXIT_CONFIG
        kernels.set_threads(args.threads)
    try:
        if args.subcommand == "reproduce-paper":
            cfg = load_config(args.config) if args.config else {}
        else:
            if not args.config:
                raise ConfigError("--config", "required for this subcommand")
            cfg = load_config(args.config)
        report, code = HANDLERS[args.subcommand](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    # the suite prints its table; its JSON goes to --out only
    if args.subcommand != "reproduce-paper" or args.out:
        _emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
