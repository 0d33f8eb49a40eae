import json

import numpy as np
import pytest

import commonfix.solver as solver
from commonfix.iteration import trace_goebel_kirk
from commonfix.maps import affine, constant_set, identity, interval_scaling, multivalued_example
from commonfix.spaces import FinitePointSet, Interval, NormedSpace, Polytope, distance_point_set
from commonfix.solver import (
    CommonFixedPointProblem,
    CommutingFailure,
    IntersectionFailure,
    SolverAbort,
    check_commuting,
    solve_common,
)

SP1 = NormedSpace(1)
D1 = Interval(0.0, 1.0)
D5 = Interval(0.0, 5.0)


def half_problem(**kw):
    return CommonFixedPointProblem(SP1, D1, affine(D1, 0.5, 0.0), interval_scaling(D1, 0.5), 0.5, **kw)


def identity_problem(**kw):
    return CommonFixedPointProblem(SP1, D5, identity(D5), multivalued_example(), 0.5, **kw)


@pytest.fixture(scope="module")
def solved():
    out = {}
    for name, make in (("half", half_problem), ("identity", identity_problem)):
        prob = make()
        out[name] = (prob, solve_common(prob))
    return out


@pytest.mark.parametrize("name", ["half", "identity"])
def test_solutions_are_certified(solved, name):
    prob, res = solved[name]
    assert res.certified
    rt, rT = res.verify(prob)
    assert max(rt, rT) <= prob.eps
    assert (rt, rT) == (res.residual_t, res.residual_T)
    assert abs(res.z[0]) <= 1e-6
    assert distance_point_set(prob.space, res.z, prob.domain) <= 1e-9
    assert distance_point_set(prob.space, res.z, res.surrogate) <= 10 * prob.eps


@pytest.mark.parametrize("name", ["half", "identity"])
def test_solver_traces_have_goebel_kirk_property(solved, name):
    _, res = solved[name]
    for tr in (res.outer, res.inner):
        assert tr.recurrence_error() <= 1e-12
        if tr.converged:
            rep = trace_goebel_kirk(tr)
            assert rep.passed and rep.final_gap <= 1e-6


def test_fix_surrogates(solved):
    assert solved["half"][1].surrogate.to_literal() == {"interval": [0.0, pytest.approx(0.0, abs=1e-8)]}
    # every point is fixed by the identity
    assert solved["identity"][1].surrogate.to_literal() == {"interval": [0.0, 5.0]}


def test_solver_is_deterministic(solved):
    prob, res = solved["half"]
    again = solve_common(half_problem())
    assert json.dumps(res.to_dict(), sort_keys=True) == json.dumps(again.to_dict(), sort_keys=True)


def test_result_serialises(solved):
    d = solved["identity"][1].to_dict()
    assert d["status"] == "certified"
    assert set(d["diagnostics"]) >= {"intersection_gap", "restarts", "distance_to_fix_surrogate"}
    json.dumps(d)


def test_non_certified_result_is_reported():
    prob = identity_problem(budget=5)
    res = solve_common(prob)
    assert not res.certified
    assert res.to_dict()["status"] == "non-certified"
    assert max(res.verify(prob)) > prob.eps


def test_two_dimensional_problem():
    space = NormedSpace(2, 2.0)
    D = Polytope([[0, 0], [1, 0], [0, 1]])
    prob = CommonFixedPointProblem(space, D, affine(D, 0.5, [0.0, 0.0]), constant_set(D, FinitePointSet([[0.0, 0.0]])),
                                   0.5, check_hypotheses=False)
    res = solve_common(prob)
    assert res.certified and np.abs(res.z).max() <= 1e-6


# ---------------------------------------------------------------------------
# commuting
# ---------------------------------------------------------------------------


def test_commuting_pairs():
    assert check_commuting(affine(D1, 0.5, 0.0), interval_scaling(D1, 0.5)).satisfied
    assert check_commuting(identity(D5), multivalued_example()).satisfied


def test_non_commuting_pair_has_witness():
    rep = check_commuting(affine(D1, 0.5, 0.0), constant_set(D1, Interval(1.0, 1.0)))
    assert not rep.satisfied
    w = rep.violations[0]
    assert w["x"] == [1.0] and w["tx"] == [0.5] and w["T_ty"] == {"interval": [1.0, 1.0]}
    assert w["distance"] == pytest.approx(0.5)


def test_solver_aborts_on_non_commuting_pair():
    prob = CommonFixedPointProblem(SP1, D1, affine(D1, 0.5, 0.0), constant_set(D1, Interval(1.0, 1.0)), 0.5)
    with pytest.raises(CommutingFailure) as info:
        solve_common(prob)
    d = info.value.to_dict()
    assert d["status"] == "aborted" and d["stage"] == "commuting"
    assert d["witness"]["x"] == [1.0]


def test_solver_aborts_when_images_miss_fixed_points(monkeypatch):
    real = solver.approximate_fix_set

    def shifted(*args, **kw):
        fx = real(*args, **kw)
        fx.points = np.array([[1.0]])
        return fx

    monkeypatch.setattr(solver, "approximate_fix_set", shifted)
    with pytest.raises(IntersectionFailure) as info:
        solve_common(half_problem())
    assert isinstance(info.value, SolverAbort)
    assert info.value.witness["x"] == [1.0] and info.value.witness["gap"] == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def test_problem_validation():
    t, T = affine(D1, 0.5, 0.0), interval_scaling(D1, 0.5)
    with pytest.raises(ValueError, match="lambda"):
        CommonFixedPointProblem(SP1, D1, t, T, 1.0)
    with pytest.raises(ValueError):
        CommonFixedPointProblem(SP1, D1, t, interval_scaling(D5, 0.5), 0.5)
    with pytest.raises(ValueError):
        CommonFixedPointProblem(SP1, D1, T, t, 0.5)
    with pytest.raises(ValueError):
        CommonFixedPointProblem(SP1, FinitePointSet([[0.0], [1.0]]), t, T, 0.5)
