import csv
import io
import warnings

import numpy as np
import pytest

from commonfix.iteration import (
    approximate_fix_set,
    goebel_kirk_check,
    krasnoselskii_multi,
    krasnoselskii_single,
    select_nearest,
    trace_goebel_kirk,
)
from commonfix.maps import (
    affine,
    constant_set,
    garcia_example,
    identity,
    interval_scaling,
    multivalued_example,
    suzuki_example,
    with_exception,
)
from commonfix.spaces import FinitePointSet, Interval, NormedSpace, Polytope


def test_garcia_hand_steps():
    tr = krasnoselskii_single(garcia_example(0.5), 1.0, 0.5)
    assert tr.points[1, 0] == pytest.approx(0.8, abs=1e-15)
    assert tr.points[2, 0] == pytest.approx(0.6, abs=1e-15)
    r = tr.residuals
    # the first step keeps the residual at 0.4; after that it strictly decreases
    assert r[0] == pytest.approx(0.4) and r[1] == pytest.approx(0.4)
    assert np.all(np.diff(r[1:]) < 0)
    assert tr.converged and r[-1] <= tr.tol


def test_fixed_start_is_constant():
    tr = krasnoselskii_single(garcia_example(0.5), 0.0, 0.5)
    assert len(tr) == 1 and tr.converged
    m = krasnoselskii_multi(multivalued_example(), 0.0, 0.5)
    assert len(m) == 1 and m.converged and m.final[0] == 0.0


def test_multivalued_hand_steps_to_x_rule():
    tr = krasnoselskii_multi(multivalued_example(), 5.0, 0.5, "to-x")
    np.testing.assert_allclose(tr.points[:3, 0], [5.0, 3.0, 1.8], atol=1e-15)
    np.testing.assert_allclose(tr.selections[:2, 0], [1.0, 0.6], atol=1e-15)
    assert tr.converged and abs(tr.final[0]) <= 1e-7


def test_multivalued_previous_anchor_rule_from_five():
    tr = krasnoselskii_multi(multivalued_example(), 5.0, 0.5, "paper", 1e-6, 200)
    assert tr.converged and len(tr) <= 201


@pytest.mark.parametrize("lam", [0.3, 0.5, 0.8])
def test_residual_guarantee_from_every_start(lam):
    f = garcia_example(lam)
    for r in (lam, (1 + lam) / 2, 0.9):
        for x1 in np.linspace(0, 1, 11):
            tr = krasnoselskii_single(f, x1, r, 1e-6, 10_000)
            assert tr.converged and tr.residuals[-1] <= 1e-6


def test_budget_exhaustion():
    tr = krasnoselskii_single(garcia_example(0.5), 1.0, 0.5, budget=3)
    assert tr.status == "budget_exhausted" and not tr.converged
    assert len(tr) == 4


def test_warns_when_step_below_lambda():
    with pytest.warns(UserWarning, match="r=0.3"):
        krasnoselskii_single(garcia_example(0.5), 1.0, 0.3, lam=0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        krasnoselskii_single(garcia_example(0.5), 1.0, 0.6, lam=0.5)


def test_argument_validation():
    T = multivalued_example()
    with pytest.raises(ValueError):
        krasnoselskii_multi(T, 1.0, 0.5, "sideways")
    with pytest.raises(ValueError):
        krasnoselskii_multi(T, 1.0, 1.5)
    with pytest.raises(Exception):
        krasnoselskii_multi(T, 6.0, 0.5)


def _traces():
    out = [krasnoselskii_single(f, x1, r) for f, x1, r in
           [(garcia_example(0.5), 1.0, 0.5), (suzuki_example(), 3.0, 0.5), (garcia_example(0.8), 0.3, 0.9)]]
    T = multivalued_example()
    for x1 in (5.0, 4.0, 2.5, 0.7):
        for rule in ("paper", "to-x"):
            out.append(krasnoselskii_multi(T, x1, 0.5, rule))
    D = Polytope([[0, 0], [2, 0], [0, 2]])
    out.append(krasnoselskii_multi(constant_set(D, Polytope([[0, 0], [1, 0]])), [1.5, 0.4], 0.5, space=NormedSpace(2, 3)))
    return out


def test_recurrence_exactness():
    for tr in _traces():
        assert tr.recurrence_error() <= 1e-12


def test_selection_optimality_against_grid():
    T = multivalued_example()
    sp = NormedSpace(1)
    for rule in ("paper", "to-x"):
        tr = krasnoselskii_multi(T, 5.0, 0.5, rule)
        for n in range(len(tr)):
            S = T(tr.points[n])
            anchor = tr.points[n] if (rule == "to-x" or n == 0) else tr.selections[n - 1]
            grid = S.grid(2001)
            best = np.abs(grid[:, 0] - anchor[0]).min()
            assert abs(tr.selections[n][0] - anchor[0]) <= best + 1e-8


def test_select_nearest_on_finite_set_prefers_lowest_index():
    S = FinitePointSet([[1.0], [-1.0]])
    assert select_nearest(NormedSpace(1), [0.0], S)[0] == 1.0


def test_goebel_kirk_on_converged_multivalued_traces():
    for tr in _traces():
        if tr.kind == "multi" and tr.converged:
            rep = trace_goebel_kirk(tr)
            assert rep.recurrence_ok and rep.increments_ok and rep.passed
            assert rep.final_gap <= 1e-6


def test_goebel_kirk_trivial_and_failing_inputs():
    c = np.full(20, 0.3)
    rep = goebel_kirk_check(c, c, 0.5)
    assert rep.passed and rep.final_gap == 0.0
    z = np.linspace(1, 0, 20)
    bad = goebel_kirk_check(z, z + 1.0, 0.5)
    assert not bad.recurrence_ok and not bad.conclusion_evaluated and not bad.passed
    with pytest.raises(ValueError):
        goebel_kirk_check(z, z[:-1], 0.5)


def test_goebel_kirk_short_sequences():
    assert goebel_kirk_check([0.0], [0.0], 0.5).passed
    assert goebel_kirk_check([1.0, 0.5], [0.0, 0.0], 0.5).length == 2


def test_csv_trace_format():
    tr = krasnoselskii_multi(multivalued_example(), 5.0, 0.5, "to-x")
    rows = list(csv.reader(io.StringIO(tr.to_csv())))
    assert rows[0] == ["n", "x", "y", "residual"]
    assert rows[1] == ["1", "5.0", "1.0", "4.0"]
    assert len(rows) == len(tr) + 1
    assert float(rows[-1][3]) == tr.residuals[-1]
    D = Polytope([[0, 0], [1, 0], [0, 1]])
    tr2 = krasnoselskii_single(affine(D, 0.5, [0.0, 0.0]), [0.5, 0.5], 0.5)
    first = next(r for i, r in enumerate(csv.reader(io.StringIO(tr2.to_csv()))) if i == 1)
    assert first[1] == "0.5;0.5" and first[2] == "0.25;0.25"


def test_trace_serialisation():
    tr = krasnoselskii_multi(multivalued_example(), 2.0, 0.5)
    d = tr.to_dict()
    assert d["iterations"] == len(tr) and d["status"] == "converged" and d["rule"] == "paper"


# ---------------------------------------------------------------------------
# fixed-point sets
# ---------------------------------------------------------------------------


def test_fix_set_garcia_is_zero():
    fx = approximate_fix_set(garcia_example(0.5), np.linspace(0, 1, 11), 0.5)
    assert fx.points.shape == (1, 1) and abs(fx.points[0, 0]) <= 1e-7
    assert fx.converged_runs == 11


def test_fix_set_contraction_is_zero():
    fx = approximate_fix_set(affine(Interval(0, 1), 0.5, 0.0), np.linspace(0, 1, 11), 0.5)
    assert fx.points.shape[0] == 1


def test_fix_set_identity_spans_domain():
    fx = approximate_fix_set(identity(Interval(0, 1)), np.linspace(0, 1, 11), 0.5)
    assert fx.points.shape[0] == 11
    assert fx.points.min() == 0.0 and fx.points.max() == 1.0
    assert fx.convexity_checked and fx.convex_ok


def test_fix_set_reports_empty_when_nothing_converges():
    fx = approximate_fix_set(garcia_example(0.5), [1.0], 0.5, budget=2)
    assert fx.empty and fx.diagnostic


def test_fix_set_convexity_probe_catches_gaps():
    # t = 0 on [0, 1) and t(1) = 1 has the non-convex fixed-point set {0, 1}
    t = with_exception(affine(Interval(0, 1), 0.0, 0.0), 1.0, 1.0)
    fx = approximate_fix_set(t, [0.0, 1.0], 0.5)
    assert fx.points.shape[0] == 2
    assert fx.convex_ok is False


def test_interval_scaling_iteration_reaches_zero():
    tr = krasnoselskii_multi(interval_scaling(Interval(0, 1), 0.5), 1.0, 0.5)
    assert tr.converged and tr.final[0] <= 1e-7
