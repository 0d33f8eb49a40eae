import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from commonfix.asymptotic import asymptotic_radius_center, default_window, max_tail, regularity_probe
from commonfix.spaces import INF, FinitePointSet, Interval, NormedSpace, Polytope

SP1 = NormedSpace(1)
ALTERNATING = np.array([i % 2 for i in range(200)], dtype=float)


def grid_oracle_1d(seq, lo, hi, W, h=1e-5):
    tail = np.asarray(seq, dtype=float)[-W:]
    cs = np.linspace(lo, hi, int(round((hi - lo) / h)) + 1)
    vals = np.abs(cs[:, None] - tail[None, :]).max(axis=1)
    k = int(np.argmin(vals))
    return float(vals[k]), float(cs[k])


def test_constant_sequence():
    res = asymptotic_radius_center(SP1, np.full(30, 0.25), Interval(0, 1))
    assert res.radius == pytest.approx(0.0, abs=1e-9)
    assert res.center[0] == pytest.approx(0.25, abs=1e-8)


@pytest.mark.parametrize("D,r,c", [((0.0, 1.0), 0.5, 0.5), ((2.0, 3.0), 2.0, 2.0)])
def test_alternating_sequence_against_grid(D, r, c):
    res = asymptotic_radius_center(SP1, ALTERNATING, Interval(*D))
    r_or, c_or = grid_oracle_1d(ALTERNATING, *D, res.window)
    assert abs(res.radius - r_or) <= 1e-4 and abs(res.center[0] - c_or) <= 1e-4
    assert abs(res.radius - r) <= 1e-4 and abs(res.center[0] - c) <= 1e-4


def test_default_window():
    assert default_window(200) == 64
    assert default_window(10) == 5
    assert default_window(1) == 1
    assert asymptotic_radius_center(SP1, ALTERNATING, Interval(0, 1)).window == 64


def test_window_validation():
    with pytest.raises(ValueError):
        asymptotic_radius_center(SP1, ALTERNATING, Interval(0, 1), W=0)
    with pytest.raises(ValueError):
        asymptotic_radius_center(SP1, ALTERNATING, Interval(0, 1), W=201)
    with pytest.raises(ValueError):
        asymptotic_radius_center(SP1, [], Interval(0, 1))
    with pytest.raises(ValueError):
        asymptotic_radius_center(SP1, ALTERNATING, FinitePointSet([[0.0]]))


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=40), st.floats(-6, 0), st.floats(0.01, 6))
def test_center_optimality_1d(seq, lo, width):
    D = Interval(lo, lo + width)
    res = asymptotic_radius_center(SP1, seq, D)
    grid = D.grid(int(width / res.resolution) + 1)
    vals = max_tail(SP1, np.asarray(seq, dtype=float)[-res.window:, None], grid)
    assert vals.min() >= res.radius - res.center_tol
    assert D.lo - 1e-12 <= res.center[0] <= D.hi + 1e-12


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_singleton_center_in_strictly_convex_spaces(p):
    rng = np.random.default_rng(4)
    for _ in range(5):
        seq = rng.uniform(-1, 1, size=(40, 2))
        res = asymptotic_radius_center(NormedSpace(2, p), seq, Polytope([[-2, -2], [2, -2], [2, 2], [-2, 2]]))
        assert res.diameter <= 10 * res.resolution
    seq1 = rng.uniform(0, 1, 40)
    res1 = asymptotic_radius_center(NormedSpace(1, p), seq1, Interval(0, 1))
    assert res1.diameter <= 10 * res1.resolution


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0, INF])
def test_polytope_center_against_grid(p):
    space = NormedSpace(2, p)
    rng = np.random.default_rng(9)
    V = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
    h = 5e-3
    k = int(round(1 / h))
    i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    keep = i + j <= k
    G = np.stack([i[keep] / k, j[keep] / k], axis=1)
    metric = ("chebyshev", {}) if p == INF else ("minkowski", {"p": p})
    for _ in range(4):
        seq = rng.uniform(-1, 2, size=(30, 2))
        res = asymptotic_radius_center(space, seq, Polytope(V))
        tail = seq[-res.window:]
        oracle = cdist(G, tail, metric[0], **metric[1]).max(axis=1).min()
        assert res.radius <= oracle + 1e-9
        assert res.radius >= oracle - 2 * h - 1e-9


def test_doubling_window_on_convergent_sequence():
    seq = 2.0 ** -np.arange(1, 120)
    N = seq.size
    for W in (8, 16, 32):
        r1 = asymptotic_radius_center(SP1, seq, Interval(-1, 1), W).radius
        r2 = asymptotic_radius_center(SP1, seq, Interval(-1, 1), 2 * W).radius
        osc = np.abs(seq[N - 2 * W:] - seq[-1]).max()
        assert abs(r2 - r1) <= osc + 1e-9


def test_result_serialises():
    d = asymptotic_radius_center(SP1, ALTERNATING, Interval(0, 1)).to_dict()
    assert d["window"] == 64 and len(d["center"]) == 1


# ---------------------------------------------------------------------------
# regularity
# ---------------------------------------------------------------------------


def test_convergent_sequence_is_regular():
    rep = regularity_probe(SP1, 2.0 ** -np.arange(1, 200), Interval(0, 1))
    assert rep.regular
    assert all(abs(r) <= rep.tolerance for r in rep.radii)
    assert "never certify" in rep.note


def test_alternating_with_zero_subsequence_is_not_regular():
    evens = np.arange(0, 200, 2)
    rep = regularity_probe(SP1, ALTERNATING, Interval(0, 1), K=0, subsequences=[evens])
    assert rep.base_radius == pytest.approx(0.5, abs=1e-6)
    # the all-zeros subsequence has radius 0 at center 0
    assert rep.radii == [pytest.approx(0.0, abs=1e-9)]
    assert not rep.regular


def test_alternating_random_probe_refutes():
    assert not regularity_probe(SP1, ALTERNATING, Interval(0, 1), K=16).regular


def test_constant_sequence_is_regular():
    rep = regularity_probe(SP1, np.full(100, 0.7), Interval(0, 1), K=8)
    assert rep.regular and max(rep.radii) <= 1e-9


def test_regularity_is_seeded():
    a = regularity_probe(SP1, ALTERNATING, Interval(0, 1), K=5, seed=3)
    b = regularity_probe(SP1, ALTERNATING, Interval(0, 1), K=5, seed=3)
    assert a.radii == b.radii and a.patterns == b.patterns


def test_regularity_validation():
    with pytest.raises(ValueError):
        regularity_probe(SP1, ALTERNATING, Interval(0, 1), K=-1)
    with pytest.raises(ValueError):
        regularity_probe(SP1, ALTERNATING, Interval(0, 1), K=0, subsequences=[[0, 2]])
