import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenlab.geometry import (
    Ball,
    Cube,
    DegeneracyParams,
    HalfBall,
    Point,
    carre_du_champ,
    check_embeddings,
    check_intertwining,
    check_scaling_bounds,
    distance_D,
    doubling_ratio,
    find_kappa,
    piecewise_power,
    r_xi,
    region_contains,
    region_volume,
    scale_point,
)
from degenlab.geometry.checks import scaling_bound_terms
from degenlab.geometry.regions import bounding_box

deltas = st.floats(0.0, 0.95)
tangential = st.floats(0.0, 2.0)
coords = st.floats(-50.0, 50.0, allow_nan=False)


@st.composite
def params(draw, n=None, m=None):
    return DegeneracyParams(
        n=draw(st.integers(1, 3)) if n is None else n,
        m=draw(st.integers(0, 2)) if m is None else m,
        d1=draw(deltas),
        d1p=draw(deltas),
        d2=draw(tangential),
        d2p=draw(tangential),
    )


@st.composite
def params_and_points(draw, k=2):
    p = draw(params())
    pts = [np.array(draw(st.lists(coords, min_size=p.dim, max_size=p.dim))) for _ in range(k)]
    return (p, *pts)


# --- piecewise power and exponents ------------------------------------------


@pytest.mark.parametrize(
    "a, e, want",
    [
        (1.0, (0.3, 7.0), 1.0),
        (2.0, (0.5, 1.5), 2**1.5),
        (0.5, (0.5, 1.5), 0.5**0.5),
        (0.0, (0.0, 0.0), 1.0),
        (0.0, (0.5, 2.0), 0.0),
    ],
)
def test_piecewise_power_examples(a, e, want):
    assert piecewise_power(a, e) == pytest.approx(want, rel=1e-12)


def test_piecewise_power_rejects_negative_base():
    with pytest.raises(ValueError):
        piecewise_power(-1.0, (1.0, 1.0))


@given(st.floats(0.0, 1e3), st.floats(0.0, 1e3), st.floats(0.0, 4.0), st.floats(0.0, 4.0))
def test_piecewise_power_monotone(a, b, e0, e1):
    lo, hi = sorted((a, b))
    assert piecewise_power(lo, (e0, e1)) <= piecewise_power(hi, (e0, e1)) * (1 + 1e-12)


def test_exponent_examples():
    e = DegeneracyParams(n=1, m=1).exponents
    assert (e.alpha, e.alphap, e.beta, e.betap, e.gamma, e.gammap) == (1, 1, 1, 1, 0, 0)
    assert DegeneracyParams(d1p=0.5).exponents.alphap == pytest.approx(2.0)
    e = DegeneracyParams(m=1, d1=0.5, d2=0.5).exponents
    assert (e.alpha, e.beta, e.gamma) == pytest.approx((2.0, 2.0, 0.5))
    assert DegeneracyParams(d1=0.1, d1p=0.2, d2=0.7, d2p=0.3).exponents.deltaM == 0.7


@pytest.mark.parametrize(
    "kw", [dict(d1=1.0), dict(d1p=-0.1), dict(d2=-1.0), dict(n=0), dict(m=-1), dict(n=1.5)]
)
def test_params_reject_invalid(kw):
    with pytest.raises(ValueError):
        DegeneracyParams(**kw)


# --- scaling ---------------------------------------------------------------


def test_scale_point_examples():
    p = DegeneracyParams(n=1, m=1)
    assert scale_point(p, 1.0, Point([0.3], [2.0])) == Point([0.3], [2.0])
    assert scale_point(p, 4.0, Point([1.0], [1.0])) == Point([4.0], [4.0])
    q = DegeneracyParams(d1=0.5, d1p=0.5)
    assert scale_point(q, 0.5, Point([1.0])).x1[0] == pytest.approx(0.25)


@given(params(), st.floats(1e-2, 1e2), st.floats(1e-2, 1e2), st.lists(coords, min_size=5, max_size=5))
def test_scaling_semigroup_when_exponents_agree(p, s, t, xs):
    p = p.replace(d1p=p.d1, d2p=p.d2)
    x = np.array(xs[: p.dim])
    a1, a2 = scale_point(p, s, scale_point(p, t, x))
    b1, b2 = scale_point(p, s * t, x)
    np.testing.assert_allclose(a1, b1, rtol=1e-10, atol=1e-300)
    np.testing.assert_allclose(a2, b2, rtol=1e-10, atol=1e-300)


def test_scale_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        scale_point(DegeneracyParams(), 0.0, Point([1.0]))


# --- distance --------------------------------------------------------------


def test_distance_examples():
    p = DegeneracyParams(n=1, m=1)
    assert distance_D(p, Point([1.0], [0.0]), Point([0.0], [0.0])) == pytest.approx(1.0)
    assert distance_D(p, Point([0.0], [1.0]), Point([0.0], [0.0])) == pytest.approx(0.5)
    assert distance_D(p, Point([3.0], [-2.0]), Point([3.0], [-2.0])) == 0.0


@given(params_and_points())
def test_distance_symmetric_and_vanishing(args):
    p, x, y = args
    assert distance_D(p, x, y) == pytest.approx(distance_D(p, y, x), rel=1e-12)
    assert distance_D(p, x, x) == 0.0
    assert distance_D(p, x, y) >= 0.0


def test_distance_zero_on_degeneracy_surface():
    p = DegeneracyParams(n=1, m=1, d1=0.5, d2=1.0)
    assert distance_D(p, Point([0.0], [0.0]), Point([0.0], [0.0])) == 0.0


@given(params(), st.floats(1e-2, 1e2), st.lists(coords, min_size=10, max_size=10))
def test_distance_scales_linearly_when_exponents_agree(p, t, xs):
    p = p.replace(d1p=p.d1, d2p=p.d2)
    x, y = np.array(xs[: p.dim]), np.array(xs[5 : 5 + p.dim])
    d = distance_D(p, x, y)
    dt = distance_D(p, np.concatenate(scale_point(p, t, x)), np.concatenate(scale_point(p, t, y)))
    assert dt == pytest.approx(t * d, rel=1e-9, abs=1e-300)


def test_r_xi_examples():
    assert r_xi(DegeneracyParams(), [0.0]) == 0.0
    assert r_xi(DegeneracyParams(d1p=0.5), [4.0]) == pytest.approx(2.0)
    assert r_xi(DegeneracyParams(d1=0.5), [0.25]) == pytest.approx(0.5)


# --- regions ---------------------------------------------------------------


def test_cube_membership_examples():
    p = DegeneracyParams(n=1, m=1, d1=0.5, d1p=0.5)
    assert region_contains(p, Cube(0.5), Point([0.2], [0.3]))
    assert not region_contains(p, Cube(0.5), Point([0.3], [0.3]))


def test_ball_contains_center():
    p = DegeneracyParams(n=2, m=1, d1=0.3, d2=0.6)
    assert region_contains(p, Ball(Point([0, 0], [0]), 0.1), Point([0, 0], [0]))


def test_halfball_keeps_side():
    p = DegeneracyParams(n=1, m=1)
    hb = HalfBall(Point([0.0], [0.0]), 1.0)
    assert region_contains(p, hb, Point([0.1], [0.0]))
    assert not region_contains(p, hb, Point([-0.1], [0.0]))


def test_rhombus_volume():
    p = DegeneracyParams(n=1, m=1)
    vol, err = region_volume(p, Ball(Point([0.0], [0.0]), 1.0), "grid", 512)
    assert abs(vol - 4.0) <= max(err, 0.02 * 4)


def test_rhombus_volume_montecarlo():
    p = DegeneracyParams(n=1, m=1)
    vol, err = region_volume(p, Ball(Point([0.0], [0.0]), 1.0), "montecarlo", 200_000, seed=3)
    assert abs(vol - 4.0) <= 4 * err


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_euclidean_cube_volume(t):
    p = DegeneracyParams(n=1, m=1)
    vol, _ = region_volume(p, Cube(t), "grid", 64)
    assert vol == pytest.approx((2 * t) ** 2, rel=1e-12)


def test_ball_volume_monotone_in_r():
    p = DegeneracyParams(n=1, m=1, d1=0.25, d1p=0.25, d2=0.5, d2p=0.5)
    vols = [region_volume(p, Ball(Point([0.5], [0.2]), r), "grid", 128)[0] for r in (0.25, 0.5, 1.0, 2.0)]
    assert all(b >= a for a, b in zip(vols, vols[1:]))


def test_doubling_oracles():
    p = DegeneracyParams(n=1, m=1)
    for r in (0.1, 1.0, 7.0):
        assert doubling_ratio(p, Point([0.0], [0.0]), r, "grid", 256) == pytest.approx(4.0, rel=0.02)
    q = DegeneracyParams()
    assert doubling_ratio(q, Point([0.3]), 0.7, "grid", 1024) == pytest.approx(2.0, rel=0.01)


def test_ball_bounding_box_covers_ball():
    p = DegeneracyParams(n=1, m=1, d1=0.3, d1p=0.6, d2=0.5, d2p=1.2)
    c = Point([0.7], [-1.1])
    g = np.random.default_rng(5)
    for r in (0.05, 1.0, 20.0):
        lo, hi = bounding_box(p, Ball(c, r))
        pad = hi - lo
        pts = g.uniform(lo - pad, hi + pad, (50_000, 2))
        inside = region_contains(p, Ball(c, r), pts)
        assert inside.any()
        assert np.all((pts[inside] >= lo) & (pts[inside] <= hi))


# --- carre du champ --------------------------------------------------------


def test_carre_du_champ_examples():
    p = DegeneracyParams(n=1, m=1, d1=0.3)
    assert carre_du_champ(p, [0.0], [0.0], Point([2.0], [1.0])) == 0.0
    q = DegeneracyParams()
    for x in (0.0, 0.5, 9.0):
        assert carre_du_champ(q, [1.0], [], Point([x])) == 1.0
    r = DegeneracyParams(d1=0.5, d1p=0.5)
    assert carre_du_champ(r, [1.0], [], Point([4.0])) == pytest.approx(4.0)


# --- seeded suites ---------------------------------------------------------


def test_scaling_bound_hand_example():
    terms = scaling_bound_terms(np.array([4.0]), np.array([0.5]), np.array([0.5]), np.array([0.0]))
    lo, hi = terms["prop_lower"]
    assert lo[0] == pytest.approx(2**-1 * 0.5**0.5)
    assert hi[0] == pytest.approx(1.0)
    for lo, hi in terms.values():
        assert np.all(lo <= hi)


def test_scaling_suite_clean_and_deterministic():
    a = check_scaling_bounds(20_000, seed=7)
    b = check_scaling_bounds(20_000, seed=7)
    assert a["violations"] == 0
    assert a == b


def test_embedding_suite_small():
    r = check_embeddings(5_000, seed=2, kappa_params=2)
    assert r["violations"] == 0


def test_find_kappa_oracles():
    assert find_kappa(DegeneracyParams(n=1, m=1))["kappa"] == pytest.approx(0.5, abs=0.01)
    assert find_kappa(DegeneracyParams())["kappa"] == pytest.approx(1.0, abs=0.01)


def test_intertwining_equal_exponents_exact():
    p = DegeneracyParams(n=1, m=1, d1=0.3, d1p=0.3, d2=0.7, d2p=0.7)
    r = check_intertwining(p, 2_000, seed=1)
    assert r["violations"] == 0
    assert r["exact_scaling_max_rel_err"] <= 1e-10


def test_intertwining_violations_are_mixed_branch():
    """With d != d' the claimed sandwich fails, but only when t, |x1| and
    |sigma_t x1| do not all lie on the same side of 1."""
    p = DegeneracyParams(n=1, m=1, d1=0.25, d1p=0.5, d2=0.5, d2p=1.0)
    r = check_intertwining(p, 2_000, seed=1)
    assert r["violations"] == r["violations_mixed_branch"]
    assert r["exact_scaling_max_rel_err"] is None


def test_intertwining_counterexample_by_hand():
    # m = 0, d = 1/2, d' = 0, x = 0.01, t = 10 >= 1 so sigma_t x = t^alpha' x = 0.1.
    # For phi(y) = y: Gamma(phi o sigma_t)(x) = w(x) t^2 = 1 while
    # t^2 Gamma(phi)(sigma_t x) = t^2 w(0.1) = 10, a ratio of 0.1 below the
    # lower sandwich factor 2^(-4 dM) = 0.25.
    p = DegeneracyParams(d1=0.5, d1p=0.0)
    x, t = 0.01, 10.0
    sx = float(scale_point(p, t, Point([x])).x1[0])
    assert sx == pytest.approx(0.1)
    w = lambda y: float(piecewise_power(abs(y), (2 * p.d1, 2 * p.d1p)))  # noqa: E731
    ratio = w(x) * (sx / x) ** 2 / (t**2 * w(sx))
    assert ratio == pytest.approx(0.1)
    assert ratio < 2.0 ** (-4 * p.exponents.deltaM)
