import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degenlab import sde
from degenlab.sde import (
    HittingExperiment,
    TestFunction,
    ends_transform_check,
    hitting_oracle,
    radial_measure_check,
    scale_function,
    simulate_hitting,
)


def test_oracle_brownian_midpoint():
    assert hitting_oracle(0.0, 0.0, 5.0, 10.0) == pytest.approx(0.5, abs=1e-15)


def test_oracle_degenerate_example():
    # s(5) = 1 + 2(1 - 5^-1/2), s(100) = 1 + 2(1 - 1/10) = 2.8
    s5 = 1 + 2 * (1 - 5**-0.5)
    assert hitting_oracle(0.75, 0.0, 5.0, 100.0) == pytest.approx((2.8 - s5) / 2.8, abs=1e-12)
    assert hitting_oracle(0.75, 0.0, 5.0, 100.0) == pytest.approx(0.2480, abs=1e-4)


def test_scale_function_closed_forms():
    assert scale_function(0.5, math.e) == pytest.approx(2.0)
    assert scale_function(0.75, 1e12) == pytest.approx(3.0, abs=1e-5)
    assert scale_function(0.0, 7.0) == pytest.approx(7.0)
    assert scale_function(0.25, 0.3) == pytest.approx(0.3)


def test_scale_function_matches_quadrature():
    from scipy import integrate

    for dp in (0.1, 0.5, 0.8):
        val, _ = integrate.quad(lambda y: 1 / sde.coefficient(dp, y), 0, 9, points=[1.0])
        assert scale_function(dp, 9.0) == pytest.approx(val, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.95), st.floats(-50, 50), st.floats(0.01, 10))
def test_scale_function_odd_and_increasing(dp, x, h):
    assert scale_function(dp, -x) == pytest.approx(-scale_function(dp, x), abs=1e-12)
    assert scale_function(dp, x + h) > scale_function(dp, x)


def test_oracle_rejects_bad_barriers():
    with pytest.raises(ValueError):
        hitting_oracle(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        hitting_oracle(0.0, 0.0, 11.0, 10.0)
    with pytest.raises(ValueError):
        hitting_oracle(1.0, 0.0, 1.0, 2.0)


@pytest.mark.parametrize("dp,b", [(0.0, 10.0), (0.75, 30.0)])
def test_simulation_matches_oracle(dp, b):
    e = simulate_hitting(HittingExperiment(dp, 5.0, 0.0, b, dt=1e-2, nPaths=4000, seed=3))
    assert e.censored == 0
    assert abs(e.empirical - e.oracle) <= 3 * e.stderr


def test_simulation_deterministic():
    runs = [simulate_hitting(HittingExperiment(0.5, 2.0, 0.0, 6.0, dt=1e-2, nPaths=500, seed=7)) for _ in range(2)]
    assert runs[0].as_dict() == runs[1].as_dict()
    other = simulate_hitting(HittingExperiment(0.5, 2.0, 0.0, 6.0, dt=1e-2, nPaths=500, seed=8))
    assert other.empirical != runs[0].empirical


def test_simulation_dt_refinement_stable():
    kw = dict(deltap=0.5, x0=2.0, a=0.0, b=6.0, nPaths=4000, seed=1)
    coarse = simulate_hitting(HittingExperiment(dt=2e-2, **kw))
    fine = simulate_hitting(HittingExperiment(dt=5e-3, **kw))
    assert abs(coarse.empirical - fine.empirical) <= 3 * math.hypot(coarse.stderr, fine.stderr)


def test_censoring_raises(monkeypatch):
    monkeypatch.setattr(sde, "STEP_CAP", 5)
    with pytest.raises(ArithmeticError):
        simulate_hitting(HittingExperiment(0.0, 5.0, 0.0, 10.0, dt=1e-3, nPaths=200))


def test_simulation_input_validation():
    with pytest.raises(ValueError):
        simulate_hitting(HittingExperiment(0.0, 5.0, 0.0, 10.0, nPaths=10))
    with pytest.raises(ValueError):
        simulate_hitting(HittingExperiment(0.0, 5.0, 0.0, 10.0, dt=0.0, nPaths=200))


def test_ends_transform_bundled():
    r = ends_transform_check(0.5)
    assert r["alpha"] == pytest.approx(2.0)
    assert len(r["rows"]) == 5 and r["pass"]
    for row in r["rows"]:
        assert row["isometry_rel_err"] <= 1e-6 and row["form_rel_err"] <= 1e-6
    assert ends_transform_check(0.7)["pass"]


def test_ends_transform_zero_function():
    zero = TestFunction("zero", lambda y: 0.0, lambda y: 0.0, 1.0)
    row = ends_transform_check(0.5, [zero])["rows"][0]
    assert row["norm_phi"] == 0 and row["form_Phi_mu"] == 0 and row["pass"]


def test_ends_transform_detects_wrong_jacobian(monkeypatch):
    real = sde.ends_map_derivative
    monkeypatch.setattr(sde, "ends_map_derivative", lambda a, x: 1.01 * real(a, x))
    assert not ends_transform_check(0.5)["pass"]


def test_ends_transform_rejects_small_d1():
    with pytest.raises(ValueError):
        ends_transform_check(0.25)


@pytest.mark.parametrize("k", [2, 3])
def test_radial_measure(k):
    for row in radial_measure_check(k):
        assert row["weight"] == pytest.approx(row["expected"], rel=1e-12)
        assert row["shell_density"] == pytest.approx(row["expected"], rel=1e-8)


def test_ends_map_inverse_roundtrip():
    x = np.linspace(-5, 5, 41)
    np.testing.assert_allclose(sde.ends_inverse(3.0, sde.ends_map(3.0, x)), x, atol=1e-12)
