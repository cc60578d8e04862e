import math
import warnings

import numpy as np
import pytest
from scipy import stats

from degenlab.geometry import Cube, DegeneracyParams, Interval, Point, distance_D
from degenlab.heat import (
    HeatWarning,
    crossing_mass,
    default_domain,
    evolve_kernel,
    export_kernel_csv,
    fit_gaussian_bounds,
    kernel_symmetry_check,
    ondiag_lower,
    semigroup_check,
)

P0 = DegeneracyParams()
P25 = DegeneracyParams(d1=0.25, d1p=0.25)


@pytest.fixture(scope="module")
def gaussian_field():
    return evolve_kernel(P0, Interval(-8, 8), 0.0, 0.25, 1e-3, 2049)


def test_center_value_oracle(gaussian_field):
    assert gaussian_field.value_at(0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=0.01)


@pytest.mark.parametrize("y", [-1.5, -0.5, 0.25, 0.75, 1.25])
def test_gaussian_probe_points(gaussian_field, y):
    want = math.exp(-y * y) / math.sqrt(math.pi)  # (4 pi t)^(-1/2) exp(-y^2 / 4t) at t = 1/4
    assert gaussian_field.value_at(y) == pytest.approx(want, rel=0.01)


def test_mass_and_positivity(gaussian_field):
    f = gaussian_field
    assert f.mass == pytest.approx(1.0, abs=1e-9)
    assert f.max_mass_drift <= 1e-9
    assert f.mass_increase <= 1e-10
    assert f.min_ratio >= -1e-10
    assert f.values.min() >= -1e-12 * f.values.max()


def test_time_zero_is_discrete_delta():
    f = evolve_kernel(P0, Interval(-1, 1), 0.2, 0.0, 1e-3, 101)
    expected = np.zeros(101)
    expected[f.source] = 1 / f.form.cell_measure[f.source]
    np.testing.assert_array_equal(f.values, expected)
    assert f.nodes[f.source, 0] == pytest.approx(0.2, abs=0.01)


@pytest.mark.parametrize("p", [DegeneracyParams(d1=0.6, d1p=0.2), DegeneracyParams(n=1, m=1, d1=0.3, d2=0.5)])
def test_mass_conserved_for_any_params(p):
    reg = Interval(-3, 3) if p.m == 0 else Cube(2.0)
    x0 = 0.4 if p.m == 0 else Point([0.4], [0.1])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HeatWarning)
        f = evolve_kernel(p, reg, x0, 0.3, 1e-2, 257 if p.m == 0 else 33)
    assert f.mass == pytest.approx(1.0, abs=1e-9)


def test_symmetry():
    assert kernel_symmetry_check(P0, Interval(-4, 4), 0.5, -0.25, 0.2, 1e-3, 2049) <= 1e-6
    assert kernel_symmetry_check(P25, Interval(-4, 4), 0.5, -0.25, 0.2, 1e-3, 2049) <= 1e-4
    assert kernel_symmetry_check(P25, Interval(-4, 4), 0.5, 0.5, 0.2, 1e-3, 257) == 0.0


def test_semigroup():
    assert semigroup_check(P25, Interval(-5, 5), 0.3, 0.1, 1e-3, 1025) <= 1e-6


def test_default_domain_distance():
    x0, t = np.array([0.5]), 0.3
    dom = default_domain(P25, x0, t)
    e = P25.exponents
    edge = dom.t ** (e.alpha if dom.t <= 1 else e.alphap)
    assert distance_D(P25, np.array([edge]), x0) >= 6 * math.sqrt(t)


def test_boundary_warning_on_small_domain():
    with pytest.warns(HeatWarning):
        f = evolve_kernel(P0, Interval(-1, 1), 0.0, 1.0, 1e-2, 129)
    assert f.warnings and f.boundary_fraction > 1e-6


def test_ondiag_anchor_and_lower_bound():
    times = [2.0**k for k in range(-4, 3)]
    anchor = ondiag_lower(P0, [0.0], times, 1025)
    for row in anchor["rows"]:
        assert row["product"] == pytest.approx(1 / math.sqrt(math.pi), rel=0.02)
    assert ondiag_lower(P25, [0.0, 0.7], times[::2], 1025)["min"] > 0.2


def test_gaussian_fit_delta0():
    r = fit_gaussian_bounds(P0, 0.0, [0.25, 0.5, 1.0], 1025)
    assert r["omegaPrime"] == pytest.approx(0.25, rel=0.15)
    assert r["omega"] > 0
    assert "quasi-distance" in r["distance"]


def test_gaussian_fit_needs_three_times():
    with pytest.raises(ValueError):
        fit_gaussian_bounds(P0, 0.0, [0.5], 257)


def test_crossing_control_matches_gaussian_tail():
    r = crossing_mass(P0, 0.5, 0.5, 2049, 1e-3, Interval(-2049 / 512, 2049 / 512))
    assert r["crossing"] == pytest.approx(stats.norm.cdf(-0.5), rel=0.02)


def test_crossing_decreases_under_refinement_when_nonergodic():
    p = DegeneracyParams(d1=0.75, d1p=0.75)
    vals = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HeatWarning)
        for N in (257, 513, 1025):
            L = 4.0 * N / (N - 1)
            vals.append(crossing_mass(p, 0.5, 0.5, N, 1e-3, Interval(-L, L))["crossing"])
    assert vals[0] > vals[1] > vals[2] > 0


def test_crossing_exceptional_case_decreases_with_x0():
    p = DegeneracyParams(d1=0.0, d1p=0.75)
    vals = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HeatWarning)
        for x0 in (0.5, 1.0, 2.0):
            vals.append(crossing_mass(p, x0, 0.5, 1025, 1e-3, Interval(-16.0, 16.0))["crossing"])
    assert vals[0] > vals[1] > vals[2] > 0


def test_crossing_rejects_bad_source():
    with pytest.raises(ValueError):
        crossing_mass(P0, -0.5, 0.1, 129)


def test_export_csv_shape():
    f = evolve_kernel(P0, Interval(-1, 1), 0.0, 0.01, 1e-3, 9)
    text = export_kernel_csv(f)
    lines = text.split("\n")
    assert lines[0] == "x1,value" and text.endswith("\n") and "\r" not in text
    assert len(lines) == 11
