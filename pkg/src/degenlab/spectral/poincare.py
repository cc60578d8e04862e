"""Poincare constants as rescaled spectral gaps, and radius sweeps."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from ..geometry import Ball, Cube, DegeneracyParams, HalfBall, HalfInterval, Interval, Point, Region
from ..geometry.regions import region_radius
from .eigen import spectral_gap
from .forms import assemble_interval_form, assemble_region_form


@dataclass
class PoincareEstimate:
    region: Region
    resolution: int
    gap: float
    normalized: float
    cells: int
    residual: float
    iterations: int
    radius: float
    extra: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {
            "r": self.radius,
            "gap": self.gap,
            "normalized": self.normalized,
            "cells": self.cells,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def cube_h0(p: DegeneracyParams, reg: Region, resolution: int) -> float | None:
    """Central cell width for large one-dimensional cubes.

    Once the cube half-width T exceeds 1 the coefficient grows like
    |x|^(2 d1') while the low modes vary on the unit scale around the origin;
    the x1 axis is then sinh-graded so that |x1| < 1 still gets about
    resolution / 16 cells.
    """
    if not isinstance(reg, Cube) or p.m:
        return None
    e = p.exponents
    half = float(np.power(reg.t, e.alpha if reg.t <= 1 else e.alphap))
    if half <= 1:
        return None
    return 32.0 / resolution


def poincare_constant(p: DegeneracyParams, reg: Region, resolution: int, resolution2: int | None = None) -> PoincareEstimate:
    """Gap of the Neumann form on reg, and gap * r^2 with r the region radius."""
    if isinstance(reg, (Interval, HalfInterval)):
        form = assemble_interval_form(p, reg, resolution)
    else:
        form = assemble_region_form(p, reg, resolution, resolution2, graded_h0=cube_h0(p, reg, resolution))
    res = spectral_gap(form)
    r = region_radius(p, reg)
    return PoincareEstimate(
        region=reg,
        resolution=resolution,
        gap=res.gap,
        normalized=res.gap * r * r,
        cells=form.size,
        residual=res.residual,
        iterations=res.iterations,
        radius=r,
        extra={"dropped_cells": form.dropped_cells},
    )


def family_region(p: DegeneracyParams, family: str, r: float, center: Point | None = None) -> Region:
    if family == "cube":
        return Cube(r)
    if family == "ball":
        c = center if center is not None else Point([0.0] * p.n, [0.0] * p.m)
        return Ball(c, r)
    if family in ("halfball", "halfball+", "halfball-"):
        c = center if center is not None else Point([0.0] * p.n, [0.0] * p.m)
        return HalfBall(c, r, -1 if family.endswith("-") else 1)
    if family == "interval":
        return Interval(-r, r)
    if family == "halfinterval":
        return HalfInterval(r)
    raise ValueError(f"unknown region family {family!r}")


def fit_slope(radii, values) -> float:
    """Least-squares slope of log(values) on log(radii) over the large-radius half."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(radii) < 3:
        raise ValueError("slope fitting needs at least 3 radii")
    k = max(len(radii) - len(radii) // 2, 2)
    x, y = np.log(radii[-k:]), np.log(values[-k:])
    return float(np.polyfit(x, y, 1)[0])


def poincare_sweep(
    p: DegeneracyParams,
    family: str,
    radii,
    resolution: int,
    resolution2: int | None = None,
    center: Point | None = None,
    jobs: int = 1,
) -> dict:
    """Poincare estimates over a list of radii plus the fitted log-log slope.

    Rows are returned in input order whatever the number of workers.
    """
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be sorted ascending without repeats")
    regions = [family_region(p, family, r, center) for r in radii]

    def run(reg):
        return poincare_constant(p, reg, resolution, resolution2)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(run, regions))
    else:
        rows = [run(reg) for reg in regions]
    slope = fit_slope(radii, [r.normalized for r in rows]) if len(radii) >= 3 else None
    norm = [r.normalized for r in rows]
    return {
        "family": family,
        "params": p.as_dict(),
        "resolution": resolution,
        "rows": [r.row() for r in rows],
        "slope": slope,
        "max_over_min": max(norm) / min(norm) if min(norm) > 0 else float("inf"),
    }


def _first_bessel_zero(order: float) -> float:
    z = np.linspace(1e-9, 20.0, 20001)
    v = special.jv(order, z)
    i = int(np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0][0])
    return float(optimize.brentq(lambda s: special.jv(order, s), z[i], z[i + 1], xtol=1e-15))


def interval_gap_exact(d1: float) -> float:
    """Neumann gap of -(|x|^(2 d1) u')' on [-1, 1] for d1 in [0, 1/2).

    With nu = (1 - 2 d1) / (2 - 2 d1) the odd and even modes are
    z^nu J_(+-nu)(z) with z = sqrt(lambda) |x|^(1 - d1) / (1 - d1); the
    Neumann condition at 1 puts z(1) at a zero of J_(nu-1) or J_(1-nu).
    """
    if not 0.0 <= d1 < 0.5:
        raise ValueError("exact interval gap needs d1 in [0, 1/2)")
    nu = (1.0 - 2.0 * d1) / (2.0 - 2.0 * d1)
    z = min(_first_bessel_zero(nu - 1.0), _first_bessel_zero(1.0 - nu))
    return (1.0 - d1) ** 2 * z * z
