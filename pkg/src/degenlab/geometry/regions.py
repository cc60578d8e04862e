"""Integration domains, membership, bounding boxes and Lebesgue volumes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DegeneracyParams, Point, _norm, _split, distance_D, piecewise_power, r_xi


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("Interval needs a < b")

    @property
    def radius(self) -> float:
        return 0.5 * (self.b - self.a)


@dataclass(frozen=True)
class HalfInterval:
    """The interval (0, b)."""

    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("HalfInterval needs b > 0")

    @property
    def radius(self) -> float:
        return self.b


@dataclass(frozen=True)
class Cube:
    """The anisotropic cube C_t = sigma_t([-1, 1]^(n+m)) with open faces."""

    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("Cube needs t > 0")

    @property
    def radius(self) -> float:
        return self.t


@dataclass(frozen=True)
class ScaledBox:
    """C(xi; kappa): Euclidean balls around xi1 and 0 scaled by r_xi."""

    xi1: tuple
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "xi1", tuple(float(v) for v in np.atleast_1d(self.xi1)))
        if not 0 < self.kappa <= 1:
            raise ValueError("ScaledBox needs kappa in (0, 1]")
        if not any(self.xi1):
            raise ValueError("ScaledBox needs xi1 != 0")

    @property
    def radius(self) -> float:
        # kappa * r_xi is only known with params; see region_radius
        return float("nan")


@dataclass(frozen=True)
class Ball:
    center: Point
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("Ball needs r > 0")

    @property
    def radius(self) -> float:
        return self.r


@dataclass(frozen=True)
class HalfBall:
    """Ball intersected with {sign * x1[0] >= 0}."""

    center: Point
    r: float
    sign: int = 1

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("HalfBall needs r > 0")
        if self.sign not in (1, -1):
            raise ValueError("HalfBall sign must be +1 or -1")

    @property
    def radius(self) -> float:
        return self.r


Region = Interval | HalfInterval | Cube | ScaledBox | Ball | HalfBall


def region_radius(p: DegeneracyParams, reg: Region) -> float:
    if isinstance(reg, ScaledBox):
        return reg.kappa * float(r_xi(p, reg.xi1))
    return reg.radius


def _check_region(p: DegeneracyParams, reg: Region) -> None:
    if isinstance(reg, (Interval, HalfInterval)) and not (p.n == 1 and p.m == 0):
        raise ValueError("interval regions need n=1, m=0")
    if isinstance(reg, ScaledBox) and len(reg.xi1) != p.n:
        raise ValueError("ScaledBox xi1 has the wrong dimension")
    if isinstance(reg, (Ball, HalfBall)):
        reg.center.check(p)
    if isinstance(reg, HalfBall) and p.n != 1:
        raise ValueError("half balls need n=1")


def region_contains(p: DegeneracyParams, reg: Region, x):
    """Strict membership of x (a Point or a batch of points) in reg."""
    _check_region(p, reg)
    x1, x2 = _split(p, x)
    e = p.exponents
    if isinstance(reg, Interval):
        inside = (x1[..., 0] > reg.a) & (x1[..., 0] < reg.b)
    elif isinstance(reg, HalfInterval):
        inside = (x1[..., 0] > 0) & (x1[..., 0] < reg.b)
    elif isinstance(reg, Cube):
        inside = np.max(np.abs(x1), axis=-1) < piecewise_power(reg.t, (e.alpha, e.alphap))
        if p.m:
            inside &= np.max(np.abs(x2), axis=-1) < piecewise_power(reg.t, (e.beta, e.betap))
    elif isinstance(reg, ScaledBox):
        rx = float(r_xi(p, reg.xi1))
        xi1 = np.array(reg.xi1)
        inside = _norm(x1 - xi1) < 0.5 * reg.kappa * piecewise_power(rx, (e.alpha, e.alphap))
        if p.m:
            inside &= _norm(x2) < 0.5 * reg.kappa * piecewise_power(rx, (e.beta, e.betap))
    elif isinstance(reg, (Ball, HalfBall)):
        c1, c2 = reg.center.arrays()
        inside = np.asarray(distance_D(p, (x1, x2), (c1, c2))) < reg.r
        if isinstance(reg, HalfBall):
            inside &= reg.sign * x1[..., 0] >= 0
    else:
        raise TypeError(f"unsupported region {reg!r}")
    inside = np.asarray(inside)
    return bool(inside) if inside.ndim == 0 else inside


def _sup_below(g, scale: float) -> float:
    """Largest u >= 0 with g(u) < 0, for g negative near 0 and eventually positive."""
    top = scale * 1e12
    while g(np.array([top]))[0] < 0:
        top *= 1e6
        if not np.isfinite(top):
            raise ArithmeticError("ball extent search did not terminate")
    grid = np.geomspace(scale * 1e-12, top, 2401)
    vals = g(grid)
    neg = np.nonzero(vals < 0)[0]
    if len(neg) == 0:
        return 0.0
    k = neg[-1]
    lo, hi = grid[k], grid[k + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g(np.array([mid]))[0] < 0:
            lo = mid
        else:
            hi = mid
    return hi


def ball_extents(p: DegeneracyParams, center: Point, r: float):
    """Euclidean radii (U1, U2) with B(center; r) inside the product of balls.

    Uses only monotonicity of the piecewise powers, so the bound is rigorous.
    """
    e = p.exponents
    c1, c2 = center.arrays()
    a1, a2 = float(_norm(c1)), float(_norm(c2)) if p.m else 0.0

    def g1(u):
        return u - r * piecewise_power(2 * a1 + u, (p.d1, p.d1p))

    u1 = _sup_below(g1, max(r, a1, 1.0))
    if not p.m:
        return u1, 0.0
    w = np.max(piecewise_power(np.array([2 * a1 + u1]), (p.d2, p.d2p)))

    def g2(v):
        return v - r * (w + piecewise_power(2 * a2 + v, (e.gamma, e.gammap)))

    u2 = _sup_below(g2, max(r, a2, 1.0))
    return u1, u2


def bounding_box(p: DegeneracyParams, reg: Region):
    """Axis-aligned (lo, hi) arrays of length n+m containing the region."""
    _check_region(p, reg)
    e = p.exponents
    if isinstance(reg, Interval):
        return np.array([reg.a]), np.array([reg.b])
    if isinstance(reg, HalfInterval):
        return np.array([0.0]), np.array([reg.b])
    if isinstance(reg, Cube):
        h1 = piecewise_power(reg.t, (e.alpha, e.alphap))
        h2 = piecewise_power(reg.t, (e.beta, e.betap))
        half = np.r_[np.full(p.n, h1), np.full(p.m, h2)]
        return -half, half
    if isinstance(reg, ScaledBox):
        rx = float(r_xi(p, reg.xi1))
        h1 = 0.5 * reg.kappa * piecewise_power(rx, (e.alpha, e.alphap))
        h2 = 0.5 * reg.kappa * piecewise_power(rx, (e.beta, e.betap))
        c = np.r_[np.array(reg.xi1), np.zeros(p.m)]
        half = np.r_[np.full(p.n, h1), np.full(p.m, h2)]
        return c - half, c + half
    if isinstance(reg, (Ball, HalfBall)):
        u1, u2 = ball_extents(p, reg.center, reg.r)
        c = np.r_[reg.center.arrays()]
        half = np.r_[np.full(p.n, u1), np.full(p.m, u2)] * (1 + 1e-9)
        lo, hi = c - half, c + half
        if isinstance(reg, HalfBall):
            if reg.sign > 0:
                lo[0] = max(lo[0], 0.0)
            else:
                hi[0] = min(hi[0], 0.0)
            if not lo[0] < hi[0]:
                raise ValueError("half ball does not meet its half space")
        return lo, hi
    raise TypeError(f"unsupported region {reg!r}")


MIN_RESOLUTION = 8
MIN_SAMPLES = 100


def region_volume(
    p: DegeneracyParams,
    reg: Region,
    method: str = "grid",
    resolution: int = 256,
    seed: int = 0,
):
    """Lebesgue measure of reg with an error proxy.

    ``grid`` counts cell centres on a ``resolution``-per-axis raster of the
    bounding box and reports half the volume of the cells where membership
    changes between neighbours. ``montecarlo`` draws ``resolution`` uniform
    samples from the bounding box and reports one standard error.
    """
    lo, hi = bounding_box(p, reg)
    dim = len(lo)
    box_vol = float(np.prod(hi - lo))
    if method == "grid":
        if resolution < MIN_RESOLUTION:
            raise ValueError(f"grid resolution must be >= {MIN_RESOLUTION}")
        axes = [lo[k] + (np.arange(resolution) + 0.5) * (hi[k] - lo[k]) / resolution for k in range(dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        inside = np.asarray(region_contains(p, reg, mesh))
        cell = box_vol / resolution**dim
        edge = np.zeros_like(inside)
        for k in range(dim):
            d = np.diff(inside.astype(np.int8), axis=k) != 0
            sl_a = [slice(None)] * dim
            sl_b = [slice(None)] * dim
            sl_a[k] = slice(0, -1)
            sl_b[k] = slice(1, None)
            edge[tuple(sl_a)] |= d
            edge[tuple(sl_b)] |= d
        return float(inside.sum()) * cell, 0.5 * float(edge.sum()) * cell
    if method == "montecarlo":
        if resolution < MIN_SAMPLES:
            raise ValueError(f"Monte Carlo needs at least {MIN_SAMPLES} samples")
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        pts = lo + (hi - lo) * rng.random((resolution, dim))
        frac = float(np.mean(region_contains(p, reg, pts)))
        return frac * box_vol, box_vol * np.sqrt(frac * (1 - frac) / resolution)
    raise ValueError(f"unknown volume method {method!r}")


def doubling_ratio(
    p: DegeneracyParams,
    center: Point,
    r: float,
    method: str = "grid",
    resolution: int = 256,
    seed: int = 0,
) -> float:
    """|B(center; 2r)| / |B(center; r)| with shared method settings."""
    big, _ = region_volume(p, Ball(center, 2 * r), method, resolution, seed)
    small, _ = region_volume(p, Ball(center, r), method, resolution, seed)
    if small <= 0:
        raise ArithmeticError("ball volume estimate is zero; increase the resolution")
    return big / small
