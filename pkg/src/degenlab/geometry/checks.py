"""Seeded randomized verification of the explicit scaling and embedding
inequalities.

Each suite returns a plain dict (JSON ready) with violation counts and the
worst observed margin. A violation is only counted when an inequality fails
by more than ``REL_TOL`` relative, which absorbs floating point rounding in
the two sides.
"""
from __future__ import annotations

import numpy as np

from .. import rng as rngmod
from .core import DegeneracyParams, Point, carre_du_champ, distance_D, piecewise_power
from .regions import Ball, Cube, bounding_box, region_contains

REL_TOL = 1e-12
LOG_LO, LOG_HI = 1e-3, 1e3


def _pp(a, lo_exp, hi_exp):
    """Elementwise a^(lo_exp, hi_exp) with array-valued exponents."""
    return np.where(a <= 1.0, a**lo_exp, a**hi_exp)


def scaling_bound_terms(s, t, d, dp):
    """All sides of the two-sided scaling bound and its t<=1 / t>=1 refinements.

    Returns a dict name -> (smaller side, larger side); each must satisfy
    smaller <= larger.
    """
    st = _pp(s * t, d, dp)
    ss = _pp(s, d, dp)
    dmax, dmin = np.maximum(d, dp), np.minimum(d, dp)
    out = {
        "prop_lower": (2.0 ** (-2 * dmax) * ss * _pp(t, dmax, dmin), st),
        "prop_upper": (st, 2.0 ** (2 * dmax) * ss * _pp(t, dmin, dmax)),
    }
    small = t <= 1
    up = dp >= d
    # t in (0, 1]
    lo_small = np.where(up, 2.0 ** (-dp - d) * ss * t**dp, 2.0 ** (-2 * d) * ss * t**d)
    hi_small = np.where(up, 2.0 ** (2 * dp) * ss * t**d, 2.0 ** (dp + d) * ss * t**dp)
    # t >= 1
    lo_big = np.where(up, 2.0 ** (-dp - d) * ss * t**d, 2.0 ** (-dp - d) * ss * t**dp)
    hi_big = np.where(up, 2.0 ** (dp + d) * ss * t**dp, 2.0 ** (dp + d) * ss * t**d)
    out["small_t_lower"] = (np.where(small, lo_small, 0.0), np.where(small, st, 1.0))
    out["small_t_upper"] = (np.where(small, st, 0.0), np.where(small, hi_small, 1.0))
    out["large_t_lower"] = (np.where(~small, lo_big, 0.0), np.where(~small, st, 1.0))
    out["large_t_upper"] = (np.where(~small, st, 0.0), np.where(~small, hi_big, 1.0))
    return out


def _margin(lo, hi):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(hi > 0, (hi - lo) / hi, np.where(lo <= 0, 0.0, -np.inf))


def check_scaling_bounds(trials: int = 100_000, seed: int = 0) -> dict:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts: dict[str, int] = {}
    worst: dict[str, float] = {}
    for start, stop, g in rngmod.blocks(seed, "scaling", trials):
        k = stop - start
        s = rngmod.log_uniform(g, LOG_LO, LOG_HI, k)
        t = rngmod.log_uniform(g, LOG_LO, LOG_HI, k)
        d = g.uniform(0, 1, k)
        dp = g.uniform(0, 1, k)
        for name, (lo, hi) in scaling_bound_terms(s, t, d, dp).items():
            counts[name] = counts.get(name, 0) + int(np.sum(lo > hi * (1 + REL_TOL)))
            worst[name] = min(worst.get(name, np.inf), float(np.min(_margin(lo, hi))))
    return {
        "suite": "scaling",
        "trials": trials,
        "seed": seed,
        "violations": sum(counts.values()),
        "by_bound": counts,
        "worst_margin": min(worst.values()),
        "worst_margin_by_bound": worst,
    }


# Normal exponents are capped so that t^(alpha, alpha') stays finite in
# double precision over the sampled t range.
D1_MAX = 0.9


def random_params(g: np.random.Generator, n_max: int = 3, m_max: int = 2) -> DegeneracyParams:
    return DegeneracyParams(
        n=int(g.integers(1, n_max + 1)),
        m=int(g.integers(0, m_max + 1)),
        d1=float(g.uniform(0, D1_MAX)),
        d1p=float(g.uniform(0, D1_MAX)),
        d2=float(g.uniform(0, 2)),
        d2p=float(g.uniform(0, 2)),
    )


def _uniform_in_ball(g, k, dim, radius):
    if dim == 0:
        return np.zeros((k, 0))
    v = g.standard_normal((k, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * (radius * g.random(k) ** (1.0 / dim))[:, None]


def lemma_cube_in_ball_violations(p: DegeneracyParams, g, k: int) -> tuple[int, float]:
    """Sample x in C_t and test D(x, 0) < 4 (n+m) t."""
    t = rngmod.log_uniform(g, LOG_LO, LOG_HI, k)
    frac = g.random((k, p.dim)) * 2 - 1
    e = p.exponents
    half = np.empty((k, p.dim))
    half[:, : p.n] = piecewise_power(t, (e.alpha, e.alphap))[:, None]
    half[:, p.n :] = piecewise_power(t, (e.beta, e.betap))[:, None]
    x = frac * half
    dist = np.asarray(distance_D(p, x, np.zeros(p.dim)))
    bound = 4 * p.dim * t
    return int(np.sum(dist >= bound * (1 + REL_TOL))), float(np.min((bound - dist) / bound))


def lemma_box_in_ball_violations(p: DegeneracyParams, g, k: int) -> tuple[int, float]:
    """Sample x in C(xi; kappa) and test D(x, (xi1, 0)) < kappa r_xi."""
    e = p.exponents
    dirs = g.standard_normal((k, p.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    xi1 = dirs * rngmod.log_uniform(g, LOG_LO, LOG_HI, k)[:, None]
    kappa = 1.0 - g.random(k)
    rx = piecewise_power(np.linalg.norm(xi1, axis=1), (1 - p.d1, 1 - p.d1p))
    rad1 = 0.5 * kappa * piecewise_power(rx, (e.alpha, e.alphap))
    rad2 = 0.5 * kappa * piecewise_power(rx, (e.beta, e.betap))
    u1 = _uniform_in_ball(g, k, p.n, 1.0) * rad1[:, None]
    u2 = _uniform_in_ball(g, k, p.m, 1.0) * rad2[:, None]
    dist = np.asarray(distance_D(p, (xi1 + u1, u2), (xi1, np.zeros((k, p.m)))))
    bound = kappa * rx
    return int(np.sum(dist >= bound * (1 + REL_TOL))), float(np.min((bound - dist) / bound))


KAPPA_TOL = 1e-3


def _outside_ratios(p: DegeneracyParams, t: float, g, k: int) -> np.ndarray:
    """D(x, 0)/t for points x on the boundary of C_t and in C_2t minus C_t."""
    _, half = bounding_box(p, Cube(t))
    # boundary faces
    x = (g.random((k, p.dim)) * 2 - 1) * half
    face = g.integers(0, p.dim, k)
    sign = np.where(g.random(k) < 0.5, -1.0, 1.0)
    x[np.arange(k), face] = sign * half[face]
    # shell C_2t \ C_t
    _, hi2 = bounding_box(p, Cube(2 * t))
    y = (g.random((k, p.dim)) * 2 - 1) * hi2
    y = y[~np.asarray(region_contains(p, Cube(t), y))]
    pts = np.vstack([x, y])
    return np.asarray(distance_D(p, pts, np.zeros(p.dim))) / t


def find_kappa(p: DegeneracyParams, t_samples: int = 64, trials: int = 20_000, seed: int = 0) -> dict:
    """Statistical estimate of the largest kappa with B(0; kappa t) inside C_t.

    Bisection on kappa in (0, 1] against the sampled points of the
    complement of C_t; the returned value is the lower end of the final
    bracket, so every sampled complement point has D(x, 0) >= kappa t.
    """
    ts = np.r_[LOG_LO, 1.0, LOG_HI]
    g = rngmod.generator(seed, "kappa-t")
    ts = np.r_[ts, rngmod.log_uniform(g, LOG_LO, LOG_HI, max(t_samples - 3, 0))]
    per_t = max(trials // len(ts), 16)
    ratios = np.concatenate(
        [_outside_ratios(p, float(t), rngmod.generator(seed, "kappa", i), per_t) for i, t in enumerate(ts)]
    )
    lo, hi = 0.0, 1.0
    if np.all(ratios >= 1.0):
        lo = 1.0
    while hi - lo > KAPPA_TOL and lo < 1.0:
        mid = 0.5 * (lo + hi)
        if np.any(ratios < mid):
            hi = mid
        else:
            lo = mid
    return {
        "kappa": lo,
        "statistical": True,
        "t_samples": len(ts),
        "points": int(ratios.size),
        "min_ratio": float(ratios.min()),
        "tolerance": KAPPA_TOL,
    }


def ball_in_cube_violations(p: DegeneracyParams, kappa: float, trials: int, seed: int) -> int:
    """Fresh test: points of B(0; kappa t) that fall outside C_t."""
    viol = 0
    origin = np.zeros(p.dim)
    for start, stop, g in rngmod.blocks(seed, "ball-in-cube", trials):
        t = float(rngmod.log_uniform(g, LOG_LO, LOG_HI))
        ball = Ball(Point(origin[: p.n], origin[p.n :]), kappa * t)
        lo, hi = bounding_box(p, ball)
        k = stop - start
        pts = lo + (hi - lo) * g.random((k, p.dim))
        inside = np.asarray(distance_D(p, pts, origin)) < kappa * t
        outside_cube = ~np.asarray(region_contains(p, Cube(t), pts))
        viol += int(np.sum(inside & outside_cube))
    return viol


def check_embeddings(trials: int = 100_000, seed: int = 0, kappa_params: int = 8) -> dict:
    """Cube-in-ball and box-in-ball embeddings with their explicit constants,
    plus the existential ball-in-cube embedding at a located kappa.

    Parameters are redrawn for every block of trials.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cube = {"violations": 0, "worst_margin": np.inf}
    box = {"violations": 0, "worst_margin": np.inf}
    for start, stop, g in rngmod.blocks(seed, "embeddings", trials):
        p = random_params(g)
        v, w = lemma_cube_in_ball_violations(p, g, stop - start)
        cube["violations"] += v
        cube["worst_margin"] = min(cube["worst_margin"], w)
        v, w = lemma_box_in_ball_violations(p, g, stop - start)
        box["violations"] += v
        box["worst_margin"] = min(box["worst_margin"], w)
    located = []
    for i in range(kappa_params):
        g = rngmod.generator(seed, "kappa-params", i)
        p = random_params(g)
        k = find_kappa(p, seed=seed + i)
        fresh = ball_in_cube_violations(p, k["kappa"], max(trials // kappa_params, 1024), seed + 7919 * (i + 1))
        located.append({"params": p.as_dict(), "kappa": k["kappa"], "fresh_violations": fresh})
    return {
        "suite": "embeddings",
        "trials": trials,
        "seed": seed,
        "cube_in_ball": cube,
        "box_in_ball": box,
        "ball_in_cube": located,
        "violations": cube["violations"] + box["violations"] + sum(d["fresh_violations"] for d in located),
    }


def test_function_gradients(g, y, k: int, dim: int):
    """Gradients at y of random phi(z) = (a.z + b + q|z|^2) exp(-|z-c|^2 / 2s^2).

    One function per row; centres c are drawn near y so that the Gaussian
    factor is not negligible at the evaluation point.
    """
    s = rngmod.log_uniform(g, 1e-2, 1e2, k)[:, None]
    c = y + s * g.standard_normal((k, dim))
    a = g.standard_normal((k, dim))
    b = g.standard_normal((k, 1))
    q = g.standard_normal((k, 1))
    z = y - c
    gauss = np.exp(-0.5 * np.sum(z * z, axis=1, keepdims=True) / (s * s))
    poly = np.sum(a * y, axis=1, keepdims=True) + b + q * np.sum(y * y, axis=1, keepdims=True)
    return (a + 2 * q * y - poly * z / (s * s)) * gauss


def _random_points(g, k, dim):
    if dim == 0:
        return np.zeros((k, 0))
    v = g.standard_normal((k, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rngmod.log_uniform(g, LOG_LO, LOG_HI, k)[:, None]


def check_intertwining(p: DegeneracyParams, trials: int = 10_000, seed: int = 0) -> dict:
    """Compare Gamma(phi o sigma_t)(x) with t^2 Gamma-hat / Gamma-tilde of phi
    at sigma_t x, including the 2^(+-4 deltaM) factors.

    Also reports how many violations are "mixed branch", i.e. t, |x1| and
    |sigma_t x1| do not all lie on the same side of 1, and, when d_i = d_i',
    the largest relative deviation from exact quadratic scaling.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    e = p.exponents
    fac = 2.0 ** (4 * e.deltaM)
    exact = p.d1 == p.d1p and p.d2 == p.d2p
    lower = upper = mixed = 0
    worst = np.inf
    eq_err = 0.0
    for start, stop, g in rngmod.blocks(seed, "intertwining", trials):
        k = stop - start
        x1 = _random_points(g, k, p.n)
        x2 = _random_points(g, k, p.m)
        t = rngmod.log_uniform(g, 1e-2, 1e2, k)
        s1 = piecewise_power(t, (e.alpha, e.alphap))[:, None]
        s2 = piecewise_power(t, (e.beta, e.betap))[:, None]
        y1, y2 = s1 * x1, s2 * x2
        grad = test_function_gradients(g, np.hstack([y1, y2]), k, p.dim)
        g1, g2 = grad[:, : p.n], grad[:, p.n :]
        # chain rule: d(phi o sigma_t) = scale factor * (d phi)(sigma_t x)
        lhs = carre_du_champ(p, s1 * g1, s2 * g2, (x1, x2))
        t2 = t * t
        lo_side = t2 * carre_du_champ(p, g1, g2, (y1, y2), "hat") / fac
        hi_side = fac * t2 * carre_du_champ(p, g1, g2, (y1, y2), "tilde")
        bad_lo = lhs < lo_side * (1 - REL_TOL)
        bad_hi = lhs > hi_side * (1 + REL_TOL)
        lower += int(bad_lo.sum())
        upper += int(bad_hi.sum())
        sides = np.sign(np.stack([t, np.linalg.norm(x1, axis=1), np.linalg.norm(y1, axis=1)]) - 1.0)
        is_mixed = (sides.max(axis=0) > 0) & (sides.min(axis=0) < 0)
        mixed += int(np.sum((bad_lo | bad_hi) & is_mixed))
        pos = (lhs > 0) & (lo_side > 0)
        if np.any(pos):
            worst = min(worst, float(np.min(np.log(lhs[pos] / lo_side[pos]))))
        pos = (lhs > 0) & (hi_side > 0)
        if np.any(pos):
            worst = min(worst, float(np.min(np.log(hi_side[pos] / lhs[pos]))))
        if exact:
            ref = t2 * carre_du_champ(p, g1, g2, (y1, y2))
            pos = ref > 0
            if np.any(pos):
                eq_err = max(eq_err, float(np.max(np.abs(lhs[pos] - ref[pos]) / ref[pos])))
    return {
        "suite": "intertwining",
        "params": p.as_dict(),
        "trials": trials,
        "seed": seed,
        "violations": lower + upper,
        "lower_violations": lower,
        "upper_violations": upper,
        "violations_mixed_branch": mixed,
        "worst_log_margin": worst,
        "exact_scaling_max_rel_err": eq_err if exact else None,
    }
